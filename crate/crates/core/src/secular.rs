//! Coupled secular equations for the Robin problem on the equilateral triangle.
//!
//! For a mode `(m, n)` and Robin parameter `σ ≥ 0` the auxiliary angles
//! `L ∈ (-π/2, 0]`, `M, N ∈ [0, π/2)` solve
//!
//! ```text
//! (2L - M - N - (m+n)π) tan L = 3rσ
//! (2M - N - L + mπ)     tan M = 3rσ
//! (2N - L - M + nπ)     tan N = 3rσ
//! ```
//!
//! and the eigenvalue is `4π²/(27r²) (μ² + ν² + μν)` with
//! `μ = m + (2M - N - L)/π`, `ν = n + (2N - L - M)/π`.
//!
//! Angles are stored as `[L, M, N]` throughout; residual rows and Jacobian
//! rows/columns follow the same order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::geometry::TriangleGeometry;
use crate::scalar::{tolerance_range, Scalar};

/// Default residual tolerance (relative to `1 + 3rσ`).
pub const DEFAULT_TOL: f64 = 1e-12;
/// Newton iteration cap before the bisection fallback takes over.
pub const MAX_NEWTON_ITERATIONS: usize = 200;
/// Sweep cap for the coordinate-wise bisection iteration.
pub const MAX_BISECTION_SWEEPS: usize = 10_000;

/// Desymmetrized mode label `(m, n)` with `0 <= m <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    m: u32,
    n: u32,
}

impl ModeIndex {
    pub fn new(m: u32, n: u32) -> Result<Self, SolveError> {
        if m > n {
            return Err(SolveError::InvalidMode {
                m: m as i64,
                n: n as i64,
            });
        }
        Ok(ModeIndex { m, n })
    }

    /// Orders the pair so that `m <= n`.
    pub fn sorted(a: u32, b: u32) -> Self {
        ModeIndex {
            m: a.min(b),
            n: a.max(b),
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of eigenfunctions sharing this eigenvalue: symmetric and
    /// antisymmetric for `m < n`, symmetric only for `m = n`.
    pub fn weight(&self) -> u8 {
        if self.m < self.n {
            2
        } else {
            1
        }
    }

    /// `R² = m² + mn + n²`.
    pub fn r_squared(&self) -> u64 {
        let (m, n) = (self.m as u64, self.n as u64);
        m * m + m * n + n * n
    }

    /// `(m₁, m₂, m₃) = (m, n, -(m+n))`.
    pub fn signed_indices(&self) -> [i64; 3] {
        let (m, n) = (self.m as i64, self.n as i64);
        [m, n, -(m + n)]
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

/// How a solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    /// `σ = 0`: all angles vanish identically.
    Exact,
    Newton,
    Bisection,
    /// Angles read back from a solve cache.
    Cached,
}

/// Solution of the secular system for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecularSolution<T> {
    pub mode: ModeIndex,
    pub sigma: T,
    /// `[L, M, N]`.
    pub angles: [T; 3],
    pub mu: T,
    pub nu: T,
    /// `λ = -μ - ν`.
    pub lambda_aux: T,
    pub residual_max: T,
    pub iterations: usize,
    pub method: SolveMethod,
}

impl<T: Scalar> SecularSolution<T> {
    fn from_angles(
        mode: ModeIndex,
        sigma: T,
        angles: [T; 3],
        residual_max: T,
        iterations: usize,
        method: SolveMethod,
    ) -> Self {
        let [mu, nu, lambda_aux] = mu_values(mode, angles);
        SecularSolution {
            mode,
            sigma,
            angles,
            mu,
            nu,
            lambda_aux,
            residual_max,
            iterations,
            method,
        }
    }

    pub(crate) fn from_cached(mode: ModeIndex, sigma: T, angles: [T; 3]) -> Self {
        let method = if sigma == T::zero() {
            SolveMethod::Exact
        } else {
            SolveMethod::Cached
        };
        Self::from_angles(mode, sigma, angles, T::zero(), 0, method)
    }

    pub fn l(&self) -> T {
        self.angles[0]
    }

    pub fn m(&self) -> T {
        self.angles[1]
    }

    pub fn n(&self) -> T {
        self.angles[2]
    }

    /// Angles in compact order `(M₁, M₂, M₃) = (M, N, L)`.
    pub fn compact_angles(&self) -> [T; 3] {
        [self.angles[1], self.angles[2], self.angles[0]]
    }

    /// `(μ₁, μ₂, μ₃) = (μ, ν, λ)`.
    pub fn compact_mu(&self) -> [T; 3] {
        [self.mu, self.nu, self.lambda_aux]
    }

    /// `4π²/(27r²) (μ² + ν² + μν)`.
    pub fn eigenvalue(&self, geom: &TriangleGeometry<T>) -> T {
        geom.eig_prefactor * (self.mu * self.mu + self.nu * self.nu + self.mu * self.nu)
    }

    /// `Λ(σ) − Λ(0)` evaluated without cancellation against the Neumann value.
    pub fn shift(&self, geom: &TriangleGeometry<T>) -> T {
        eigen_shift(geom, self.mode, self.angles)
    }
}

/// `[μ, ν, λ]` for the given angles.
pub fn mu_values<T: Scalar>(mode: ModeIndex, angles: [T; 3]) -> [T; 3] {
    let [l, m_ang, n_ang] = angles;
    let pi = T::PI();
    let two = T::lit(2.0);
    let dmu = (two * m_ang - n_ang - l) / pi;
    let dnu = (two * n_ang - l - m_ang) / pi;
    let mu = T::from_u32(mode.m).unwrap() + dmu;
    let nu = T::from_u32(mode.n).unwrap() + dnu;
    // λ = (2L - M - N)/π - m - n, which equals -(μ + ν) identically
    let lambda = -(mu + nu);
    [mu, nu, lambda]
}

/// `Λ(σ) − Λ(0)` from the angles.
///
/// With `δμⱼ = μⱼ − mⱼ`, the identity `Σ mⱼ δμⱼ = (3/π) Σ mⱼ Mⱼ` gives
/// `Λ − Λ₀ = 2π²/(27r²) [ (6/π) Σ mⱼ Mⱼ + Σ δμⱼ² ]`, whose terms are all
/// non-negative on the solution box.
pub fn eigen_shift<T: Scalar>(geom: &TriangleGeometry<T>, mode: ModeIndex, angles: [T; 3]) -> T {
    let [l, m_ang, n_ang] = angles;
    let pi = T::PI();
    let two = T::lit(2.0);
    let mj = mode.signed_indices();
    let big = [m_ang, n_ang, l];
    let dmu = [
        (two * m_ang - n_ang - l) / pi,
        (two * n_ang - l - m_ang) / pi,
        (two * l - m_ang - n_ang) / pi,
    ];
    let mut linear = T::zero();
    let mut quad = T::zero();
    for j in 0..3 {
        linear = linear + T::from_int(mj[j]) * big[j];
        quad = quad + dmu[j] * dmu[j];
    }
    let half_pref = geom.eig_prefactor / two;
    half_pref * (T::lit(6.0) / pi * linear + quad)
}

/// Coefficients multiplying `tan L`, `tan M`, `tan N`.
fn coefficients<T: Scalar>(mode: ModeIndex, angles: [T; 3]) -> [T; 3] {
    let [l, m_ang, n_ang] = angles;
    let pi = T::PI();
    let two = T::lit(2.0);
    let m = T::from_u32(mode.m).unwrap();
    let n = T::from_u32(mode.n).unwrap();
    [
        two * l - m_ang - n_ang - (m + n) * pi,
        two * m_ang - n_ang - l + m * pi,
        two * n_ang - l - m_ang + n * pi,
    ]
}

/// Residuals `lhs − 3rσ` of the three equations, in `(L, M, N)` order.
pub fn secular_residuals<T: Scalar>(
    geom: &TriangleGeometry<T>,
    mode: ModeIndex,
    sigma: T,
    angles: [T; 3],
) -> [T; 3] {
    let c = T::lit(3.0) * geom.r * sigma;
    let coef = coefficients(mode, angles);
    [
        coef[0] * angles[0].tan() - c,
        coef[1] * angles[1].tan() - c,
        coef[2] * angles[2].tan() - c,
    ]
}

fn max_abs<T: Scalar, const D: usize>(v: &[T; D]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

fn jacobian_unchecked<T: Scalar>(mode: ModeIndex, angles: [T; 3]) -> [[T; 3]; 3] {
    let coef = coefficients(mode, angles);
    let two = T::lit(2.0);
    let mut jac = [[T::zero(); 3]; 3];
    for row in 0..3 {
        let t = angles[row].tan();
        let sec2 = T::one() + t * t;
        for (col, entry) in jac[row].iter_mut().enumerate() {
            *entry = if col == row {
                coef[row] * sec2 + two * t
            } else {
                -t
            };
        }
    }
    jac
}

/// Analytic Jacobian `∂ residualⱼ / ∂ angleₖ`.
///
/// Fails with [`SolveError::Singularity`] when an angle is within `1e-9` of `±π/2`.
pub fn secular_jacobian<T: Scalar>(
    mode: ModeIndex,
    sigma: T,
    angles: [T; 3],
) -> Result<[[T; 3]; 3], SolveError> {
    let limit = T::FRAC_PI_2() - T::lit(1e-9);
    if angles.iter().any(|a| !a.is_finite() || a.abs() >= limit) {
        return Err(SolveError::Singularity {
            mode,
            sigma: sigma.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(jacobian_unchecked(mode, angles))
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve_linear<T: Scalar, const D: usize>(
    mut a: [[T; D]; D],
    mut b: [T; D],
) -> Option<[T; D]> {
    for col in 0..D {
        let pivot = (col..D).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col] == T::zero() || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..D {
            let factor = a[row][col] / a[col][col];
            for k in col..D {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = [T::zero(); D];
    for row in (0..D).rev() {
        let mut acc = b[row];
        for k in row + 1..D {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn validate<T: Scalar>(sigma: T, tol: T) -> Result<(), SolveError> {
    if !sigma.is_finite() || sigma < T::zero() {
        return Err(SolveError::InvalidSigma(sigma.to_f64().unwrap_or(f64::NAN)));
    }
    let (lo, hi) = tolerance_range::<T>();
    if !tol.is_finite() || tol < lo || tol > hi {
        return Err(SolveError::InvalidTolerance {
            tol: tol.to_f64().unwrap_or(f64::NAN),
            lo: lo.to_f64().unwrap(),
            hi: hi.to_f64().unwrap(),
        });
    }
    Ok(())
}

/// Open box `(lo, hi)` per coordinate.
struct OpenBox<T, const D: usize> {
    lo: [T; D],
    hi: [T; D],
}

impl<T: Scalar, const D: usize> OpenBox<T, D> {
    fn contains(&self, x: &[T; D]) -> bool {
        (0..D).all(|i| x[i] > self.lo[i] && x[i] < self.hi[i])
    }

    fn clamp_inside(&self, mut x: [T; D]) -> [T; D] {
        for i in 0..D {
            let width = self.hi[i] - self.lo[i];
            let margin = width * T::lit(1e-6);
            x[i] = x[i].max(self.lo[i] + margin).min(self.hi[i] - margin);
        }
        x
    }

    /// Largest `α ∈ (0, 1]` keeping `x + αΔ` strictly inside, with a 0.9
    /// fraction-to-boundary margin.
    fn step_fraction(&self, x: &[T; D], dx: &[T; D]) -> T {
        let mut alpha = T::one();
        let tau = T::lit(0.9);
        for i in 0..D {
            if dx[i] > T::zero() {
                let room = self.hi[i] - x[i];
                if x[i] + dx[i] >= self.hi[i] {
                    alpha = alpha.min(tau * room / dx[i]);
                }
            } else if dx[i] < T::zero() {
                let room = x[i] - self.lo[i];
                if x[i] + dx[i] <= self.lo[i] {
                    alpha = alpha.min(tau * room / -dx[i]);
                }
            }
        }
        alpha
    }
}

enum NewtonOutcome<T, const D: usize> {
    Converged {
        x: [T; D],
        residual: T,
        iterations: usize,
    },
    Failed {
        best: [T; D],
        residual: T,
        iterations: usize,
    },
}

/// Damped Newton inside an open box.
///
/// Gives up (returning the best iterate) when the step would have to be cut
/// below `1e-3` to stay in the box, when the residual fails to decrease three
/// times in a row, or when the Jacobian is singular.
fn damped_newton<T: Scalar, const D: usize>(
    x0: [T; D],
    domain: &OpenBox<T, D>,
    target: T,
    residual: impl Fn(&[T; D]) -> [T; D],
    jacobian: impl Fn(&[T; D]) -> [[T; D]; D],
) -> NewtonOutcome<T, D> {
    let mut x = domain.clamp_inside(x0);
    let mut f = residual(&x);
    let mut fmax = max_abs(&f);
    let mut best = (x, fmax);
    let mut increases = 0;
    let min_box_fraction = T::lit(1e-3);

    for it in 0..MAX_NEWTON_ITERATIONS {
        if fmax <= target {
            let (x, fmax) = polish(x, f, fmax, domain, &residual, &jacobian);
            return NewtonOutcome::Converged {
                x,
                residual: fmax,
                iterations: it,
            };
        }
        let neg_f = f.map(|v| -v);
        let Some(dx) = solve_linear(jacobian(&x), neg_f) else {
            break;
        };
        let alpha_box = domain.step_fraction(&x, &dx);
        if alpha_box < min_box_fraction {
            break;
        }
        let mut alpha = alpha_box;
        let (mut trial, mut ft, mut ftmax);
        loop {
            trial = std::array::from_fn(|i| x[i] + alpha * dx[i]);
            ft = residual(&trial);
            ftmax = max_abs(&ft);
            if ftmax < fmax || alpha < T::lit(1e-4) {
                break;
            }
            alpha = alpha * T::lit(0.5);
        }
        if !(ftmax < fmax) {
            increases += 1;
            if increases >= 3 {
                break;
            }
        } else {
            increases = 0;
        }
        x = trial;
        f = ft;
        fmax = ftmax;
        if fmax < best.1 {
            best = (x, fmax);
        }
    }
    NewtonOutcome::Failed {
        best: best.0,
        residual: best.1,
        iterations: MAX_NEWTON_ITERATIONS,
    }
}

/// A few undamped steps past the tolerance, kept only while the residual
/// does not grow, so that the angles are accurate to a few ulps.
fn polish<T: Scalar, const D: usize>(
    mut x: [T; D],
    mut f: [T; D],
    mut fmax: T,
    domain: &OpenBox<T, D>,
    residual: &impl Fn(&[T; D]) -> [T; D],
    jacobian: &impl Fn(&[T; D]) -> [[T; D]; D],
) -> ([T; D], T) {
    for _ in 0..3 {
        if fmax == T::zero() {
            break;
        }
        let Some(dx) = solve_linear(jacobian(&x), f.map(|v| -v)) else {
            break;
        };
        let trial: [T; D] = std::array::from_fn(|i| x[i] + dx[i]);
        if !domain.contains(&trial) {
            break;
        }
        let ft = residual(&trial);
        let ftmax = max_abs(&ft);
        if ftmax > fmax {
            break;
        }
        let scale = max_abs(&x);
        x = trial;
        f = ft;
        fmax = ftmax;
        if max_abs(&dx) <= T::lit(2.0) * T::epsilon() * scale {
            break;
        }
    }
    (x, fmax)
}

fn solution_box<T: Scalar>() -> OpenBox<T, 3> {
    let half_pi = T::FRAC_PI_2();
    OpenBox {
        lo: [-half_pi, T::zero(), T::zero()],
        hi: [T::zero(), half_pi, half_pi],
    }
}

/// Leading-order starting point.
///
/// Nonzero signed indices use `arctan(3rσ/(π mⱼ))`; the `m = 0` angle uses
/// `√(3rσ/2)`; the `(0, 0)` mode uses `M = N = √(2rσ)`, `L = -M/2`.
pub fn initial_guess<T: Scalar>(geom: &TriangleGeometry<T>, mode: ModeIndex, sigma: T) -> [T; 3] {
    let c = T::lit(3.0) * geom.r * sigma;
    let pi = T::PI();
    if mode.n == 0 {
        let big_m = (T::lit(2.0) * geom.r * sigma).sqrt();
        return [-big_m / T::lit(2.0), big_m, big_m];
    }
    let [m1, m2, m3] = mode.signed_indices();
    let arctan_seed = |mj: i64| (c / (pi * T::from_int(mj))).atan();
    let big_m = if m1 == 0 {
        (c / T::lit(2.0)).sqrt()
    } else {
        arctan_seed(m1)
    };
    [arctan_seed(m3), big_m, arctan_seed(m2)]
}

/// Solves the secular system for `(L, M, N)` in the prescribed box.
///
/// Damped Newton with the analytic Jacobian, falling back to
/// coordinate-wise bisection when Newton stalls. At `σ = 0` the result is
/// exactly `(0, 0, 0)`. The returned residual satisfies
/// `residual_max <= tol · (1 + 3rσ)`.
pub fn solve_secular<T: Scalar>(
    geom: &TriangleGeometry<T>,
    mode: ModeIndex,
    sigma: T,
    tol: T,
) -> Result<SecularSolution<T>, SolveError> {
    validate(sigma, tol)?;
    if sigma == T::zero() {
        return Ok(SecularSolution::from_angles(
            mode,
            sigma,
            [T::zero(); 3],
            T::zero(),
            0,
            SolveMethod::Exact,
        ));
    }
    let c = T::lit(3.0) * geom.r * sigma;
    let target = tol * (T::one() + c);
    let seed = initial_guess(geom, mode, sigma);

    let newton = if mode.n == 0 {
        solve_degenerate_newton(c, seed, target)
    } else {
        damped_newton(
            seed,
            &solution_box(),
            target,
            |x| secular_residuals(geom, mode, sigma, *x),
            |x| jacobian_unchecked(mode, *x),
        )
    };

    let fallback_seed = match newton {
        NewtonOutcome::Converged {
            x,
            residual,
            iterations,
        } => {
            return Ok(SecularSolution::from_angles(
                mode,
                sigma,
                x,
                residual,
                iterations,
                SolveMethod::Newton,
            ))
        }
        NewtonOutcome::Failed { best, .. } => best,
    };

    solve_by_bisection(geom, mode, sigma, fallback_seed, tol)
}

/// `(0, 0)`: the symmetry forces `M = N`, leaving
/// `2(L − M) tan L = 3rσ` and `(M − L) tan M = 3rσ`.
fn solve_degenerate_newton<T: Scalar>(c: T, seed: [T; 3], target: T) -> NewtonOutcome<T, 3> {
    let half_pi = T::FRAC_PI_2();
    let two = T::lit(2.0);
    let domain = OpenBox {
        lo: [-half_pi, T::zero()],
        hi: [T::zero(), half_pi],
    };
    let residual = |x: &[T; 2]| {
        let [l, m] = *x;
        [two * (l - m) * l.tan() - c, (m - l) * m.tan() - c]
    };
    let jacobian = |x: &[T; 2]| {
        let [l, m] = *x;
        let (tl, tm) = (l.tan(), m.tan());
        [
            [two * tl + two * (l - m) * (T::one() + tl * tl), -two * tl],
            [-tm, tm + (m - l) * (T::one() + tm * tm)],
        ]
    };
    match damped_newton([seed[0], seed[1]], &domain, target, residual, jacobian) {
        NewtonOutcome::Converged {
            x,
            residual,
            iterations,
        } => NewtonOutcome::Converged {
            x: [x[0], x[1], x[1]],
            residual,
            iterations,
        },
        NewtonOutcome::Failed {
            best,
            residual,
            iterations,
        } => NewtonOutcome::Failed {
            best: [best[0], best[1], best[1]],
            residual,
            iterations,
        },
    }
}

/// Root of a function that is negative left of the root and positive right
/// of it on `[lo, hi]`.
fn bisect_sign_change<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let two = T::lit(2.0);
    for _ in 0..400 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

/// Coordinate-wise bisection (nonlinear Gauss–Seidel).
///
/// With the other two angles frozen, the L-equation is strictly decreasing in
/// `L` on `(-π/2, 0]`, and each of the M- and N-equations is negative up to a
/// single crossing on `[0, π/2)`. Each sweep moves each angle to the root of
/// its own equation; the map is a contraction since every off-diagonal
/// sensitivity is below `1/2`. The seed is only used for `M` and `N`.
pub fn solve_by_bisection<T: Scalar>(
    geom: &TriangleGeometry<T>,
    mode: ModeIndex,
    sigma: T,
    seed: [T; 3],
    tol: T,
) -> Result<SecularSolution<T>, SolveError> {
    validate(sigma, tol)?;
    if sigma == T::zero() {
        return Ok(SecularSolution::from_angles(
            mode,
            sigma,
            [T::zero(); 3],
            T::zero(),
            0,
            SolveMethod::Exact,
        ));
    }
    let c = T::lit(3.0) * geom.r * sigma;
    let target = tol * (T::one() + c);
    let pi = T::PI();
    let two = T::lit(2.0);
    let m = T::from_u32(mode.m).unwrap();
    let n = T::from_u32(mode.n).unwrap();
    let edge = T::FRAC_PI_2() * (T::one() - T::lit(4.0) * T::epsilon());

    let [mut l, mut big_m, mut big_n] = seed;
    big_m = big_m.max(T::zero()).min(edge);
    big_n = big_n.max(T::zero()).min(edge);
    let xtol = T::lit(4.0) * T::epsilon();

    let mut best = ([l, big_m, big_n], T::infinity());
    for sweep in 1..=MAX_BISECTION_SWEEPS {
        let prev = [l, big_m, big_n];
        // L-equation in t = -L: increasing in t
        let t = bisect_sign_change(
            |t: T| (-two * t - big_m - big_n - (m + n) * pi) * (-t).tan() - c,
            T::zero(),
            edge,
        );
        l = -t;
        big_m = bisect_sign_change(
            |x: T| (two * x - big_n - l + m * pi) * x.tan() - c,
            T::zero(),
            edge,
        );
        big_n = bisect_sign_change(
            |x: T| (two * x - l - big_m + n * pi) * x.tan() - c,
            T::zero(),
            edge,
        );
        let x = [l, big_m, big_n];
        let res = max_abs(&secular_residuals(geom, mode, sigma, x));
        if res < best.1 {
            best = (x, res);
        }
        let change = (0..3).fold(T::zero(), |acc, i| acc.max((x[i] - prev[i]).abs()));
        if change <= xtol * (T::one() + max_abs(&x)) {
            if res <= target {
                return Ok(SecularSolution::from_angles(
                    mode,
                    sigma,
                    x,
                    res,
                    sweep,
                    SolveMethod::Bisection,
                ));
            }
            break;
        }
    }
    Err(SolveError::NonConvergence {
        mode,
        sigma: sigma.to_f64().unwrap_or(f64::NAN),
        iterations: MAX_BISECTION_SWEEPS,
        best: best.0.map(|v| v.to_f64().unwrap_or(f64::NAN)),
        residual: best.1.to_f64().unwrap_or(f64::NAN),
    })
}

/// Solution on the analytic branch through `σ = 0` for `m >= 1`, allowing
/// small negative `σ` (where the signs of the angles flip).
///
/// Only used for central differences at the origin.
pub(crate) fn solve_analytic_branch<T: Scalar>(
    geom: &TriangleGeometry<T>,
    mode: ModeIndex,
    sigma: T,
) -> Result<[T; 3], SolveError> {
    debug_assert!(mode.m >= 1);
    if sigma == T::zero() {
        return Ok([T::zero(); 3]);
    }
    let c = T::lit(3.0) * geom.r * sigma;
    let pi = T::PI();
    let [m1, m2, m3] = mode.signed_indices();
    let seed = |mj: i64| (c / (pi * T::from_int(mj))).atan();
    let mut x = [seed(m3), seed(m1), seed(m2)];
    let mut fmax = max_abs(&secular_residuals(geom, mode, sigma, x));
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let jac = secular_jacobian(mode, sigma, x)?;
        let f = secular_residuals(geom, mode, sigma, x);
        let Some(dx) = solve_linear(jac, f.map(|v| -v)) else {
            break;
        };
        let trial: [T; 3] = std::array::from_fn(|i| x[i] + dx[i]);
        let tmax = max_abs(&secular_residuals(geom, mode, sigma, trial));
        let small = max_abs(&dx) <= T::lit(2.0) * T::epsilon() * max_abs(&x);
        if tmax > fmax && small {
            break;
        }
        x = trial;
        fmax = tmax;
        if small || fmax == T::zero() {
            break;
        }
    }
    let target = T::lit(1e-13) * (T::one() + c.abs());
    if fmax <= target {
        Ok(x)
    } else {
        Err(SolveError::NonConvergence {
            mode,
            sigma: sigma.to_f64().unwrap_or(f64::NAN),
            iterations: MAX_NEWTON_ITERATIONS,
            best: x.map(|v| v.to_f64().unwrap_or(f64::NAN)),
            residual: fmax.to_f64().unwrap_or(f64::NAN),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> TriangleGeometry<f64> {
        TriangleGeometry::new(1.0).unwrap()
    }

    fn mode(m: u32, n: u32) -> ModeIndex {
        ModeIndex::new(m, n).unwrap()
    }

    #[test]
    fn mode_index_basics() {
        assert!(ModeIndex::new(3, 2).is_err());
        assert_eq!(mode(1, 2).weight(), 2);
        assert_eq!(mode(2, 2).weight(), 1);
        assert_eq!(mode(0, 0).weight(), 1);
        assert_eq!(mode(1, 9).r_squared(), 91);
        assert_eq!(mode(5, 6).r_squared(), 91);
        assert_eq!(mode(2, 3).signed_indices(), [2, 3, -5]);
        assert_eq!(ModeIndex::sorted(7, 0), mode(0, 7));
        assert_eq!(mode(1, 2).to_string(), "(1, 2)");
    }

    #[test]
    fn zero_sigma_is_exact() {
        let g = unit();
        let s = solve_secular(&g, mode(1, 2), 0.0, DEFAULT_TOL).unwrap();
        assert_eq!(s.angles, [0.0, 0.0, 0.0]);
        assert_eq!(s.mu, 1.0);
        assert_eq!(s.nu, 2.0);
        assert_eq!(s.method, SolveMethod::Exact);
        for (a, b) in [(0, 0), (0, 5), (3, 3)] {
            let s = solve_secular(&g, mode(a, b), 0.0, DEFAULT_TOL).unwrap();
            assert_eq!(s.angles, [0.0; 3]);
        }
    }

    #[test]
    fn residuals_at_origin() {
        let g = unit();
        assert_eq!(secular_residuals(&g, mode(3, 4), 0.0, [0.0; 3]), [0.0; 3]);
        let c = 3.0 * g.r * 0.5;
        let r = secular_residuals(&g, mode(1, 1), 0.5, [0.0; 3]);
        for v in r {
            assert_relative_eq!(v, -c, max_relative = 1e-15);
        }
    }

    #[test]
    fn jacobian_at_origin() {
        let pi = std::f64::consts::PI;
        let j = secular_jacobian(mode(2, 5), 0.0, [0.0; 3]).unwrap();
        assert_relative_eq!(j[0][0], -7.0 * pi);
        assert_relative_eq!(j[1][1], 2.0 * pi);
        assert_relative_eq!(j[2][2], 5.0 * pi);
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    assert_eq!(j[r][c], 0.0);
                }
            }
        }
    }

    #[test]
    fn jacobian_singularity_flag() {
        let err = secular_jacobian(mode(1, 2), 1.0, [-1.0, std::f64::consts::FRAC_PI_2, 0.1]);
        assert!(matches!(err, Err(SolveError::Singularity { .. })));
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = unit();
        assert!(matches!(
            solve_secular(&g, mode(1, 2), -0.1, DEFAULT_TOL),
            Err(SolveError::InvalidSigma(_))
        ));
        assert!(matches!(
            solve_secular(&g, mode(1, 2), f64::NAN, DEFAULT_TOL),
            Err(SolveError::InvalidSigma(_))
        ));
        assert!(matches!(
            solve_secular(&g, mode(1, 2), 1.0, 1e-3),
            Err(SolveError::InvalidTolerance { .. })
        ));
        assert!(matches!(
            solve_secular(&g, mode(1, 2), 1.0, 1e-17),
            Err(SolveError::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn degenerate_mode_leading_order() {
        let g = unit();
        let sigma = 0.01;
        let s = solve_secular(&g, mode(0, 0), sigma, DEFAULT_TOL).unwrap();
        let lead = (2.0 * g.r * sigma).sqrt();
        assert_eq!(s.m(), s.n());
        assert!((s.m() - lead).abs() <= sigma);
        assert!((s.l() + lead / 2.0).abs() <= sigma);
        let res = secular_residuals(&g, s.mode, sigma, s.angles);
        assert!(max_abs(&res) <= DEFAULT_TOL * (1.0 + 3.0 * g.r * sigma));
    }

    #[test]
    fn mu_nu_lambda_identities() {
        let g = unit();
        for (a, b, s) in [(1, 2, 1.0), (0, 4, 0.3), (0, 0, 2.0), (7, 7, 4.0)] {
            let sol = solve_secular(&g, mode(a, b), s, DEFAULT_TOL).unwrap();
            assert!((sol.mu + sol.nu + sol.lambda_aux).abs() <= 1e-12);
            let [l, m, n] = sol.angles;
            let pi = std::f64::consts::PI;
            assert!((sol.mu - ((2.0 * m - n - l) / pi + a as f64)).abs() <= 1e-12);
            assert!((sol.nu - ((2.0 * n - l - m) / pi + b as f64)).abs() <= 1e-12);
            assert!(l < 0.0 && l > -pi / 2.0);
            assert!(m > 0.0 && m < pi / 2.0 && n > 0.0 && n < pi / 2.0);
        }
    }

    #[test]
    fn shift_matches_direct_difference() {
        let g = unit();
        for (a, b, s) in [(1, 2, 1.0), (0, 4, 0.3), (0, 0, 2.0), (12, 30, 0.05)] {
            let sol = solve_secular(&g, mode(a, b), s, DEFAULT_TOL).unwrap();
            let direct = sol.eigenvalue(&g) - g.neumann_eigenvalue(sol.mode.r_squared());
            let shift = sol.shift(&g);
            assert!((direct - shift).abs() <= 1e-12 * sol.eigenvalue(&g));
        }
    }

    #[test]
    fn newton_and_bisection_agree() {
        let g = unit();
        for (a, b, s) in [(1, 2, 1.0), (0, 3, 2.5), (0, 0, 0.7), (4, 9, 5.0)] {
            let md = mode(a, b);
            let newton = solve_secular(&g, md, s, DEFAULT_TOL).unwrap();
            let bis = solve_by_bisection(&g, md, s, [0.0; 3], DEFAULT_TOL).unwrap();
            assert_eq!(bis.method, SolveMethod::Bisection);
            for i in 0..3 {
                assert!((newton.angles[i] - bis.angles[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_precision_solve() {
        let g = TriangleGeometry::<f32>::new(1.0).unwrap();
        let s = solve_secular(&g, mode(1, 2), 1.0f32, 1e-5).unwrap();
        assert!((s.l() - (-0.086_640_93)).abs() < 1e-5);
        assert!((s.m() - 0.238_002_63).abs() < 1e-5);
        assert!((s.n() - 0.134_483_12).abs() < 1e-5);
    }

    #[test]
    fn analytic_branch_matches_box_solution() {
        let g = unit();
        let md = mode(2, 3);
        let x = solve_analytic_branch(&g, md, 0.01).unwrap();
        let s = solve_secular(&g, md, 0.01, DEFAULT_TOL).unwrap();
        for i in 0..3 {
            assert!((x[i] - s.angles[i]).abs() < 1e-14);
        }
        // odd to leading order in sigma
        let y = solve_analytic_branch(&g, md, -0.01).unwrap();
        for i in 0..3 {
            assert!((x[i] + y[i]).abs() < 0.05 * x[i].abs());
            assert!(x[i].signum() == -y[i].signum());
        }
    }

    #[test]
    fn linear_solver() {
        let a = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let x = solve_linear(a, [3.0, 5.0, 5.0]).unwrap();
        for v in x {
            assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        }
        assert!(solve_linear([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }

    #[test]
    fn reference_values() {
        let g = unit();
        let s = solve_secular(&g, mode(1, 2), 1.0, DEFAULT_TOL).unwrap();
        assert_relative_eq!(s.l(), -0.086_640_929_437_859_34, max_relative = 1e-13);
        assert_relative_eq!(s.m(), 0.238_002_628_048_553_13, max_relative = 1e-13);
        assert_relative_eq!(s.n(), 0.134_483_122_085_746_56, max_relative = 1e-13);
        assert_relative_eq!(
            s.eigenvalue(&g),
            136.111_151_624_288_5,
            max_relative = 1e-13
        );

        let s = solve_secular(&g, mode(0, 5), 0.3, DEFAULT_TOL).unwrap();
        assert_relative_eq!(s.l(), -0.016_125_647_972_706_843, max_relative = 1e-12);
        assert_relative_eq!(s.m(), 0.352_978_269_489_812_04, max_relative = 1e-13);
        assert_relative_eq!(s.n(), 0.016_863_727_516_471_634, max_relative = 1e-12);

        let s = solve_secular(&g, mode(0, 0), 1e-4, DEFAULT_TOL).unwrap();
        assert_relative_eq!(s.l(), -0.003_799_187_567_245_301_3, max_relative = 1e-12);
        assert_relative_eq!(s.m(), 0.007_598_265_464_030_64, max_relative = 1e-12);
        assert_relative_eq!(
            s.eigenvalue(&g),
            0.000_692_810_323_200_752_8,
            max_relative = 1e-10
        );
    }
}
