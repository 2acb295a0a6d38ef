//! Small-`σ` behaviour of the eigenvalue branches.
//!
//! For `m >= 1` the branch through `Λ_{m,n}(0)` is analytic in `σ` with
//!
//! ```text
//! Λ(σ) = Λ(0) + (4/r) σ − (4 F_R/π²) σ² (1 + rσ) + O(σ³/m⁴),
//! F_R(m, n) = 1/m² + 1/n² + 1/(m+n)² = R⁴ / (mn(m+n))²,
//! ```
//!
//! while the `m = 0` branches start with slope `10/(3r)` and carry a `√σ`
//! term in their angles.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{DerivativeError, DomainError, SolveError};
use crate::geometry::TriangleGeometry;
use crate::scalar::Scalar;
use crate::secular::{eigen_shift, solve_analytic_branch, solve_secular, ModeIndex};
use crate::spectrum::clusters_up_to;

fn zero_index(mode: ModeIndex) -> DomainError {
    DomainError::ZeroIndex {
        m: mode.m() as i64,
        n: mode.n() as i64,
    }
}

/// `F_R` as `(1/m² + 1/n² + 1/(m+n)², R⁴/(mn(m+n))²)`.
pub fn f_r_forms<T: Scalar>(mode: ModeIndex) -> Result<(T, T), DomainError> {
    if mode.m() == 0 {
        return Err(zero_index(mode));
    }
    let m = T::from_u32(mode.m()).unwrap();
    let n = T::from_u32(mode.n()).unwrap();
    let s = m + n;
    let sum_form = T::one() / (m * m) + T::one() / (n * n) + T::one() / (s * s);
    let r2 = T::from_u64(mode.r_squared()).unwrap();
    let p = m * n * s;
    let norm_form = r2 * r2 / (p * p);
    Ok((sum_form, norm_form))
}

/// `F_R(m, n)`; both closed forms are evaluated and must agree.
pub fn f_r<T: Scalar>(mode: ModeIndex) -> Result<T, DomainError> {
    let (a, b) = f_r_forms::<T>(mode)?;
    debug_assert!((a - b).abs() <= T::lit(64.0) * T::epsilon() * a);
    Ok(a)
}

/// `F_R(m, n)` as an exact fraction.
pub fn f_r_exact(mode: ModeIndex) -> Result<Ratio<i128>, DomainError> {
    if mode.m() == 0 {
        return Err(zero_index(mode));
    }
    let m = mode.m() as i128;
    let n = mode.n() as i128;
    let r2 = mode.r_squared() as i128;
    let p = m * n * (m + n);
    Ok(Ratio::new(r2 * r2, p * p))
}

/// Which closed form the slope `c1` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SlopeKind {
    /// `m >= 1`: `c1 = 4/r` exactly.
    Analytic,
    /// `m = 0 < n`: `c1 = 10/(3r)`; `Λ` has a `σ^{3/2}` term, so no `c2`.
    ZeroBranch,
    /// `(0, 0)`: leading order `Λ ≈ 2σ/r` (perimeter over area).
    GroundLeadingOrder,
}

/// Taylor data of `Λ_{m,n}` at `σ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionCoefficients<T> {
    pub mode: ModeIndex,
    pub kind: SlopeKind,
    pub lambda0: T,
    pub c1: T,
    /// `Λ''(0) = −8 F_R/π²`.
    pub c2: Option<T>,
    /// Leading part of `Λ'''(0)`: `−24 r F_R/π²`, exact up to `O(1/m⁴)`.
    pub c3_leading: Option<T>,
    pub f_r: Option<T>,
}

pub fn predicted_derivatives_at_zero<T: Scalar>(
    geom: &TriangleGeometry<T>,
    mode: ModeIndex,
) -> ExpansionCoefficients<T> {
    let lambda0 = geom.neumann_eigenvalue(mode.r_squared());
    let pi2 = T::PI() * T::PI();
    let r = geom.r;
    if mode.m() >= 1 {
        let f = f_r::<T>(mode).expect("m >= 1");
        ExpansionCoefficients {
            mode,
            kind: SlopeKind::Analytic,
            lambda0,
            c1: T::lit(4.0) / r,
            c2: Some(-T::lit(8.0) * f / pi2),
            c3_leading: Some(-T::lit(24.0) * r * f / pi2),
            f_r: Some(f),
        }
    } else {
        let (kind, c1) = if mode.n() == 0 {
            (SlopeKind::GroundLeadingOrder, T::lit(2.0) / r)
        } else {
            (SlopeKind::ZeroBranch, T::lit(10.0) / (T::lit(3.0) * r))
        };
        ExpansionCoefficients {
            mode,
            kind,
            lambda0,
            c1,
            c2: None,
            c3_leading: None,
            f_r: None,
        }
    }
}

/// Fitted `c` in `|Λ(σ) − expansion_3term(σ)| <= c · r σ³/m⁴`, from the grid
/// `1 <= m <= 50`, `rσ <= 0.0145`; the largest value observed there is 0.8497.
pub const REMAINDER_CONSTANT: f64 = 0.85;

/// `Λ(0) + (4/r) σ − (4 F_R/π²) σ² (1 + rσ)`.
pub fn expansion_3term<T: Scalar>(
    geom: &TriangleGeometry<T>,
    mode: ModeIndex,
    sigma: T,
) -> Result<T, DomainError> {
    Ok(geom.neumann_eigenvalue(mode.r_squared()) + expansion_shift(geom, mode, sigma)?)
}

/// The `σ`-dependent part of [`expansion_3term`].
pub fn expansion_shift<T: Scalar>(
    geom: &TriangleGeometry<T>,
    mode: ModeIndex,
    sigma: T,
) -> Result<T, DomainError> {
    let f = f_r::<T>(mode)?;
    let pi2 = T::PI() * T::PI();
    let four = T::lit(4.0);
    Ok(four * sigma / geom.r - four * f / pi2 * sigma * sigma * (T::one() + geom.r * sigma))
}

/// `Λ(σ) − expansion_3term(σ)`, formed from shifts so that `Λ(0)` cancels exactly.
pub fn expansion_remainder(
    geom: &TriangleGeometry<f64>,
    mode: ModeIndex,
    sigma: f64,
    tol: f64,
) -> Result<f64, DerivativeError> {
    let predicted = expansion_shift(geom, mode, sigma)?;
    let sol = solve_secular(geom, mode, sigma, tol)?;
    Ok(sol.shift(geom) - predicted)
}

/// `M_j'(0) = 3r/(π mⱼ)` in compact order `(M, N, L)`.
pub fn predicted_angle_first(geom: &TriangleGeometry<f64>, mode: ModeIndex) -> [f64; 3] {
    let mj = mode.signed_indices();
    mj.map(|m| 3.0 * geom.r / (std::f64::consts::PI * m as f64))
}

/// `M_j''(0) = −(18r²/π³)(mⱼ² + 2mᵢmₖ)/(mⱼ³ mᵢ mₖ)`.
pub fn predicted_angle_second(geom: &TriangleGeometry<f64>, mode: ModeIndex) -> [f64; 3] {
    let mj = mode.signed_indices().map(|m| m as f64);
    let k = -18.0 * geom.r * geom.r / std::f64::consts::PI.powi(3);
    std::array::from_fn(|j| {
        let (a, b, c) = (mj[j], mj[(j + 1) % 3], mj[(j + 2) % 3]);
        k * (a * a + 2.0 * b * c) / (a.powi(3) * b * c)
    })
}

/// Leading part of `M_j'''(0)`: `−2 (M_j'(0))³`.
pub fn predicted_angle_third_leading(geom: &TriangleGeometry<f64>, mode: ModeIndex) -> [f64; 3] {
    predicted_angle_first(geom, mode).map(|d| -2.0 * d * d * d)
}

/// One predicted-versus-measured comparison.
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeCheck {
    pub quantity: String,
    pub predicted: f64,
    pub measured: f64,
    pub rel_error: f64,
    /// Relative disagreement between the last two extrapolation levels.
    pub fd_spread: f64,
}

impl DerivativeCheck {
    fn new(quantity: String, predicted: f64, measured: f64, fd_spread: f64) -> Self {
        DerivativeCheck {
            quantity,
            predicted,
            measured,
            rel_error: ((measured - predicted) / predicted).abs(),
            fd_spread,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeReport {
    pub mode: ModeIndex,
    pub order: u8,
    pub step: f64,
    /// `M1, M2, M3` (compact order `M, N, L`) then `Lambda`.
    pub checks: Vec<DerivativeCheck>,
}

/// Extrapolation levels deeper than this spread mean the differences are noise.
const MAX_FD_SPREAD: f64 = 1e-3;

/// Compact angles and `Λ − Λ(0)` on the analytic branch.
fn branch_sample(
    geom: &TriangleGeometry<f64>,
    mode: ModeIndex,
    s: f64,
) -> Result<[f64; 4], SolveError> {
    let angles = solve_analytic_branch(geom, mode, s)?;
    let shift = eigen_shift(geom, mode, angles);
    Ok([angles[1], angles[2], angles[0], shift])
}

/// Central-difference estimate of the `order`-th derivative at 0 with step `h`.
fn central_stencil(
    geom: &TriangleGeometry<f64>,
    mode: ModeIndex,
    order: u8,
    h: f64,
) -> Result<[f64; 4], SolveError> {
    let f = |s: f64| branch_sample(geom, mode, s);
    let mut out = [0.0; 4];
    match order {
        1 => {
            let (p, m) = (f(h)?, f(-h)?);
            for i in 0..4 {
                out[i] = (p[i] - m[i]) / (2.0 * h);
            }
        }
        2 => {
            // every quantity vanishes at σ = 0
            let (p, m) = (f(h)?, f(-h)?);
            for i in 0..4 {
                out[i] = (p[i] + m[i]) / (h * h);
            }
        }
        _ => {
            let (p2, p1, m1, m2) = (f(2.0 * h)?, f(h)?, f(-h)?, f(-2.0 * h)?);
            for i in 0..4 {
                out[i] = (p2[i] - 2.0 * p1[i] + 2.0 * m1[i] - m2[i]) / (2.0 * h * h * h);
            }
        }
    }
    Ok(out)
}

/// Two levels of Richardson extrapolation in `h²` on steps `h, h/2, h/4`.
fn richardson_central(
    geom: &TriangleGeometry<f64>,
    mode: ModeIndex,
    order: u8,
    h: f64,
) -> Result<([f64; 4], [f64; 4]), SolveError> {
    let d0 = central_stencil(geom, mode, order, h)?;
    let d1 = central_stencil(geom, mode, order, h / 2.0)?;
    let d2 = central_stencil(geom, mode, order, h / 4.0)?;
    let mut value = [0.0; 4];
    let mut spread = [0.0; 4];
    for i in 0..4 {
        let r1 = (4.0 * d1[i] - d0[i]) / 3.0;
        let r2 = (4.0 * d2[i] - d1[i]) / 3.0;
        value[i] = (16.0 * r2 - r1) / 15.0;
        spread[i] = ((r2 - r1) / value[i]).abs();
    }
    Ok((value, spread))
}

/// Base step: a small fraction of `π m/(3r)`, the scale on which the
/// angles of the smallest index leave the linear regime.
pub fn derivative_step(geom: &TriangleGeometry<f64>, mode: ModeIndex) -> f64 {
    0.02 * std::f64::consts::PI * mode.m().max(1) as f64 / (3.0 * geom.r)
}

/// Compares finite differences of the solver at `σ = 0` with the closed forms.
///
/// The differences straddle `σ = 0` by following the analytic continuation of
/// the branch to small negative `σ`.
pub fn secular_derivative_check(
    geom: &TriangleGeometry<f64>,
    mode: ModeIndex,
    order: u8,
) -> Result<DerivativeReport, DerivativeError> {
    if mode.m() == 0 {
        return Err(zero_index(mode).into());
    }
    if !(1..=3).contains(&order) {
        return Err(DomainError::Invalid(format!("derivative order {order} not in 1..=3")).into());
    }
    let step = derivative_step(geom, mode);
    let (measured, spread) = richardson_central(geom, mode, order, step)?;
    let coeffs = predicted_derivatives_at_zero(geom, mode);
    let (angles, lambda, tick) = match order {
        1 => (predicted_angle_first(geom, mode), coeffs.c1, "'"),
        2 => (
            predicted_angle_second(geom, mode),
            coeffs.c2.expect("m >= 1"),
            "''",
        ),
        _ => (
            predicted_angle_third_leading(geom, mode),
            coeffs.c3_leading.expect("m >= 1"),
            "'''",
        ),
    };
    let predicted = [angles[0], angles[1], angles[2], lambda];
    let names = ["M1", "M2", "M3", "Lambda"];
    let mut checks = Vec::with_capacity(4);
    for i in 0..4 {
        let quantity = format!("{}{}", names[i], tick);
        if spread[i] > MAX_FD_SPREAD {
            return Err(DerivativeError::StepTooSmall {
                quantity,
                step,
                spread: spread[i],
            });
        }
        checks.push(DerivativeCheck::new(
            quantity,
            predicted[i],
            measured[i],
            spread[i],
        ));
    }
    Ok(DerivativeReport {
        mode,
        order,
        step,
        checks,
    })
}

/// One-sided slope `Λ'(0⁺)` for the `m = 0` modes.
///
/// `Λ(σ) − Λ(0)` expands in powers of `√σ` there, so the quotients
/// `D(h) = (Λ(h) − Λ(0))/h` are extrapolated first in `√h`, then in `h`.
pub fn zero_branch_slope(
    geom: &TriangleGeometry<f64>,
    mode: ModeIndex,
    tol: f64,
) -> Result<DerivativeCheck, DerivativeError> {
    if mode.m() != 0 {
        return Err(DomainError::Invalid(format!("mode {mode} is not on the m = 0 branch")).into());
    }
    let h = 1e-3 / geom.r;
    let quotient = |s: f64| -> Result<f64, DerivativeError> {
        Ok(solve_secular(geom, mode, s, tol)?.shift(geom) / s)
    };
    let d: Vec<f64> = [h, h / 4.0, h / 16.0]
        .iter()
        .map(|&s| quotient(s))
        .collect::<Result<_, _>>()?;
    let r0 = 2.0 * d[1] - d[0];
    let r1 = 2.0 * d[2] - d[1];
    let value = (4.0 * r1 - r0) / 3.0;
    let spread = ((r1 - r0) / value).abs();
    let predicted = predicted_derivatives_at_zero(geom, mode).c1;
    if spread > 0.1 {
        return Err(DerivativeError::StepTooSmall {
            quantity: "Lambda'".into(),
            step: h,
            spread,
        });
    }
    Ok(DerivativeCheck::new(
        "Lambda'".into(),
        predicted,
        value,
        spread,
    ))
}

/// `f(x) = 1/(x²(1 − x²)²)` with its first two derivatives.
pub fn profile_f<T: Scalar>(x: T) -> Result<(T, T, T), DomainError> {
    let edge = T::one() / T::lit(3.0).sqrt();
    // allow the rounded value of 1/√3 itself
    if !(x > T::zero()) || x > edge * (T::one() + T::epsilon()) {
        return Err(DomainError::ProfileArgument(x.to_f64().unwrap_or(f64::NAN)));
    }
    let t2 = x * x;
    let u = T::one() - t2;
    let f = T::one() / (t2 * u * u);
    let f1 = -T::lit(2.0) * (T::one() - T::lit(3.0) * t2) / (t2 * x * u * u * u);
    let f2 = T::lit(6.0) * (T::lit(7.0) * t2 * t2 - T::lit(4.0) * t2 + T::one())
        / (t2 * t2 * u * u * u * u);
    Ok((f, f1, f2))
}

/// Location and value of `min f''` on `(0, 1/√3]` by golden-section search.
pub fn profile_f2_minimum() -> (f64, f64) {
    let f2 = |t: f64| profile_f(t).expect("inside domain").2;
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.1, 1.0 / 3f64.sqrt());
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f2(c), f2(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f2(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f2(d);
        }
    }
    let t = (a + b) / 2.0;
    (t, f2(t))
}

/// Within-cluster ordering of `F_R` for indices `1 <= m < m'`.
#[derive(Debug, Clone, Serialize)]
pub struct FrSeparationReport {
    pub r2_max: u64,
    pub clusters_checked: usize,
    pub pairs_checked: usize,
    /// Pairs `m < m'` with `F_R(m, n) <= F_R(m', n')`.
    pub violations: Vec<(ModeIndex, ModeIndex)>,
    /// `min (F_R(m,n) − F_R(m',n')) · m⁴` over all pairs.
    pub min_scaled_difference: f64,
    pub argmin: Option<(ModeIndex, ModeIndex)>,
}

/// Exhaustive check over clusters with `R² <= r2_max` (exact arithmetic).
pub fn check_fr_separation(r2_max: u64) -> FrSeparationReport {
    let mut report = FrSeparationReport {
        r2_max,
        clusters_checked: 0,
        pairs_checked: 0,
        violations: Vec::new(),
        min_scaled_difference: f64::INFINITY,
        argmin: None,
    };
    for cluster in clusters_up_to(r2_max) {
        let modes: Vec<ModeIndex> = cluster.modes.into_iter().filter(|m| m.m() >= 1).collect();
        if modes.len() < 2 {
            continue;
        }
        report.clusters_checked += 1;
        for (i, &a) in modes.iter().enumerate() {
            let fa = f_r_exact(a).expect("m >= 1");
            for &b in &modes[i + 1..] {
                report.pairs_checked += 1;
                let diff = fa - f_r_exact(b).expect("m >= 1");
                if diff <= Ratio::from_integer(0) {
                    report.violations.push((a, b));
                }
                let m4 = (a.m() as i128).pow(4);
                let scaled = diff * Ratio::from_integer(m4);
                let scaled = *scaled.numer() as f64 / *scaled.denom() as f64;
                if scaled < report.min_scaled_difference {
                    report.min_scaled_difference = scaled;
                    report.argmin = Some((a, b));
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secular::DEFAULT_TOL;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit() -> TriangleGeometry<f64> {
        TriangleGeometry::new(1.0).unwrap()
    }

    fn mode(m: u32, n: u32) -> ModeIndex {
        ModeIndex::new(m, n).unwrap()
    }

    #[test]
    fn f_r_values() {
        assert_eq!(f_r_exact(mode(1, 9)).unwrap(), Ratio::new(8281, 8100));
        assert_relative_eq!(
            f_r::<f64>(mode(1, 9)).unwrap(),
            8281.0 / 8100.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            f_r::<f64>(mode(5, 6)).unwrap(),
            1.0 / 25.0 + 1.0 / 36.0 + 1.0 / 121.0,
            max_relative = 1e-15
        );
        assert!(matches!(
            f_r::<f64>(mode(0, 3)),
            Err(DomainError::ZeroIndex { .. })
        ));
        let diff = f_r::<f64>(mode(1, 9)).unwrap() - f_r::<f64>(mode(5, 6)).unwrap();
        assert!((diff - 0.946_303_438_424_650_6).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn f_r_forms_agree(m in 1u32..500, extra in 0u32..500) {
            let md = mode(m, m + extra);
            let (a, b) = f_r_forms::<f64>(md).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a);
        }

        #[test]
        fn diagonal_f_r(m in 1u32..1000) {
            let v = f_r::<f64>(mode(m, m)).unwrap();
            let expect = 9.0 / (4.0 * (m as f64).powi(2));
            prop_assert!((v - expect).abs() <= 1e-14 * expect);
        }
    }

    #[test]
    fn f_r_profile_identity() {
        let (f, _, _) = profile_f(3.0 / 7.0).unwrap();
        assert_relative_eq!(
            f / 49.0,
            f_r::<f64>(mode(3, 5)).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn predicted_values() {
        let g = unit();
        let c = predicted_derivatives_at_zero(&g, mode(1, 2));
        assert_relative_eq!(c.c1, 8.0 * 3f64.sqrt(), max_relative = 1e-14);
        let c = predicted_derivatives_at_zero(&g, mode(0, 5));
        assert_relative_eq!(c.c1, 20.0 * 3f64.sqrt() / 3.0, max_relative = 1e-14);
        assert!(c.c2.is_none());
        let c = predicted_derivatives_at_zero(&g, mode(3, 5));
        assert!((c.c2.unwrap() + 0.135_151_201_069_585).abs() < 1e-13);
        let c = predicted_derivatives_at_zero(&g, mode(0, 0));
        assert_eq!(c.kind, SlopeKind::GroundLeadingOrder);
    }

    #[test]
    fn expansion_at_origin() {
        let g = unit();
        let md = mode(2, 7);
        assert_eq!(
            expansion_3term(&g, md, 0.0).unwrap(),
            g.neumann_eigenvalue(md.r_squared())
        );
        assert!(expansion_3term(&g, mode(0, 2), 0.1).is_err());
    }

    #[test]
    fn remainder_is_small() {
        let g = unit();
        for (md, s) in [(mode(1, 2), 0.01), (mode(10, 14), 0.05)] {
            let rem = expansion_remainder(&g, md, s, DEFAULT_TOL).unwrap();
            let m4 = (md.m() as f64).powi(4);
            assert!(rem.abs() * m4 / s.powi(3) < 1.0);
        }
    }

    #[test]
    fn first_derivatives() {
        let g = unit();
        let rep = secular_derivative_check(&g, mode(2, 3), 1).unwrap();
        for c in &rep.checks {
            assert!(c.rel_error < 1e-6, "{c:?}");
        }
        assert_relative_eq!(
            rep.checks[0].predicted,
            3.0 * g.r / (2.0 * std::f64::consts::PI)
        );
    }

    #[test]
    fn second_derivatives() {
        let g = unit();
        let rep = secular_derivative_check(&g, mode(4, 7), 2).unwrap();
        for c in &rep.checks {
            assert!(c.rel_error < 1e-4, "{c:?}");
        }
    }

    #[test]
    fn third_derivative_leading_order() {
        let g = unit();
        let rep = secular_derivative_check(&g, mode(20, 30), 3).unwrap();
        let lam = &rep.checks[3];
        assert!(lam.measured < 0.0);
        assert!(lam.rel_error < 0.05, "{lam:?}");
    }

    #[test]
    fn zero_branch() {
        let g = unit();
        let c = zero_branch_slope(&g, mode(0, 5), DEFAULT_TOL).unwrap();
        assert!(c.rel_error < 1e-3, "{c:?}");
        let c = zero_branch_slope(&g, mode(0, 0), DEFAULT_TOL).unwrap();
        assert!(c.rel_error < 1e-3, "{c:?}");
        assert!(zero_branch_slope(&g, mode(1, 2), DEFAULT_TOL).is_err());
    }

    #[test]
    fn profile_values() {
        let x = 1.0 / 3f64.sqrt();
        let (f, f1, f2) = profile_f(x).unwrap();
        assert_relative_eq!(f, 6.75, max_relative = 1e-14);
        assert!(f1.abs() < 1e-12);
        assert_relative_eq!(f2, 121.5, max_relative = 1e-12);
        assert!(profile_f(0.0).is_err());
        assert!(profile_f(0.6).is_err());
        let (t, v) = profile_f2_minimum();
        assert!((v - 119.167).abs() < 0.01);
        assert!((t - 0.554_85).abs() < 1e-4);
    }

    #[test]
    fn profile_signs() {
        for k in 1..=1000 {
            let x = k as f64 / 1000.0 / 3f64.sqrt();
            let (_, f1, f2) = profile_f(x).unwrap();
            if k < 1000 {
                assert!(f1 < 0.0);
            }
            assert!(f2 > 0.0);
        }
    }

    #[test]
    fn fr_separation_small() {
        let rep = check_fr_separation(2000);
        assert!(rep.violations.is_empty());
        assert!(rep.min_scaled_difference > 0.0);
        assert!(rep.pairs_checked > 0);
    }
}
