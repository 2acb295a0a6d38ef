//! Neumann eigenfunctions of the equilateral triangle.
//!
//! The triangle has vertices `(0, 0)`, `(h, 0)`, `(h/2, 3r)` and is symmetric
//! about `x = h/2 = √3 r`. With `ℓ = −m − n`, `Y = 3r − y`, `X = x − √3 r`,
//!
//! ```text
//! T = cos(πℓY/3r) C(√3π(m−n)X/9r) + cos(πmY/3r) C(√3π(n−ℓ)X/9r)
//!   + cos(πnY/3r) C(√3π(ℓ−m)X/9r)
//! ```
//!
//! with `C = cos` for the symmetric and `C = sin` for the antisymmetric mode.
//! Each term satisfies `ΔT = −Λ(0) T` with `Λ(0) = 4π²/(27r²)(m² + mn + n²)`.

use serde::Serialize;

use crate::error::DomainError;
use crate::geometry::TriangleGeometry;
use crate::scalar::Scalar;
use crate::secular::ModeIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

/// `T^s_{m,n}` (any `m <= n`) or `T^a_{m,n}` (`m < n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct NeumannMode {
    pub mode: ModeIndex,
    pub parity: Parity,
    pub ell: i64,
}

impl NeumannMode {
    pub fn new(mode: ModeIndex, parity: Parity) -> Result<Self, DomainError> {
        if parity == Parity::Antisymmetric && mode.m() == mode.n() {
            return Err(DomainError::Invalid(format!(
                "antisymmetric mode needs m < n, got {mode}"
            )));
        }
        Ok(NeumannMode {
            mode,
            parity,
            ell: -(mode.m() as i64) - mode.n() as i64,
        })
    }

    /// All eigenfunctions with `m, n <= max_index`, symmetric before antisymmetric.
    pub fn all_up_to(max_index: u32) -> Vec<NeumannMode> {
        let mut out = Vec::new();
        for m in 0..=max_index {
            for n in m..=max_index {
                let mode = ModeIndex::sorted(m, n);
                out.push(NeumannMode::new(mode, Parity::Symmetric).unwrap());
                if m < n {
                    out.push(NeumannMode::new(mode, Parity::Antisymmetric).unwrap());
                }
            }
        }
        out
    }
}

/// `(a, b)` frequency pairs of the three terms.
fn frequencies<T: Scalar>(geom: &TriangleGeometry<T>, nm: &NeumannMode) -> [(T, T); 3] {
    let pi = T::PI();
    let r = geom.r;
    let sqrt3 = T::lit(3.0).sqrt();
    let l = nm.ell;
    let m = nm.mode.m() as i64;
    let n = nm.mode.n() as i64;
    let a = |k: i64| pi * T::from_int(k) / (T::lit(3.0) * r);
    let b = |k: i64| sqrt3 * pi * T::from_int(k) / (T::lit(9.0) * r);
    [(a(l), b(m - n)), (a(m), b(n - l)), (a(n), b(l - m))]
}

fn check_inside<T: Scalar>(geom: &TriangleGeometry<T>, x: T, y: T) -> Result<(), DomainError> {
    let slack = T::lit(1e-12) * geom.h;
    let sqrt3 = T::lit(3.0).sqrt();
    let inside = x.is_finite()
        && y.is_finite()
        && y >= -slack
        && y <= sqrt3 * x + slack
        && y <= sqrt3 * (geom.h - x) + slack;
    if inside {
        Ok(())
    } else {
        Err(DomainError::OutsideDomain {
            x: x.to_f64().unwrap_or(f64::NAN),
            y: y.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Value, gradient and Laplacian at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub dx: T,
    pub dy: T,
    pub laplacian: T,
}

/// Closed-form value and derivatives of the eigenfunction at `(x, y)`.
pub fn neumann_jet<T: Scalar>(
    geom: &TriangleGeometry<T>,
    nm: &NeumannMode,
    x: T,
    y: T,
) -> Result<Jet<T>, DomainError> {
    check_inside(geom, x, y)?;
    let big_y = T::lit(3.0) * geom.r - y;
    let big_x = x - T::lit(3.0).sqrt() * geom.r;
    let mut jet = Jet {
        value: T::zero(),
        dx: T::zero(),
        dy: T::zero(),
        laplacian: T::zero(),
    };
    for (a, b) in frequencies(geom, nm) {
        let (sy, cy) = (a * big_y).sin_cos();
        let (sx, cx) = (b * big_x).sin_cos();
        let (c, dc) = match nm.parity {
            Parity::Symmetric => (cx, -sx),
            Parity::Antisymmetric => (sx, cx),
        };
        let term = cy * c;
        jet.value = jet.value + term;
        jet.dx = jet.dx + cy * dc * b;
        // d/dy cos(a(3r − y)) = a sin(a(3r − y))
        jet.dy = jet.dy + a * sy * c;
        jet.laplacian = jet.laplacian - (a * a + b * b) * term;
    }
    Ok(jet)
}

/// `T^{s/a}_{m,n}(x, y)`.
pub fn eval_neumann<T: Scalar>(
    geom: &TriangleGeometry<T>,
    nm: &NeumannMode,
    x: T,
    y: T,
) -> Result<T, DomainError> {
    Ok(neumann_jet(geom, nm, x, y)?.value)
}

/// `‖T‖²`: `27√3 r²` for `(0,0)`, `9√3 r²/2` for `m = n > 0` and for
/// `0 = m < n`, `9√3 r²/4` for `0 < m < n`.
///
/// With `m = 0` two of the three plane-wave pairs coincide, which doubles
/// the norm just as `m = n` does.
pub fn expected_norm_squared(geom: &TriangleGeometry<f64>, nm: &NeumannMode) -> f64 {
    let base = 9.0 * 3f64.sqrt() * geom.r * geom.r;
    if nm.mode.n() == 0 {
        3.0 * base
    } else if nm.mode.m() == nm.mode.n() || nm.mode.m() == 0 {
        base / 2.0
    } else {
        base / 4.0
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Product rule on the triangle: the triangle is cut into `subdivisions²`
/// congruent pieces and each carries a collapsed Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct TriangleQuadrature {
    /// `(x, y, weight)`.
    pub points: Vec<(f64, f64, f64)>,
}

impl TriangleQuadrature {
    pub fn new(geom: &TriangleGeometry<f64>, order: usize, subdivisions: usize) -> Self {
        let gl: Vec<(f64, f64)> = gauss_legendre(order)
            .into_iter()
            .map(|(x, w)| ((x + 1.0) / 2.0, w / 2.0))
            .collect();
        // reference rule on (0,0), (1,0), (0,1)
        let mut reference = Vec::with_capacity(order * order);
        for &(u, wu) in &gl {
            for &(v, wv) in &gl {
                reference.push((u, v * (1.0 - u), wu * wv * (1.0 - u)));
            }
        }
        let a = (0.0, 0.0);
        let e1 = (geom.h, 0.0);
        let e2 = (geom.h / 2.0, 3.0 * geom.r);
        let s = subdivisions as f64;
        let map = |u: f64, v: f64| (a.0 + u * e1.0 + v * e2.0, a.1 + u * e1.1 + v * e2.1);
        let jac = (e1.0 * e2.1 - e1.1 * e2.0).abs() / (s * s);
        let mut points = Vec::new();
        for i in 0..subdivisions {
            for j in 0..subdivisions - i {
                let (i, j) = (i as f64, j as f64);
                // upward piece
                for &(u, v, w) in &reference {
                    let (x, y) = map((i + u) / s, (j + v) / s);
                    points.push((x, y, w * jac));
                }
                // downward piece, present when i + j + 1 < subdivisions
                if i + j + 2.0 <= s {
                    for &(u, v, w) in &reference {
                        let (x, y) = map((i + 1.0 - u) / s, (j + 1.0 - v) / s);
                        points.push((x, y, w * jac));
                    }
                }
            }
        }
        TriangleQuadrature { points }
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points.iter().map(|&(x, y, w)| w * f(x, y)).sum()
    }
}

/// Default quadrature: order 20 on 4 × 4 subdivisions.
pub fn default_quadrature(geom: &TriangleGeometry<f64>) -> TriangleQuadrature {
    TriangleQuadrature::new(geom, 20, 4)
}

/// `∫ T_a T_b` over the triangle.
pub fn inner_product(
    geom: &TriangleGeometry<f64>,
    a: &NeumannMode,
    b: &NeumannMode,
    quad: &TriangleQuadrature,
) -> f64 {
    quad.integrate(|x, y| {
        eval_neumann(geom, a, x, y).expect("quadrature node inside")
            * eval_neumann(geom, b, x, y).expect("quadrature node inside")
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeCheck {
    pub mode: NeumannMode,
    pub eigenvalue: f64,
    /// `max |ΔT + Λ(0) T|` over interior grid points.
    pub helmholtz_residual: f64,
    /// `max |∂T/∂ν|` over boundary samples (vertices excluded).
    pub boundary_residual: f64,
    pub l2_norm: f64,
    pub expected_norm_squared: f64,
}

impl ModeCheck {
    pub fn norm_rel_error(&self) -> f64 {
        (self.l2_norm * self.l2_norm / self.expected_norm_squared - 1.0).abs()
    }
}

/// Interior lattice points `(i A + j B + k C)/grid_n` with `i, j, k >= 1`.
pub fn interior_grid(geom: &TriangleGeometry<f64>, grid_n: usize) -> Vec<(f64, f64)> {
    let s = grid_n as f64;
    let mut pts = Vec::new();
    for j in 1..grid_n {
        for k in 1..grid_n - j {
            let (u, v) = (j as f64 / s, k as f64 / s);
            pts.push((u * geom.h + v * geom.h / 2.0, v * 3.0 * geom.r));
        }
    }
    pts
}

/// Helmholtz and Neumann residuals on a grid plus the quadrature norm.
pub fn check_mode(
    geom: &TriangleGeometry<f64>,
    nm: &NeumannMode,
    grid_n: usize,
) -> Result<ModeCheck, DomainError> {
    if grid_n < 16 {
        return Err(DomainError::Invalid(format!(
            "grid_n must be >= 16, got {grid_n}"
        )));
    }
    let lambda = geom.neumann_eigenvalue(nm.mode.r_squared());
    let mut helmholtz: f64 = 0.0;
    for (x, y) in interior_grid(geom, grid_n) {
        let j = neumann_jet(geom, nm, x, y)?;
        helmholtz = helmholtz.max((j.laplacian + lambda * j.value).abs());
    }

    let half = 3f64.sqrt() / 2.0;
    let edges = [
        ((0.0, 0.0), (geom.h, 0.0), (0.0, -1.0)),
        ((0.0, 0.0), (geom.h / 2.0, 3.0 * geom.r), (-half, 0.5)),
        ((geom.h, 0.0), (geom.h / 2.0, 3.0 * geom.r), (half, 0.5)),
    ];
    let mut boundary: f64 = 0.0;
    for (p, q, normal) in edges {
        for i in 1..grid_n {
            let t = i as f64 / grid_n as f64;
            let (x, y) = (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1));
            let j = neumann_jet(geom, nm, x, y)?;
            boundary = boundary.max((j.dx * normal.0 + j.dy * normal.1).abs());
        }
    }

    let quad = default_quadrature(geom);
    let norm2 = inner_product(geom, nm, nm, &quad);
    Ok(ModeCheck {
        mode: *nm,
        eigenvalue: lambda,
        helmholtz_residual: helmholtz,
        boundary_residual: boundary,
        l2_norm: norm2.sqrt(),
        expected_norm_squared: expected_norm_squared(geom, nm),
    })
}

/// `(x, y, T(x, y))` on the closed lattice with `grid_n` steps per side.
pub fn grid_samples(
    geom: &TriangleGeometry<f64>,
    nm: &NeumannMode,
    grid_n: usize,
) -> Vec<(f64, f64, f64)> {
    let s = grid_n as f64;
    let mut out = Vec::new();
    for k in 0..=grid_n {
        for j in 0..=grid_n - k {
            let (u, v) = (j as f64 / s, k as f64 / s);
            let (x, y) = (u * geom.h + v * geom.h / 2.0, v * 3.0 * geom.r);
            let value = eval_neumann(geom, nm, x, y).expect("lattice point inside");
            out.push((x, y, value));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> TriangleGeometry<f64> {
        TriangleGeometry::new(1.0).unwrap()
    }

    fn nm(m: u32, n: u32, p: Parity) -> NeumannMode {
        NeumannMode::new(ModeIndex::new(m, n).unwrap(), p).unwrap()
    }

    #[test]
    fn constant_mode() {
        let g = unit();
        let v = eval_neumann(&g, &nm(0, 0, Parity::Symmetric), 0.3, 0.2).unwrap();
        assert!((v - 3.0).abs() < 1e-15);
    }

    #[test]
    fn antisymmetric_vanishes_on_axis() {
        let g = unit();
        let v = eval_neumann(&g, &nm(0, 1, Parity::Antisymmetric), 0.5, 0.4).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(NeumannMode::new(ModeIndex::new(2, 2).unwrap(), Parity::Antisymmetric).is_err());
    }

    #[test]
    fn outside_rejected() {
        let g = unit();
        let m = nm(1, 2, Parity::Symmetric);
        assert!(matches!(
            eval_neumann(&g, &m, 0.1, 0.5),
            Err(DomainError::OutsideDomain { .. })
        ));
        assert!(eval_neumann(&g, &m, 0.5, -0.01).is_err());
        assert!(eval_neumann(&g, &m, 0.5, 3.0 * g.r).is_ok());
    }

    #[test]
    fn gauss_legendre_exactness() {
        let rule = gauss_legendre(20);
        let sum: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((sum - 2.0).abs() < 1e-14);
        let x38: f64 = rule.iter().map(|(x, w)| w * x.powi(38)).sum();
        assert!((x38 - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_area() {
        let g = unit();
        let q = default_quadrature(&g);
        assert!((q.integrate(|_, _| 1.0) - g.area).abs() < 1e-14);
        // ∫ y over the triangle = area · centroid height
        assert!((q.integrate(|_, y| y) - g.area * g.r).abs() < 1e-14);
    }

    #[test]
    fn mode_12_checks() {
        let g = unit();
        let c = check_mode(&g, &nm(1, 2, Parity::Symmetric), 32).unwrap();
        assert!(c.helmholtz_residual <= 1e-8);
        assert!(c.boundary_residual <= 1e-8);
        assert!(c.norm_rel_error() <= 1e-6);
        let c = check_mode(&g, &nm(2, 2, Parity::Symmetric), 32).unwrap();
        assert!(c.norm_rel_error() <= 1e-6);
        let c = check_mode(&g, &nm(0, 0, Parity::Symmetric), 16).unwrap();
        assert!(c.norm_rel_error() <= 1e-12);
        for parity in [Parity::Symmetric, Parity::Antisymmetric] {
            let c = check_mode(&g, &nm(0, 3, parity), 16).unwrap();
            assert!(c.norm_rel_error() <= 1e-12);
        }
    }

    #[test]
    fn centroid_value_of_12() {
        let g = unit();
        let v = eval_neumann(&g, &nm(1, 2, Parity::Symmetric), 0.5, g.r).unwrap();
        // X = 0 and Y = 2r at the centroid
        let expect = (2.0 * std::f64::consts::PI * -3.0 / 3.0).cos()
            + (2.0 * std::f64::consts::PI / 3.0).cos()
            + (4.0 * std::f64::consts::PI / 3.0).cos();
        assert!((v - expect).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn helmholtz_pointwise(u in 0.0f64..1.0, v in 0.0f64..1.0, m in 0u32..6, extra in 0u32..6) {
            let g = unit();
            let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
            let (x, y) = (u * g.h + v * g.h / 2.0, v * 3.0 * g.r);
            let md = ModeIndex::new(m, m + extra).unwrap();
            let lambda = g.neumann_eigenvalue(md.r_squared());
            for p in [Parity::Symmetric, Parity::Antisymmetric] {
                if let Ok(nmode) = NeumannMode::new(md, p) {
                    let j = neumann_jet(&g, &nmode, x, y).unwrap();
                    prop_assert!((j.laplacian + lambda * j.value).abs() <= 1e-10 * lambda.max(1.0));
                }
            }
        }
    }
}
