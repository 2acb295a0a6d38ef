//! Equilateral triangle parameters.
//!
//! The inradius `r` is the canonical length: every formula downstream is
//! written in terms of it.

use serde::Serialize;

use crate::error::DomainError;
use crate::scalar::Scalar;

/// Side length, inradius, area and the eigenvalue prefactor `4π²/(27r²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleGeometry<T> {
    pub h: T,
    pub r: T,
    pub area: T,
    pub eig_prefactor: T,
}

impl<T: Scalar> TriangleGeometry<T> {
    /// Triangle of side length `h`.
    pub fn new(h: T) -> Result<Self, DomainError> {
        if !h.is_finite() || h <= T::zero() {
            return Err(DomainError::Invalid(format!(
                "side length must be finite and positive, got {h}"
            )));
        }
        let three = T::lit(3.0);
        let sqrt3 = three.sqrt();
        let r = h / (T::lit(2.0) * sqrt3);
        let area = three * sqrt3 * r * r;
        let pi = T::PI();
        let eig_prefactor = T::lit(4.0) * pi * pi / (T::lit(27.0) * r * r);
        Ok(TriangleGeometry {
            h,
            r,
            area,
            eig_prefactor,
        })
    }

    /// Triangle with unit inradius (`h = 2√3`).
    pub fn unit_inradius() -> Self {
        Self::new(T::lit(2.0) * T::lit(3.0).sqrt()).expect("positive side")
    }

    /// Height of the triangle, `3r`.
    pub fn height(&self) -> T {
        T::lit(3.0) * self.r
    }

    /// Perimeter `3h`.
    pub fn perimeter(&self) -> T {
        T::lit(3.0) * self.h
    }

    /// Limiting mean Robin–Neumann gap `2|∂T|/|T| · σ = 4σ/r`.
    pub fn mean_rn_gap(&self, sigma: T) -> T {
        T::lit(4.0) * sigma / self.r
    }

    /// Robin parameter below which distinct Neumann clusters cannot mix: `π²/(27r)`.
    pub fn cluster_separation_threshold(&self) -> T {
        let pi = T::PI();
        pi * pi / (T::lit(27.0) * self.r)
    }

    /// Neumann eigenvalue for `m² + mn + n² = q`.
    pub fn neumann_eigenvalue(&self, q: u64) -> T {
        self.eig_prefactor * T::from_u64(q).expect("representable")
    }
}

/// `make_geometry` in the f64 default precision.
pub fn make_geometry(h: f64) -> Result<TriangleGeometry<f64>, DomainError> {
    TriangleGeometry::new(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_side() {
        let g = make_geometry(1.0).unwrap();
        assert_relative_eq!(g.r, 1.0 / (2.0 * 3f64.sqrt()), max_relative = 1e-14);
        assert_relative_eq!(g.r, 0.288675134594813, max_relative = 1e-14);
        assert_relative_eq!(g.area, 3f64.sqrt() / 4.0, max_relative = 1e-14);
        let pi = std::f64::consts::PI;
        assert_relative_eq!(g.eig_prefactor, 16.0 * pi * pi / 9.0, max_relative = 1e-14);
        assert!((g.eig_prefactor - 17.5460).abs() < 1e-4);
    }

    #[test]
    fn unit_inradius_case() {
        let g = make_geometry(2.0 * 3f64.sqrt()).unwrap();
        assert_relative_eq!(g.r, 1.0, max_relative = 1e-14);
        assert_relative_eq!(g.area, 3.0 * 3f64.sqrt(), max_relative = 1e-14);
        assert_eq!(g, TriangleGeometry::<f64>::unit_inradius());
    }

    #[test]
    fn mean_gap_at_unit_side() {
        let g = make_geometry(1.0).unwrap();
        assert_relative_eq!(g.mean_rn_gap(1.0), 8.0 * 3f64.sqrt(), max_relative = 1e-14);
        // perimeter / area doubled
        assert_relative_eq!(
            g.mean_rn_gap(1.0),
            2.0 * g.perimeter() / g.area,
            max_relative = 1e-14
        );
    }

    #[test]
    fn rejects_bad_sides() {
        assert!(make_geometry(0.0).is_err());
        assert!(make_geometry(-1.0).is_err());
        assert!(make_geometry(f64::NAN).is_err());
        assert!(make_geometry(f64::INFINITY).is_err());
    }

    #[test]
    fn single_precision() {
        let g = TriangleGeometry::<f32>::new(1.0).unwrap();
        assert!((g.eig_prefactor - 17.546_f32).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn scaling(h in 1e-3f64..1e3, k in 1e-2f64..1e2) {
            let a = make_geometry(h).unwrap();
            let b = make_geometry(k * h).unwrap();
            prop_assert!(((b.r / a.r) / k - 1.0).abs() < 1e-12);
            prop_assert!(((b.area.sqrt() / a.area.sqrt()) / k - 1.0).abs() < 1e-12);
            prop_assert!(((b.eig_prefactor * k * k) / a.eig_prefactor - 1.0).abs() < 1e-12);
        }
    }
}
