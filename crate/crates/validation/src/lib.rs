//! Independent reference solver: Gauss–Seidel sweeps, each equation solved
//! for its own angle by plain bisection. Shares no code with `robin-tri`.

use std::f64::consts::{FRAC_PI_2, PI};

pub fn inradius(h: f64) -> f64 {
    h / (2.0 * 3f64.sqrt())
}

/// Residuals of the three equations at `[L, M, N]`, each normalized by `1 + c`.
pub fn residuals(h: f64, m: u32, n: u32, sigma: f64, a: [f64; 3]) -> [f64; 3] {
    let c = 3.0 * inradius(h) * sigma;
    let (m, n) = (m as f64, n as f64);
    let [l, mm, nn] = a;
    [
        ((2.0 * l - mm - nn - (m + n) * PI) * l.tan() - c) / (1.0 + c),
        ((2.0 * mm - nn - l + m * PI) * mm.tan() - c) / (1.0 + c),
        ((2.0 * nn - l - mm + n * PI) * nn.tan() - c) / (1.0 + c),
    ]
}

/// Root of an increasing `f` on `(lo, hi)` with `f(lo) < 0 < f(hi)`.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// `[L, M, N]` for mode `(m, n)`, `m <= n`, `sigma > 0`.
pub fn oracle_solve(h: f64, m: u32, n: u32, sigma: f64) -> [f64; 3] {
    assert!(m <= n && sigma > 0.0);
    let c = 3.0 * inradius(h) * sigma;
    let (mf, nf) = (m as f64, n as f64);
    let top = FRAC_PI_2 * (1.0 - 1e-15);
    let mut a = [0.0f64; 3];
    for _sweep in 0..200_000 {
        let old = a;
        // (2L − M − N − (m+n)π) tan L is decreasing in L on (−π/2, 0]
        let (mm, nn) = (a[1], a[2]);
        a[0] = bisect(-top, 0.0, |l| {
            c - (2.0 * l - mm - nn - (mf + nf) * PI) * l.tan()
        });
        let (l, nn) = (a[0], a[2]);
        a[1] = bisect(0.0, top, |x| (2.0 * x - nn - l + mf * PI) * x.tan() - c);
        let (l, mm) = (a[0], a[1]);
        a[2] = bisect(0.0, top, |x| (2.0 * x - l - mm + nf * PI) * x.tan() - c);
        let change = (0..3).map(|i| (a[i] - old[i]).abs()).fold(0.0, f64::max);
        if change <= 1e-15 {
            return a;
        }
    }
    panic!("oracle did not settle for ({m}, {n}) at sigma = {sigma}");
}

/// `Λ = 4π²/(27 r²) (μ² + μν + ν²)` from the angles.
pub fn oracle_eigenvalue(h: f64, m: u32, n: u32, a: [f64; 3]) -> f64 {
    let r = inradius(h);
    let [l, mm, nn] = a;
    let mu = m as f64 + (2.0 * mm - nn - l) / PI;
    let nu = n as f64 + (2.0 * nn - l - mm) / PI;
    4.0 * PI * PI / (27.0 * r * r) * (mu * mu + mu * nu + nu * nu)
}
