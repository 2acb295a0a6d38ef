//! Robin–Neumann gaps, spacing distribution and largest gaps.

use serde::Serialize;

use crate::error::SpectrumError;
use crate::geometry::TriangleGeometry;
use crate::spectrum::{
    enumerate_spectrum_cached, max_r_squared, modes_up_to, SolveCache, SpectrumEntry,
};

/// Bin width (normalized units) for spacing histograms.
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.05;

/// `d_n(σ) = λ_n^σ − λ_n^0` for `n = 1..N`.
#[derive(Debug, Clone, Serialize)]
pub struct GapSeries {
    pub sigma: f64,
    /// `4σ/r`.
    pub dbar: f64,
    pub neumann: Vec<f64>,
    pub robin: Vec<f64>,
    pub d: Vec<f64>,
    /// `(1/N) Σ_{n<=N} d_n`.
    pub mean_prefix: Vec<f64>,
}

impl GapSeries {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of `d_n` outside `(0, d̄)`.
    pub fn bound_violations(&self) -> usize {
        self.d
            .iter()
            .filter(|&&d| !(d > 0.0 && d < self.dbar))
            .count()
    }

    /// `#{n <= N : d_n > d̄ − ε} / N`.
    pub fn fraction_near_mean(&self, n: usize, eps: f64) -> f64 {
        let n = n.min(self.d.len());
        if n == 0 {
            return 0.0;
        }
        let hits = self.d[..n].iter().filter(|&&d| d > self.dbar - eps).count();
        hits as f64 / n as f64
    }
}

/// Sorted weight-expanded Neumann values `pref · q` for `q <= q_max`.
pub fn neumann_values(geom: &TriangleGeometry<f64>, q_max: u64) -> Vec<f64> {
    let mut qs: Vec<u64> = Vec::new();
    for mode in modes_up_to(q_max) {
        for _ in 0..mode.weight() {
            qs.push(mode.r_squared());
        }
    }
    qs.sort_unstable();
    qs.into_iter().map(|q| geom.neumann_eigenvalue(q)).collect()
}

/// The first `count` weight-expanded Robin eigenvalues with mode labels.
///
/// The table is enumerated up to `λ_N^0 + 2·4σ/r` plus half a lattice step,
/// which makes it complete past `λ_N^0 + 4σ/r ≥ λ_N^σ`.
pub fn first_entries(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    count: usize,
    tol: f64,
    cache: Option<&SolveCache>,
) -> Result<Vec<SpectrumEntry>, SpectrumError> {
    let neumann = first_neumann(geom, count)?;
    first_entries_above(geom, sigma, count, neumann[count - 1], tol, cache)
}

fn first_neumann(geom: &TriangleGeometry<f64>, count: usize) -> Result<Vec<f64>, SpectrumError> {
    if count == 0 {
        return Err(SpectrumError::InvalidArgument("count must be >= 1".into()));
    }
    // weighted Neumann count with q <= K is about πK/(3√3)
    let mut q_max = (count as f64 * 3.0 * 3f64.sqrt() / std::f64::consts::PI * 1.05) as u64 + 16;
    loop {
        let mut v = neumann_values(geom, q_max);
        if v.len() >= count {
            v.truncate(count);
            return Ok(v);
        }
        q_max = q_max * 3 / 2 + 16;
    }
}

fn first_entries_above(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    count: usize,
    neumann_last: f64,
    tol: f64,
    cache: Option<&SolveCache>,
) -> Result<Vec<SpectrumEntry>, SpectrumError> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(SpectrumError::Solve(
            crate::error::SolveError::InvalidSigma(sigma),
        ));
    }
    let dbar = geom.mean_rn_gap(sigma);
    let cutoff = neumann_last + 2.0 * dbar + 0.5 * geom.eig_prefactor;
    let mut table = enumerate_spectrum_cached(geom, sigma, cutoff, tol, cache)?;
    if table.complete_len() < count {
        return Err(SpectrumError::InvalidArgument(format!(
            "spectrum up to {cutoff} is complete for only {} of {count} eigenvalues",
            table.complete_len()
        )));
    }
    table.entries.truncate(count);
    Ok(table.entries)
}

/// First `count` Neumann and Robin eigenvalues.
fn paired_spectra(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    count: usize,
    tol: f64,
    cache: Option<&SolveCache>,
) -> Result<(Vec<f64>, Vec<f64>), SpectrumError> {
    let neumann = first_neumann(geom, count)?;
    let entries = first_entries_above(geom, sigma, count, neumann[count - 1], tol, cache)?;
    Ok((neumann, entries.iter().map(|e| e.value).collect()))
}

/// RN gap series for the first `count` eigenvalues, pairing by rank.
pub fn rn_gaps(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    count: usize,
    tol: f64,
) -> Result<GapSeries, SpectrumError> {
    rn_gaps_cached(geom, sigma, count, tol, None)
}

pub fn rn_gaps_cached(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    count: usize,
    tol: f64,
    cache: Option<&SolveCache>,
) -> Result<GapSeries, SpectrumError> {
    let (neumann, robin) = paired_spectra(geom, sigma, count, tol, cache)?;
    let d: Vec<f64> = robin.iter().zip(&neumann).map(|(r, n)| r - n).collect();
    let mut mean_prefix = Vec::with_capacity(d.len());
    let mut acc = 0.0;
    for (i, v) in d.iter().enumerate() {
        acc += v;
        mean_prefix.push(acc / (i + 1) as f64);
    }
    Ok(GapSeries {
        sigma,
        dbar: geom.mean_rn_gap(sigma),
        neumann,
        robin,
        d,
        mean_prefix,
    })
}

/// `c = |T|/(4π)`: turns consecutive gaps into unit-mean spacings.
pub fn spacing_normalization(geom: &TriangleGeometry<f64>) -> f64 {
    geom.area / (4.0 * std::f64::consts::PI)
}

/// Empirical distribution of normalized nearest-neighbour spacings.
#[derive(Debug, Clone, Serialize)]
pub struct SpacingCDF {
    pub sigma: f64,
    pub normalization_c: f64,
    pub n: usize,
    /// `(t, P̃(t, N))`.
    pub samples: Vec<(f64, f64)>,
    /// Mean of the `N` normalized spacings.
    pub mean_spacing: f64,
}

/// `x(n) = c (λ_{n+1} − λ_n)` for `n = 1..N`; needs `N + 1` sorted values.
pub fn normalized_spacings(values: &[f64], c: f64, n: usize) -> Vec<f64> {
    values
        .windows(2)
        .take(n)
        .map(|w| c * (w[1] - w[0]))
        .collect()
}

/// `P̃(t) = #{n <= N : x(n) < t} / N` for each `t`.
pub fn cdf_from_spacings(spacings: &[f64], t_grid: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = spacings.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = spacings.len().max(1) as f64;
    t_grid
        .iter()
        .map(|&t| (t, sorted.partition_point(|&x| x < t) as f64 / n))
        .collect()
}

fn validate_grid(n: usize, t_grid: &[f64]) -> Result<(), SpectrumError> {
    if n < 2 {
        return Err(SpectrumError::InvalidArgument("N must be >= 2".into()));
    }
    if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite())
        || t_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(SpectrumError::InvalidArgument(
            "t grid must be positive and strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Spacing CDF over the first `N` normalized gaps of the `σ` spectrum.
pub fn spacing_cdf(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    n: usize,
    t_grid: &[f64],
    tol: f64,
) -> Result<SpacingCDF, SpectrumError> {
    spacing_cdf_cached(geom, sigma, n, t_grid, tol, None)
}

pub fn spacing_cdf_cached(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    n: usize,
    t_grid: &[f64],
    tol: f64,
    cache: Option<&SolveCache>,
) -> Result<SpacingCDF, SpectrumError> {
    validate_grid(n, t_grid)?;
    let (_, robin) = paired_spectra(geom, sigma, n + 1, tol, cache)?;
    Ok(spacing_cdf_from_values(geom, sigma, &robin, n, t_grid))
}

/// [`spacing_cdf`] on an already sorted spectrum with at least `N + 1` values.
pub fn spacing_cdf_from_values(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    values: &[f64],
    n: usize,
    t_grid: &[f64],
) -> SpacingCDF {
    let c = spacing_normalization(geom);
    let x = normalized_spacings(values, c, n);
    let mean_spacing = x.iter().sum::<f64>() / x.len().max(1) as f64;
    SpacingCDF {
        sigma,
        normalization_c: c,
        n: x.len(),
        samples: cdf_from_spacings(&x, t_grid),
        mean_spacing,
    }
}

/// Counts per bin `[k w, (k+1) w)`; the last bin is the first one holding the maximum.
pub fn spacing_histogram(spacings: &[f64], bin_width: f64) -> Vec<(f64, usize)> {
    let max = spacings.iter().cloned().fold(0.0, f64::max);
    let bins = (max / bin_width).floor() as usize + 1;
    let mut counts = vec![0usize; bins];
    for &x in spacings {
        let k = ((x / bin_width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (k as f64 * bin_width, c))
        .collect()
}

/// Indices where both `d_n` and `d_{n+1}` are within `ε` of `d̄`, with the
/// largest `|x_σ(n) − x_0(n)|` among them; it is bounded by `2cε`.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftIdentityCheck {
    pub eps: f64,
    pub indices_checked: usize,
    pub max_deviation: f64,
    pub bound: f64,
    /// Largest `| (x_σ(n) − x_0(n)) − c (d_{n+1} − d_n) |`.
    pub identity_residual: f64,
}

/// Arithmetic check of `x_σ(n) − x_0(n) = c (d_{n+1} − d_n)`.
pub fn check_spacing_shift(
    geom: &TriangleGeometry<f64>,
    gaps: &GapSeries,
    eps: f64,
) -> ShiftIdentityCheck {
    let c = spacing_normalization(geom);
    let near = |d: f64| (d - gaps.dbar).abs() <= eps;
    let mut out = ShiftIdentityCheck {
        eps,
        indices_checked: 0,
        max_deviation: 0.0,
        bound: 2.0 * c * eps,
        identity_residual: 0.0,
    };
    for n in 0..gaps.d.len().saturating_sub(1) {
        if !(near(gaps.d[n]) && near(gaps.d[n + 1])) {
            continue;
        }
        let xs = c * (gaps.robin[n + 1] - gaps.robin[n]);
        let x0 = c * (gaps.neumann[n + 1] - gaps.neumann[n]);
        let dev = xs - x0;
        out.indices_checked += 1;
        out.max_deviation = out.max_deviation.max(dev.abs());
        let resid = (dev - c * (gaps.d[n + 1] - gaps.d[n])).abs();
        out.identity_residual = out.identity_residual.max(resid);
    }
    out
}

/// Largest consecutive gap among eigenvalues `<= x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxGap {
    pub gap: f64,
    pub lower: f64,
    pub upper: f64,
    /// 1-based rank of `lower`.
    pub index: usize,
}

/// Scans the ordered spectrum below `energy_x` for its largest gap.
pub fn max_gap_scan(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    energy_x: f64,
    tol: f64,
) -> Result<MaxGap, SpectrumError> {
    max_gap_scan_cached(geom, sigma, energy_x, tol, None)
}

pub fn max_gap_scan_cached(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    energy_x: f64,
    tol: f64,
    cache: Option<&SolveCache>,
) -> Result<MaxGap, SpectrumError> {
    if !energy_x.is_finite() || energy_x <= 0.0 {
        return Err(SpectrumError::CutoffTooSmall(energy_x));
    }
    let cutoff = energy_x + geom.mean_rn_gap(sigma);
    let table = enumerate_spectrum_cached(geom, sigma, cutoff, tol, cache)?;
    let values: Vec<f64> = table
        .entries
        .iter()
        .map(|e| e.value)
        .take_while(|&v| v <= energy_x)
        .collect();
    if values.len() < 10 {
        return Err(SpectrumError::CutoffTooSmall(energy_x));
    }
    let mut best = MaxGap {
        gap: f64::NEG_INFINITY,
        lower: 0.0,
        upper: 0.0,
        index: 0,
    };
    for (i, w) in values.windows(2).enumerate() {
        let g = w[1] - w[0];
        if g > best.gap {
            best = MaxGap {
                gap: g,
                lower: w[0],
                upper: w[1],
                index: i + 1,
            };
        }
    }
    Ok(best)
}

/// Number of representable `q <= K` (weight-expanded) against the Weyl estimate.
pub fn weyl_ratio(geom: &TriangleGeometry<f64>, energy_x: f64) -> f64 {
    let count: usize = modes_up_to(max_r_squared(geom, energy_x))
        .iter()
        .map(|m| m.weight() as usize)
        .sum();
    count as f64 / (spacing_normalization(geom) * energy_x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secular::DEFAULT_TOL;

    fn unit() -> TriangleGeometry<f64> {
        TriangleGeometry::new(1.0).unwrap()
    }

    #[test]
    fn neumann_list_starts_right() {
        let g = unit();
        let v = neumann_values(&g, 7);
        let q: Vec<f64> = v.iter().map(|x| (x / g.eig_prefactor).round()).collect();
        assert_eq!(q, vec![0.0, 1.0, 1.0, 3.0, 4.0, 4.0, 7.0, 7.0]);
    }

    #[test]
    fn first_gaps_bounded() {
        let g = unit();
        let s = rn_gaps(&g, 1.0, 500, DEFAULT_TOL).unwrap();
        assert_eq!(s.len(), 500);
        assert_eq!(s.bound_violations(), 0);
        assert!(s.mean_prefix.iter().all(|&m| m > 0.0 && m <= s.dbar));
    }

    #[test]
    fn ground_state_slope() {
        let g = unit();
        let sigma = 1e-4;
        let s = rn_gaps(&g, sigma, 3, DEFAULT_TOL).unwrap();
        let lead = 2.0 * sigma / g.r;
        assert!((s.d[0] - lead).abs() < 1e-3 * lead);
    }

    #[test]
    fn neumann_half_zero_spacings() {
        let g = unit();
        let cdf = spacing_cdf(&g, 0.0, 10_000, &[0.5], DEFAULT_TOL).unwrap();
        assert!(cdf.samples[0].1 >= 0.5);
        assert_eq!(cdf.n, 10_000);
    }

    #[test]
    fn cdf_strict_inequality() {
        let c = cdf_from_spacings(&[0.0, 0.1, 0.1, 0.3], &[0.1, 0.2, 1.0]);
        assert_eq!(c, vec![(0.1, 0.25), (0.2, 0.75), (1.0, 1.0)]);
    }

    #[test]
    fn rejects_bad_grid() {
        let g = unit();
        assert!(spacing_cdf(&g, 1.0, 100, &[0.2, 0.1], DEFAULT_TOL).is_err());
        assert!(spacing_cdf(&g, 1.0, 1, &[0.2], DEFAULT_TOL).is_err());
    }

    #[test]
    fn histogram_bins() {
        let h = spacing_histogram(&[0.0, 0.01, 0.05, 0.12], HISTOGRAM_BIN_WIDTH);
        assert_eq!(h.len(), 3);
        assert_eq!(h.iter().map(|b| b.1).collect::<Vec<_>>(), vec![2, 1, 1]);
    }

    #[test]
    fn max_gap_neumann_small() {
        let g = unit();
        let mg = max_gap_scan(&g, 0.0, 100.0 * g.eig_prefactor, DEFAULT_TOL).unwrap();
        // representable integers around the largest run below 100
        let lo = (mg.lower / g.eig_prefactor).round() as u64;
        let hi = (mg.upper / g.eig_prefactor).round() as u64;
        assert!(hi - lo >= 3);
    }

    #[test]
    fn shift_identity() {
        let g = unit();
        let s = rn_gaps(&g, 1.0, 2000, DEFAULT_TOL).unwrap();
        let chk = check_spacing_shift(&g, &s, 0.05 * s.dbar);
        assert!(chk.indices_checked > 0);
        assert!(chk.max_deviation <= chk.bound);
        assert!(chk.identity_residual < 1e-9);
    }
}
