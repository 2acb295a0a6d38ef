//! Ordered Robin spectra, Neumann clusters and simplicity checks.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{SolveError, SpectrumError};
use crate::geometry::TriangleGeometry;
use crate::scalar::Scalar;
use crate::secular::{solve_secular, ModeIndex, SecularSolution};

pub mod cache;

pub use cache::{default_cache_dir, SolveCache};

/// One desymmetrized eigenvalue `Λ_{m,n}(σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenvalueRecord<T> {
    pub mode: ModeIndex,
    pub sigma: T,
    pub value: T,
    pub neumann_value: T,
    /// `value − neumann_value`, computed without cancellation.
    pub shift: T,
    pub weight: u8,
}

impl<T: Scalar> EigenvalueRecord<T> {
    fn from_solution(geom: &TriangleGeometry<T>, sol: &SecularSolution<T>) -> Self {
        let neumann_value = geom.neumann_eigenvalue(sol.mode.r_squared());
        let value = if sol.sigma == T::zero() {
            neumann_value
        } else {
            sol.eigenvalue(geom)
        };
        EigenvalueRecord {
            mode: sol.mode,
            sigma: sol.sigma,
            value,
            neumann_value,
            shift: sol.shift(geom),
            weight: sol.mode.weight(),
        }
    }
}

/// Solves the secular system and evaluates `Λ_{m,n}(σ)`.
pub fn eigenvalue<T: Scalar>(
    geom: &TriangleGeometry<T>,
    mode: ModeIndex,
    sigma: T,
    tol: T,
) -> Result<EigenvalueRecord<T>, SolveError> {
    let sol = solve_secular(geom, mode, sigma, tol)?;
    Ok(EigenvalueRecord::from_solution(geom, &sol))
}

/// Weight-expanded spectrum entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub value: f64,
    pub shift: f64,
    pub mode: ModeIndex,
    /// 0 for the symmetric eigenfunction, 1 for the antisymmetric one.
    pub copy: u8,
}

/// Ordered Robin spectrum up to an energy cutoff.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTable {
    pub sigma: f64,
    pub cutoff: f64,
    /// Every eigenvalue below this bound is present.
    pub complete_below: f64,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// Number of leading entries guaranteed to coincide with the true ordered spectrum.
    pub fn complete_len(&self) -> usize {
        self.entries
            .partition_point(|e| e.value < self.complete_below)
    }
}

/// Largest `q = m² + mn + n²` whose Neumann value does not exceed `cutoff`.
pub fn max_r_squared(geom: &TriangleGeometry<f64>, cutoff: f64) -> u64 {
    if cutoff < 0.0 {
        return 0;
    }
    // the small slack keeps `cutoff = k · prefactor` inclusive
    (cutoff / geom.eig_prefactor * (1.0 + 1e-12)).floor() as u64
}

/// All desymmetrized modes with `m² + mn + n² <= q_max`, ordered by `(m, n)`.
pub fn modes_up_to(q_max: u64) -> Vec<ModeIndex> {
    let mut out = Vec::new();
    let mut m: u64 = 0;
    while 3 * m * m <= q_max {
        let mut n = m;
        while m * m + m * n + n * n <= q_max {
            out.push(ModeIndex::sorted(m as u32, n as u32));
            n += 1;
        }
        m += 1;
    }
    out
}

fn total_order(a: &SpectrumEntry, b: &SpectrumEntry) -> std::cmp::Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.mode.cmp(&b.mode))
        .then(a.copy.cmp(&b.copy))
}

fn solve_modes(
    geom: &TriangleGeometry<f64>,
    modes: &[ModeIndex],
    sigma: f64,
    tol: f64,
    cache: Option<&SolveCache>,
) -> Result<Vec<EigenvalueRecord<f64>>, SolveError> {
    let solved: Vec<Result<(EigenvalueRecord<f64>, Option<SecularSolution<f64>>), SolveError>> =
        modes
            .par_iter()
            .map(|&mode| {
                if let Some(angles) = cache.and_then(|c| c.get(geom.h, sigma, mode, tol)) {
                    let sol = SecularSolution::from_cached(mode, sigma, angles);
                    return Ok((EigenvalueRecord::from_solution(geom, &sol), None));
                }
                let sol = solve_secular(geom, mode, sigma, tol)?;
                Ok((EigenvalueRecord::from_solution(geom, &sol), Some(sol)))
            })
            .collect();
    let mut records = Vec::with_capacity(solved.len());
    let mut fresh = Vec::new();
    for item in solved {
        let (rec, new) = item?;
        records.push(rec);
        if let Some(sol) = new {
            fresh.push(sol);
        }
    }
    if let Some(c) = cache {
        if !fresh.is_empty() {
            // a failed cache write must not fail the computation
            let _ = c.insert_batch(geom, tol, &fresh);
        }
    }
    Ok(records)
}

/// All weight-expanded eigenvalues whose Neumann value is `<= energy_cutoff`, sorted.
///
/// Since every shift lies in `(0, 4σ/r)`, eigenvalues below
/// `cutoff − 4σ/r` cannot come from any omitted mode.
pub fn enumerate_spectrum(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    energy_cutoff: f64,
    tol: f64,
) -> Result<SpectrumTable, SpectrumError> {
    enumerate_spectrum_cached(geom, sigma, energy_cutoff, tol, None)
}

/// [`enumerate_spectrum`] reading and extending an on-disk solve cache.
pub fn enumerate_spectrum_cached(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    energy_cutoff: f64,
    tol: f64,
    cache: Option<&SolveCache>,
) -> Result<SpectrumTable, SpectrumError> {
    if !energy_cutoff.is_finite() || energy_cutoff <= 0.0 {
        return Err(SpectrumError::CutoffTooSmall(energy_cutoff));
    }
    let modes = modes_up_to(max_r_squared(geom, energy_cutoff));
    if modes.is_empty() {
        return Err(SpectrumError::CutoffTooSmall(energy_cutoff));
    }
    let records = solve_modes(geom, &modes, sigma, tol, cache)?;
    let mut entries = Vec::with_capacity(records.len() * 2);
    for rec in &records {
        for copy in 0..rec.weight {
            entries.push(SpectrumEntry {
                value: rec.value,
                shift: rec.shift,
                mode: rec.mode,
                copy,
            });
        }
    }
    entries.par_sort_by(total_order);
    Ok(SpectrumTable {
        sigma,
        cutoff: energy_cutoff,
        complete_below: energy_cutoff - geom.mean_rn_gap(sigma),
        entries,
    })
}

/// Neumann modes sharing `R² = m² + mn + n²`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub r_squared: u64,
    pub modes: Vec<ModeIndex>,
}

/// One cluster per representable `R² <= r2_max`, ascending.
pub fn clusters_up_to(r2_max: u64) -> Vec<Cluster> {
    let mut map: BTreeMap<u64, Vec<ModeIndex>> = BTreeMap::new();
    for mode in modes_up_to(r2_max) {
        map.entry(mode.r_squared()).or_default().push(mode);
    }
    map.into_iter()
        .map(|(r_squared, mut modes)| {
            modes.sort();
            Cluster { r_squared, modes }
        })
        .collect()
}

/// Ordering of one cluster at the tested `σ`.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterOrdering {
    pub r_squared: u64,
    /// Modes sorted by increasing `Λ(σ)`.
    pub modes_by_value: Vec<ModeIndex>,
    pub min_separation: f64,
    /// Whether increasing `Λ` coincides with increasing `m`, i.e. decreasing `F_R`.
    pub follows_fr_order: bool,
}

/// Outcome of a simplicity scan.
#[derive(Debug, Clone, Serialize)]
pub struct SimplicityReport {
    pub sigma: f64,
    pub r2_max: u64,
    pub modes_checked: usize,
    /// Two eigenvalues count as equal when their shifts differ by at most this.
    pub resolution: f64,
    /// Smallest separation between distinct modes in the same cluster.
    pub min_within_cluster: f64,
    /// Smallest `min(cluster R'²) − max(cluster R²)` over consecutive clusters.
    pub min_between_clusters: f64,
    pub violating_pairs: Vec<(ModeIndex, ModeIndex, f64)>,
    pub inter_cluster_crossings: Vec<(u64, u64)>,
    pub orderings: Vec<ClusterOrdering>,
    /// Pairs `m < m'` (both `>= 1`) in a cluster with `Λ_{m,n} < Λ_{m',n'}`.
    pub pairs_smaller_m_lower: usize,
    /// Pairs `m < m'` (both `>= 1`) in a cluster with `Λ_{m,n} > Λ_{m',n'}`.
    pub pairs_smaller_m_higher: usize,
}

impl SimplicityReport {
    pub fn min_separation(&self) -> f64 {
        self.min_within_cluster.min(self.min_between_clusters)
    }

    pub fn is_simple(&self) -> bool {
        self.violating_pairs.is_empty() && self.inter_cluster_crossings.is_empty()
    }
}

/// Checks that all desymmetrized eigenvalues with `R² <= r2_max` are distinct.
///
/// Members of one cluster share the Neumann value, so they are compared
/// through their shifts, which carry full relative precision.
pub fn check_simplicity(
    geom: &TriangleGeometry<f64>,
    sigma: f64,
    r2_max: u64,
    tol: f64,
) -> Result<SimplicityReport, SpectrumError> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(SpectrumError::InvalidArgument(format!(
            "simplicity check needs sigma > 0, got {sigma}"
        )));
    }
    if r2_max == 0 {
        return Err(SpectrumError::InvalidArgument("r2max must be >= 1".into()));
    }
    let clusters = clusters_up_to(r2_max);
    let modes: Vec<ModeIndex> = clusters.iter().flat_map(|c| c.modes.clone()).collect();
    let records = solve_modes(geom, &modes, sigma, tol, None)?;
    let resolution = tol * geom.mean_rn_gap(sigma);

    let mut report = SimplicityReport {
        sigma,
        r2_max,
        modes_checked: modes.len(),
        resolution,
        min_within_cluster: f64::INFINITY,
        min_between_clusters: f64::INFINITY,
        violating_pairs: Vec::new(),
        inter_cluster_crossings: Vec::new(),
        orderings: Vec::new(),
        pairs_smaller_m_lower: 0,
        pairs_smaller_m_higher: 0,
    };

    let mut offset = 0;
    let mut prev: Option<(u64, f64)> = None;
    for cluster in &clusters {
        let recs = &records[offset..offset + cluster.modes.len()];
        offset += cluster.modes.len();

        let lo = recs.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
        let hi = recs
            .iter()
            .map(|r| r.value)
            .fold(f64::NEG_INFINITY, f64::max);
        if let Some((prev_r2, prev_hi)) = prev {
            let gap = lo - prev_hi;
            report.min_between_clusters = report.min_between_clusters.min(gap);
            if gap <= 0.0 {
                report
                    .inter_cluster_crossings
                    .push((prev_r2, cluster.r_squared));
            }
        }
        prev = Some((cluster.r_squared, hi));

        if recs.len() < 2 {
            continue;
        }
        for (i, a) in recs.iter().enumerate() {
            for b in &recs[i + 1..] {
                if a.mode.m() >= 1 && b.mode.m() >= 1 {
                    // recs are sorted by m ascending, so a.m < b.m
                    if a.shift < b.shift {
                        report.pairs_smaller_m_lower += 1;
                    } else if a.shift > b.shift {
                        report.pairs_smaller_m_higher += 1;
                    }
                }
            }
        }
        let mut by_value: Vec<&EigenvalueRecord<f64>> = recs.iter().collect();
        by_value.sort_by(|a, b| a.shift.total_cmp(&b.shift).then(a.mode.cmp(&b.mode)));
        let mut min_sep = f64::INFINITY;
        for w in by_value.windows(2) {
            let sep = w[1].shift - w[0].shift;
            min_sep = min_sep.min(sep);
            if sep <= resolution {
                report.violating_pairs.push((w[0].mode, w[1].mode, sep));
            }
        }
        report.min_within_cluster = report.min_within_cluster.min(min_sep);
        let follows_fr_order = by_value.windows(2).all(|w| w[0].mode.m() < w[1].mode.m());
        report.orderings.push(ClusterOrdering {
            r_squared: cluster.r_squared,
            modes_by_value: by_value.iter().map(|r| r.mode).collect(),
            min_separation: min_sep,
            follows_fr_order,
        });
    }
    Ok(report)
}

/// Empirical lower bound for the simplicity threshold `σ₀`.
#[derive(Debug, Clone, Serialize)]
pub struct Sigma0Estimate {
    pub r2_max: u64,
    /// `(σ, simple?)` in increasing `σ`.
    pub tested: Vec<(f64, bool)>,
    /// Largest tested `σ` such that every tested `σ' <= σ` was simple.
    /// Empirical: it depends on `r2_max` and the grid.
    pub empirical_lower_bound: Option<f64>,
}

/// Runs [`check_simplicity`] on a grid of `σ` values.
pub fn empirical_sigma0(
    geom: &TriangleGeometry<f64>,
    r2_max: u64,
    sigmas: &[f64],
    tol: f64,
) -> Result<Sigma0Estimate, SpectrumError> {
    let mut grid: Vec<f64> = sigmas.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut tested = Vec::with_capacity(grid.len());
    for &s in &grid {
        tested.push((s, check_simplicity(geom, s, r2_max, tol)?.is_simple()));
    }
    let empirical_lower_bound = tested
        .iter()
        .take_while(|(_, ok)| *ok)
        .last()
        .map(|(s, _)| *s);
    Ok(Sigma0Estimate {
        r2_max,
        tested,
        empirical_lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secular::DEFAULT_TOL;

    fn unit() -> TriangleGeometry<f64> {
        TriangleGeometry::new(1.0).unwrap()
    }

    fn mode(m: u32, n: u32) -> ModeIndex {
        ModeIndex::new(m, n).unwrap()
    }

    #[test]
    fn neumann_closed_form() {
        let g = unit();
        let rec = eigenvalue(&g, mode(1, 1), 0.0, DEFAULT_TOL).unwrap();
        let expect = 16.0 * std::f64::consts::PI.powi(2) / 3.0;
        assert!((rec.value - expect).abs() <= 1e-14 * expect);
        assert_eq!(rec.weight, 1);
        let a = eigenvalue(&g, mode(1, 9), 0.0, DEFAULT_TOL).unwrap();
        let b = eigenvalue(&g, mode(5, 6), 0.0, DEFAULT_TOL).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn robin_value_within_gap_bound() {
        let g = unit();
        let rec = eigenvalue(&g, mode(1, 2), 1.0, DEFAULT_TOL).unwrap();
        assert!(rec.value > rec.neumann_value);
        assert!(rec.value < rec.neumann_value + 8.0 * 3f64.sqrt());
        assert!((rec.value - rec.neumann_value - rec.shift).abs() < 1e-11);
    }

    #[test]
    fn small_table() {
        let g = unit();
        let t = enumerate_spectrum(&g, 0.0, 5.0 * g.eig_prefactor, DEFAULT_TOL).unwrap();
        let got: Vec<(ModeIndex, u8)> = t.entries.iter().map(|e| (e.mode, e.copy)).collect();
        assert_eq!(
            got,
            vec![
                (mode(0, 0), 0),
                (mode(0, 1), 0),
                (mode(0, 1), 1),
                (mode(1, 1), 0),
                (mode(0, 2), 0),
                (mode(0, 2), 1),
            ]
        );
        assert_eq!(t.complete_below, 5.0 * g.eig_prefactor);
    }

    #[test]
    fn cutoff_errors() {
        let g = unit();
        assert!(matches!(
            enumerate_spectrum(&g, 1.0, 0.0, DEFAULT_TOL),
            Err(SpectrumError::CutoffTooSmall(_))
        ));
    }

    #[test]
    fn weyl_count() {
        let g = unit();
        let x = 1e4 * g.eig_prefactor;
        let t = enumerate_spectrum(&g, 0.0, x, DEFAULT_TOL).unwrap();
        let count = t.entries.iter().filter(|e| e.value <= x).count() as f64;
        let weyl = g.area * x / (4.0 * std::f64::consts::PI);
        assert!((count / weyl - 1.0).abs() < 0.05);
    }

    #[test]
    fn clusters_small() {
        let c = clusters_up_to(10);
        let r2: Vec<u64> = c.iter().map(|c| c.r_squared).collect();
        assert_eq!(r2, vec![0, 1, 3, 4, 7, 9]);
        assert_eq!(c[4].modes, vec![mode(1, 2)]);
        let c = clusters_up_to(91);
        let find = |q| c.iter().find(|c| c.r_squared == q).unwrap().modes.clone();
        assert_eq!(find(91), vec![mode(1, 9), mode(5, 6)]);
        assert_eq!(find(49), vec![mode(0, 7), mode(3, 5)]);
    }

    #[test]
    fn deterministic_across_pools() {
        let g = unit();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| enumerate_spectrum(&g, 1.0, 300.0 * g.eig_prefactor, DEFAULT_TOL))
                .unwrap()
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn small_sigma_is_simple() {
        let g = unit();
        let sigma = 1e-3 * g.cluster_separation_threshold();
        let rep = check_simplicity(&g, sigma, 2000, DEFAULT_TOL).unwrap();
        assert!(rep.is_simple());
        let ord = rep.orderings.iter().find(|o| o.r_squared == 91).unwrap();
        assert_eq!(ord.modes_by_value, vec![mode(1, 9), mode(5, 6)]);
        assert_eq!(rep.pairs_smaller_m_higher, 0);
    }
}
