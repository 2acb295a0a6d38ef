mod output;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use robin_tri::asymptotics::{
    expansion_3term, expansion_remainder, predicted_derivatives_at_zero, secular_derivative_check,
    zero_branch_slope, DerivativeReport, REMAINDER_CONSTANT,
};
use robin_tri::eigenfunctions::{check_mode, grid_samples, NeumannMode, Parity};
use robin_tri::loeschian::{
    build_sieve, crt_gap_certificate, is_loeschian, max_gap, Arithmetic, LoeschianGap,
};
use robin_tri::spectrum::{
    check_simplicity, clusters_up_to, default_cache_dir, enumerate_spectrum_cached, SolveCache,
    SpectrumEntry,
};
use robin_tri::stats::{
    first_entries, normalized_spacings, rn_gaps_cached, spacing_cdf_from_values, spacing_histogram,
    spacing_normalization, HISTOGRAM_BIN_WIDTH,
};
use robin_tri::{
    make_geometry, solve_secular, DerivativeError, DomainError, Geometry, LoeschianError,
    ModeIndex, SolveError, SpectrumError, DEFAULT_TOL,
};

use output::{json, num, Csv, Mark, Plot, Series};

#[derive(Parser)]
#[command(
    name = "robin-tri",
    version,
    about = "Robin eigenvalues of the equilateral triangle"
)]
struct Cli {
    /// Side length of the triangle.
    #[arg(long, global = true, default_value_t = 1.0)]
    side: f64,

    /// Solver tolerance on the secular residuals.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Reuse secular solutions stored on disk; the directory is
    /// $ROBIN_TRI_CACHE or ./.robin-tri-cache.
    #[arg(long, global = true)]
    cache: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args, Clone, Copy)]
struct SigmaArg {
    /// Robin parameter σ [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,

    /// σ as a fraction of the simplicity threshold π²/(27r).
    #[arg(long, conflicts_with = "sigma", allow_negative_numbers = true)]
    sigma_frac: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Symmetric,
    Antisymmetric,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the secular system for one mode.
    Solve {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        sigma: SigmaArg,
    },
    /// Ordered Robin spectrum, by count or energy cutoff.
    #[command(group(ArgGroup::new("size").required(true).args(["count", "cutoff"])))]
    Spectrum {
        #[command(flatten)]
        sigma: SigmaArg,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        cutoff: Option<f64>,
    },
    /// Robin–Neumann gaps d_n against the bound 4σ/r.
    Rngaps {
        #[command(flatten)]
        sigma: SigmaArg,
        #[arg(long, default_value_t = 500)]
        count: usize,
    },
    /// Distribution of normalized level spacings.
    Spacing {
        #[command(flatten)]
        sigma: SigmaArg,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        /// Largest t on the CDF grid.
        #[arg(long, default_value_t = 3.0)]
        t_max: f64,
        /// Step of the CDF grid.
        #[arg(long, default_value_t = 0.01)]
        t_step: f64,
        /// Emit histogram counts instead of the CDF.
        #[arg(long)]
        histogram: bool,
    },
    /// Neumann clusters m² + mn + n² = R².
    Clusters {
        #[arg(long, default_value_t = 100)]
        r2max: u64,
    },
    /// Check that the desymmetrized spectrum is simple.
    Simplicity {
        #[command(flatten)]
        sigma: SigmaArg,
        #[arg(long, default_value_t = 10_000)]
        r2max: u64,
    },
    /// Three-term small-σ expansion against the solver.
    Asymptotics {
        /// Check a single mode (needs --n too) instead of the grid.
        #[arg(long, requires = "n")]
        m: Option<u32>,
        #[arg(long, requires = "m")]
        n: Option<u32>,
        /// Grid of modes 1 <= m <= n <= mmax.
        #[arg(long, default_value_t = 10)]
        mmax: u32,
        /// Largest σ checked [default: 0.0145/r].
        #[arg(long)]
        sigma_max: Option<f64>,
        /// σ samples per mode.
        #[arg(long, default_value_t = 10)]
        points: usize,
        /// σ range of the SVG curves [default: 5/r].
        #[arg(long)]
        plot_sigma_max: Option<f64>,
    },
    /// Integers of the form m² + mn + n² and their gaps.
    #[command(group(ArgGroup::new("task").required(true).args(["limit", "certificate", "check"])))]
    Loeschian {
        /// Sieve up to this bound and report the largest gap.
        #[arg(long)]
        limit: Option<u64>,
        /// Build a window of this many consecutive non-representable integers.
        #[arg(long)]
        certificate: Option<usize>,
        /// Test one integer.
        #[arg(long)]
        check: Option<u64>,
        /// 128-bit arithmetic for the certificate.
        #[arg(long)]
        wide: bool,
    },
    /// Neumann eigenfunction samples and residual checks.
    Eigenfunction {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "symmetric")]
        parity: ParityArg,
        /// Lattice steps per side.
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
}

/// Exit status classes.
enum CliError {
    /// Bad flags or values: exit 2.
    Usage(String),
    /// A numerical routine failed: exit 1.
    Numeric(String),
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::InvalidSigma(_)
            | SolveError::InvalidTolerance { .. }
            | SolveError::InvalidMode { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::Solve(s) => s.into(),
            SpectrumError::InvalidArgument(_) | SpectrumError::CutoffTooSmall(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<DerivativeError> for CliError {
    fn from(e: DerivativeError) -> Self {
        match e {
            DerivativeError::Solve(s) => s.into(),
            DerivativeError::Domain(d) => d.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<LoeschianError> for CliError {
    fn from(e: LoeschianError) -> Self {
        match e {
            LoeschianError::ArithmeticOverflow { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Rendered artifact plus whether the checks it carries passed.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn pass(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

struct Ctx {
    geom: Geometry,
    tol: f64,
    format: Option<Format>,
    cache: Option<SolveCache>,
}

impl Ctx {
    fn sigma(&self, arg: SigmaArg) -> Result<f64, CliError> {
        let sigma = match (arg.sigma, arg.sigma_frac) {
            (_, Some(f)) => f * self.geom.cluster_separation_threshold(),
            (Some(s), None) => s,
            (None, None) => 1.0,
        };
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(CliError::Usage(format!(
                "--sigma: need a finite value >= 0, got {sigma}"
            )));
        }
        Ok(sigma)
    }

    /// Chosen format, or `default` when none was given; `allowed` lists the rest.
    fn format(
        &self,
        default: Format,
        allowed: &[Format],
        command: &str,
    ) -> Result<Format, CliError> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Usage(format!(
                "--format: {} output is not available for `{command}`",
                format_name(f)
            )))
        }
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
        Format::Svg => "svg",
    }
}

fn mode(m: u32, n: u32) -> Result<ModeIndex, CliError> {
    ModeIndex::new(m, n)
        .map_err(|_| CliError::Usage(format!("--m/--n: need m <= n, got m = {m}, n = {n}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let geom = make_geometry(cli.side).map_err(|e| CliError::Usage(format!("--side: {e}")))?;
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(CliError::Usage(format!(
            "--tol: need 0 < tol < 1, got {}",
            cli.tol
        )));
    }
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads: need at least 1".into()));
    }
    let cache = if cli.cache {
        Some(
            SolveCache::open_dir(default_cache_dir())
                .map_err(|e| CliError::Numeric(e.to_string()))?,
        )
    } else {
        None
    };
    let ctx = Ctx {
        geom,
        tol: cli.tol,
        format: cli.format,
        cache,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Numeric(e.to_string()))?;
    let outcome = pool.install(|| run(&ctx, &cli.command))?;

    match &cli.out {
        Some(path) => std::fs::write(path, &outcome.text)
            .map_err(|e| CliError::Usage(format!("--out {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Numeric(e.to_string()))?;
        }
    }
    Ok(outcome.ok)
}

fn run(ctx: &Ctx, command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Solve { m, n, sigma } => solve(ctx, mode(*m, *n)?, ctx.sigma(*sigma)?),
        Command::Spectrum {
            sigma,
            count,
            cutoff,
        } => spectrum(ctx, ctx.sigma(*sigma)?, *count, *cutoff),
        Command::Rngaps { sigma, count } => rngaps(ctx, ctx.sigma(*sigma)?, *count),
        Command::Spacing {
            sigma,
            count,
            t_max,
            t_step,
            histogram,
        } => spacing(ctx, ctx.sigma(*sigma)?, *count, *t_max, *t_step, *histogram),
        Command::Clusters { r2max } => clusters(ctx, *r2max),
        Command::Simplicity { sigma, r2max } => simplicity(ctx, ctx.sigma(*sigma)?, *r2max),
        Command::Asymptotics {
            m,
            n,
            mmax,
            sigma_max,
            points,
            plot_sigma_max,
        } => {
            let single = match (m, n) {
                (Some(m), Some(n)) => Some(mode(*m, *n)?),
                _ => None,
            };
            asymptotics(ctx, single, *mmax, *sigma_max, *points, *plot_sigma_max)
        }
        Command::Loeschian {
            limit,
            certificate,
            check,
            wide,
        } => loeschian(ctx, *limit, *certificate, *check, *wide),
        Command::Eigenfunction { m, n, parity, grid } => {
            let parity = match parity {
                ParityArg::Symmetric => Parity::Symmetric,
                ParityArg::Antisymmetric => Parity::Antisymmetric,
            };
            eigenfunction(ctx, mode(*m, *n)?, parity, *grid)
        }
    }
}

#[derive(Serialize)]
struct SolveOut {
    m: u32,
    n: u32,
    sigma: f64,
    angles_lmn: [f64; 3],
    mu: f64,
    nu: f64,
    eigenvalue: f64,
    neumann_eigenvalue: f64,
    shift: f64,
    residual: f64,
    iterations: usize,
    method: robin_tri::SolveMethod,
}

fn solve(ctx: &Ctx, mode: ModeIndex, sigma: f64) -> Result<Outcome, CliError> {
    let g = &ctx.geom;
    let sol = solve_secular(g, mode, sigma, ctx.tol)?;
    let neumann = g.neumann_eigenvalue(mode.r_squared());
    let shift = sol.shift(g);
    let value = if sigma == 0.0 {
        neumann
    } else {
        sol.eigenvalue(g)
    };
    let [l, mm, nn] = sol.angles;
    // plain text unless a format was asked for
    let format = match ctx.format {
        None => None,
        Some(_) => Some(ctx.format(Format::Csv, &[Format::Csv, Format::Json], "solve")?),
    };
    let text = match format {
        None => format!(
            "mode {mode}  sigma {sigma}\n(L, M, N) = ({l}, {mm}, {nn})\neigenvalue {value}\nneumann    {neumann}\nshift      {shift}\n"
        ),
        Some(Format::Csv) => {
            let mut csv = Csv::new(&["m", "n", "sigma", "L", "M", "N", "eigenvalue", "neumann_eigenvalue", "shift", "residual"]);
            csv.row(&[
                mode.m().to_string(),
                mode.n().to_string(),
                num(sigma),
                num(l),
                num(mm),
                num(nn),
                num(value),
                num(neumann),
                num(shift),
                num(sol.residual_max),
            ]);
            csv.finish()
        }
        Some(Format::Json) => json(&SolveOut {
            m: mode.m(),
            n: mode.n(),
            sigma,
            angles_lmn: sol.angles,
            mu: sol.mu,
            nu: sol.nu,
            eigenvalue: value,
            neumann_eigenvalue: neumann,
            shift,
            residual: sol.residual_max,
            iterations: sol.iterations,
            method: sol.method,
        }),
        Some(Format::Svg) => unreachable!("rejected above"),
    };
    Ok(Outcome::pass(text))
}

fn entry_csv(entries: &[SpectrumEntry]) -> String {
    let mut csv = Csv::new(&["k", "m", "n", "copy", "eigenvalue", "shift"]);
    for (k, e) in entries.iter().enumerate() {
        csv.row(&[
            (k + 1).to_string(),
            e.mode.m().to_string(),
            e.mode.n().to_string(),
            e.copy.to_string(),
            num(e.value),
            num(e.shift),
        ]);
    }
    csv.finish()
}

fn spectrum(
    ctx: &Ctx,
    sigma: f64,
    count: Option<usize>,
    cutoff: Option<f64>,
) -> Result<Outcome, CliError> {
    let format = ctx.format(Format::Csv, &[Format::Csv, Format::Json], "spectrum")?;
    let cache = ctx.cache.as_ref();
    let text = match (count, cutoff) {
        (Some(count), _) => {
            let entries = first_entries(&ctx.geom, sigma, count, ctx.tol, cache)?;
            match format {
                Format::Json => json(&entries),
                _ => entry_csv(&entries),
            }
        }
        (None, Some(cutoff)) => {
            let table = enumerate_spectrum_cached(&ctx.geom, sigma, cutoff, ctx.tol, cache)?;
            match format {
                Format::Json => json(&table),
                _ => entry_csv(&table.entries),
            }
        }
        (None, None) => unreachable!("clap requires --count or --cutoff"),
    };
    Ok(Outcome::pass(text))
}

#[derive(Serialize)]
struct GapSummary {
    sigma: f64,
    count: usize,
    dbar: f64,
    violations: usize,
    max_gap: f64,
    mean_gap: f64,
    gaps: Vec<f64>,
}

fn rngaps(ctx: &Ctx, sigma: f64, count: usize) -> Result<Outcome, CliError> {
    let format = ctx.format(
        Format::Csv,
        &[Format::Csv, Format::Json, Format::Svg],
        "rngaps",
    )?;
    let gaps = rn_gaps_cached(&ctx.geom, sigma, count, ctx.tol, ctx.cache.as_ref())?;
    let ok = gaps.bound_violations() == 0;
    let text = match format {
        Format::Csv => {
            let mut csv = Csv::new(&["n", "lambda_neumann", "lambda_robin", "d_n", "dbar"]);
            for i in 0..gaps.len() {
                csv.row(&[
                    (i + 1).to_string(),
                    num(gaps.neumann[i]),
                    num(gaps.robin[i]),
                    num(gaps.d[i]),
                    num(gaps.dbar),
                ]);
            }
            csv.finish()
        }
        Format::Json => json(&GapSummary {
            sigma,
            count: gaps.len(),
            dbar: gaps.dbar,
            violations: gaps.bound_violations(),
            max_gap: gaps.d.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean_gap: gaps.mean_prefix.last().copied().unwrap_or(0.0),
            gaps: gaps.d.clone(),
        }),
        Format::Svg => {
            let shown = gaps.len().min(500);
            Plot {
                title: format!("Robin–Neumann gaps, sigma = {sigma}"),
                x_label: "n".into(),
                y_label: "d_n".into(),
                series: vec![
                    Series {
                        label: "d_n".into(),
                        color: "steelblue",
                        mark: Mark::Dots,
                        points: (0..shown).map(|i| ((i + 1) as f64, gaps.d[i])).collect(),
                    },
                    Series {
                        label: "4 sigma / r".into(),
                        color: "firebrick",
                        mark: Mark::Line,
                        points: vec![(1.0, gaps.dbar), (shown as f64, gaps.dbar)],
                    },
                ],
            }
            .render()
        }
    };
    Ok(Outcome { text, ok })
}

fn spacing(
    ctx: &Ctx,
    sigma: f64,
    count: usize,
    t_max: f64,
    t_step: f64,
    histogram: bool,
) -> Result<Outcome, CliError> {
    let format = ctx.format(
        Format::Csv,
        &[Format::Csv, Format::Json, Format::Svg],
        "spacing",
    )?;
    if count < 2 {
        return Err(CliError::Usage(format!(
            "--count: need at least 2, got {count}"
        )));
    }
    if !(t_step > 0.0 && t_max >= t_step && t_max.is_finite()) {
        return Err(CliError::Usage(format!(
            "--t-max/--t-step: need 0 < t-step <= t-max, got {t_step} and {t_max}"
        )));
    }
    let entries = first_entries(&ctx.geom, sigma, count + 1, ctx.tol, ctx.cache.as_ref())?;
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    if histogram {
        let x = normalized_spacings(&values, spacing_normalization(&ctx.geom), count);
        let bins = spacing_histogram(&x, HISTOGRAM_BIN_WIDTH);
        let text = match format {
            Format::Csv => {
                let mut csv = Csv::new(&["bin_start", "count"]);
                for (b, c) in &bins {
                    csv.row(&[num(*b), c.to_string()]);
                }
                csv.finish()
            }
            Format::Json => json(&bins),
            Format::Svg => Plot {
                title: format!("Normalized spacings, sigma = {sigma}"),
                x_label: "x".into(),
                y_label: "count".into(),
                series: vec![Series {
                    label: format!("N = {count}"),
                    color: "steelblue",
                    mark: Mark::Line,
                    points: bins.iter().map(|(b, c)| (*b, *c as f64)).collect(),
                }],
            }
            .render(),
        };
        return Ok(Outcome::pass(text));
    }
    let steps = (t_max / t_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (1..=steps).map(|k| k as f64 * t_step).collect();
    let cdf = spacing_cdf_from_values(&ctx.geom, sigma, &values, count, &grid);
    let text = match format {
        Format::Csv => {
            let mut csv = Csv::new(&["t", "cdf"]);
            for (t, p) in &cdf.samples {
                csv.row(&[num(*t), num(*p)]);
            }
            csv.finish()
        }
        Format::Json => json(&cdf),
        Format::Svg => Plot {
            title: format!("Spacing distribution, sigma = {sigma}"),
            x_label: "t".into(),
            y_label: "P(x < t)".into(),
            series: vec![Series {
                label: format!("N = {count}"),
                color: "steelblue",
                mark: Mark::Line,
                points: cdf.samples.clone(),
            }],
        }
        .render(),
    };
    Ok(Outcome::pass(text))
}

fn clusters(ctx: &Ctx, r2max: u64) -> Result<Outcome, CliError> {
    let format = ctx.format(Format::Csv, &[Format::Csv, Format::Json], "clusters")?;
    let all = clusters_up_to(r2max);
    let text = match format {
        Format::Json => json(&all),
        _ => {
            let mut csv = Csv::new(&["r_squared", "size", "modes"]);
            for c in &all {
                let modes: Vec<String> = c
                    .modes
                    .iter()
                    .map(|m| format!("{}:{}", m.m(), m.n()))
                    .collect();
                csv.row(&[
                    c.r_squared.to_string(),
                    c.modes.len().to_string(),
                    modes.join(";"),
                ]);
            }
            csv.finish()
        }
    };
    Ok(Outcome::pass(text))
}

#[derive(Serialize)]
struct SimplicitySummary {
    sigma: f64,
    sigma_over_threshold: f64,
    r2_max: u64,
    modes_checked: usize,
    resolution: f64,
    min_within_cluster: f64,
    min_between_clusters: f64,
    collisions: usize,
    inter_cluster_crossings: usize,
    pairs_smaller_m_lower: usize,
    pairs_smaller_m_higher: usize,
    simple: bool,
}

fn simplicity(ctx: &Ctx, sigma: f64, r2max: u64) -> Result<Outcome, CliError> {
    let format = ctx.format(Format::Json, &[Format::Csv, Format::Json], "simplicity")?;
    let report = check_simplicity(&ctx.geom, sigma, r2max, ctx.tol)?;
    let ok = report.is_simple();
    let text = match format {
        Format::Csv => {
            let mut csv = Csv::new(&[
                "r_squared",
                "modes_by_value",
                "min_separation",
                "follows_fr_order",
            ]);
            for o in &report.orderings {
                let modes: Vec<String> = o
                    .modes_by_value
                    .iter()
                    .map(|m| format!("{}:{}", m.m(), m.n()))
                    .collect();
                csv.row(&[
                    o.r_squared.to_string(),
                    modes.join(";"),
                    num(o.min_separation),
                    o.follows_fr_order.to_string(),
                ]);
            }
            csv.finish()
        }
        _ => json(&SimplicitySummary {
            sigma,
            sigma_over_threshold: sigma / ctx.geom.cluster_separation_threshold(),
            r2_max: report.r2_max,
            modes_checked: report.modes_checked,
            resolution: report.resolution,
            min_within_cluster: report.min_within_cluster,
            min_between_clusters: report.min_between_clusters,
            collisions: report.violating_pairs.len(),
            inter_cluster_crossings: report.inter_cluster_crossings.len(),
            pairs_smaller_m_lower: report.pairs_smaller_m_lower,
            pairs_smaller_m_higher: report.pairs_smaller_m_higher,
            simple: ok,
        }),
    };
    Ok(Outcome { text, ok })
}

#[derive(Serialize)]
struct ExpansionRow {
    m: u32,
    n: u32,
    sigma: f64,
    lambda_solver: f64,
    lambda_3term: f64,
    abs_err: f64,
    bound: f64,
}

#[derive(Serialize)]
struct AsymptoticsOut {
    coefficients: Option<robin_tri::Coefficients>,
    derivative_checks: Vec<DerivativeReport>,
    zero_branch_slope: Option<robin_tri::asymptotics::DerivativeCheck>,
    rows: Vec<ExpansionRow>,
    within_bound: bool,
}

fn expansion_rows(
    ctx: &Ctx,
    modes: &[ModeIndex],
    sigmas: &[f64],
) -> Result<Vec<ExpansionRow>, CliError> {
    use rayon::prelude::*;
    let g = &ctx.geom;
    let jobs: Vec<(ModeIndex, f64)> = modes
        .iter()
        .flat_map(|&m| sigmas.iter().map(move |&s| (m, s)))
        .collect();
    jobs.par_iter()
        .map(|&(mode, sigma)| {
            let lambda_solver = solve_secular(g, mode, sigma, ctx.tol)?.eigenvalue(g);
            let lambda_3term = expansion_3term(g, mode, sigma)?;
            let abs_err = expansion_remainder(g, mode, sigma, ctx.tol)?.abs();
            let m4 = (mode.m() as f64).powi(4);
            Ok(ExpansionRow {
                m: mode.m(),
                n: mode.n(),
                sigma,
                lambda_solver,
                lambda_3term,
                abs_err,
                bound: REMAINDER_CONSTANT * g.r * sigma.powi(3) / m4,
            })
        })
        .collect::<Result<Vec<_>, DerivativeError>>()
        .map_err(CliError::from)
}

fn asymptotics(
    ctx: &Ctx,
    single: Option<ModeIndex>,
    mmax: u32,
    sigma_max: Option<f64>,
    points: usize,
    plot_sigma_max: Option<f64>,
) -> Result<Outcome, CliError> {
    let format = ctx.format(
        Format::Csv,
        &[Format::Csv, Format::Json, Format::Svg],
        "asymptotics",
    )?;
    let g = &ctx.geom;
    if format == Format::Svg {
        let top = plot_sigma_max.unwrap_or(5.0 / g.r);
        if !(top > 0.0 && top.is_finite()) {
            return Err(CliError::Usage(format!(
                "--plot-sigma-max: need > 0, got {top}"
            )));
        }
        let colors = ["steelblue", "firebrick", "darkgreen"];
        let mut series = Vec::new();
        for (k, (m, n)) in [(1, 9), (5, 6), (4, 7)].into_iter().enumerate() {
            let mode = ModeIndex::new(m, n).expect("m <= n");
            let mut pts = Vec::with_capacity(101);
            for i in 0..=100 {
                let s = top * i as f64 / 100.0;
                let sol = solve_secular(g, mode, s, ctx.tol)?;
                let v = if s == 0.0 {
                    g.neumann_eigenvalue(mode.r_squared())
                } else {
                    sol.eigenvalue(g)
                };
                pts.push((s, v));
            }
            series.push(Series {
                label: format!("Lambda{mode}"),
                color: colors[k],
                mark: Mark::Line,
                points: pts,
            });
        }
        let plot = Plot {
            title: "Eigenvalue curves".into(),
            x_label: "sigma".into(),
            y_label: "Lambda".into(),
            series,
        };
        return Ok(Outcome::pass(plot.render()));
    }

    let top = sigma_max.unwrap_or(0.0145 / g.r);
    if !(top > 0.0 && top.is_finite()) {
        return Err(CliError::Usage(format!("--sigma-max: need > 0, got {top}")));
    }
    if points == 0 {
        return Err(CliError::Usage("--points: need at least 1".into()));
    }
    let sigmas: Vec<f64> = (1..=points)
        .map(|k| top * k as f64 / points as f64)
        .collect();

    let mut out = AsymptoticsOut {
        coefficients: None,
        derivative_checks: Vec::new(),
        zero_branch_slope: None,
        rows: Vec::new(),
        within_bound: true,
    };
    match single {
        Some(mode) if mode.m() == 0 => {
            out.coefficients = Some(predicted_derivatives_at_zero(g, mode));
            if mode.n() > 0 {
                out.zero_branch_slope = Some(zero_branch_slope(g, mode, ctx.tol)?);
            }
        }
        Some(mode) => {
            out.coefficients = Some(predicted_derivatives_at_zero(g, mode));
            if format == Format::Json {
                for order in 1..=3 {
                    out.derivative_checks
                        .push(secular_derivative_check(g, mode, order)?);
                }
            }
            out.rows = expansion_rows(ctx, &[mode], &sigmas)?;
        }
        None => {
            if mmax == 0 {
                return Err(CliError::Usage("--mmax: need at least 1".into()));
            }
            let modes: Vec<ModeIndex> = (1..=mmax)
                .flat_map(|m| (m..=mmax).map(move |n| ModeIndex::sorted(m, n)))
                .collect();
            out.rows = expansion_rows(ctx, &modes, &sigmas)?;
        }
    }
    out.within_bound = out.rows.iter().all(|r| r.abs_err <= r.bound);
    let ok = out.within_bound;
    let text = match format {
        Format::Json => json(&out),
        _ => {
            let mut csv = Csv::new(&[
                "m",
                "n",
                "sigma",
                "lambda_solver",
                "lambda_3term",
                "abs_err",
                "bound",
            ]);
            for r in &out.rows {
                csv.row(&[
                    r.m.to_string(),
                    r.n.to_string(),
                    num(r.sigma),
                    num(r.lambda_solver),
                    num(r.lambda_3term),
                    num(r.abs_err),
                    num(r.bound),
                ]);
            }
            csv.finish()
        }
    };
    Ok(Outcome { text, ok })
}

#[derive(Serialize)]
struct SieveOut {
    limit: u64,
    count: u64,
    density_ratio: f64,
    max_gap: LoeschianGap,
}

fn loeschian(
    ctx: &Ctx,
    limit: Option<u64>,
    certificate: Option<usize>,
    check: Option<u64>,
    wide: bool,
) -> Result<Outcome, CliError> {
    ctx.format(Format::Json, &[Format::Json], "loeschian")?;
    if let Some(k) = certificate {
        let arithmetic = if wide {
            Arithmetic::Wide
        } else {
            Arithmetic::Native
        };
        let cert = crt_gap_certificate(k, arithmetic)?;
        let ok = cert.check_congruences() && cert.verify_brute_force() != Some(false);
        // keys are declared in sorted order; going through serde_json::Value
        // would reject n0 above u64
        let mut text = serde_json::to_string_pretty(&cert).expect("serializable");
        text.push('\n');
        return Ok(Outcome { text, ok });
    }
    if let Some(k) = check {
        return Ok(Outcome::pass(json(&is_loeschian(k))));
    }
    let limit = limit.expect("clap requires one task");
    let sieve = build_sieve(limit)?;
    Ok(Outcome::pass(json(&SieveOut {
        limit,
        count: sieve.count(),
        density_ratio: sieve.density_ratio(),
        max_gap: max_gap(&sieve),
    })))
}

/// Residual thresholds relative to the eigenvalue scale.
const EIGENFUNCTION_RESIDUAL: f64 = 1e-10;
const EIGENFUNCTION_NORM: f64 = 1e-6;

fn eigenfunction(
    ctx: &Ctx,
    mode: ModeIndex,
    parity: Parity,
    grid: usize,
) -> Result<Outcome, CliError> {
    let format = ctx.format(Format::Csv, &[Format::Csv, Format::Json], "eigenfunction")?;
    let nm = NeumannMode::new(mode, parity)?;
    match format {
        Format::Json => {
            let check = check_mode(&ctx.geom, &nm, grid)?;
            let scale = 1.0 + check.eigenvalue;
            let ok = check.helmholtz_residual <= EIGENFUNCTION_RESIDUAL * scale
                && check.boundary_residual <= EIGENFUNCTION_RESIDUAL * scale
                && check.norm_rel_error() <= EIGENFUNCTION_NORM;
            Ok(Outcome {
                text: json(&check),
                ok,
            })
        }
        _ => {
            if grid == 0 {
                return Err(CliError::Usage("--grid: need at least 1".into()));
            }
            let mut csv = Csv::new(&["x", "y", "value"]);
            for (x, y, v) in grid_samples(&ctx.geom, &nm, grid) {
                csv.row(&[num(x), num(y), num(v)]);
            }
            Ok(Outcome::pass(csv.finish()))
        }
    }
}
