//! `sphgreen`: evaluate the screened Poisson Green's function on the sphere,
//! regenerate the published tables and figure data, and solve the PDE on
//! gridded fields.

mod output;
mod presets;

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use sphgreen::fieldio::{parse_field, parse_real_list, write_field};
use sphgreen::integral::{green_antipode, green_equator, green_quadrature, QuadratureSpec};
use sphgreen::series::{self, error_curve, g_star, green_direct, green_split, SplitTable};
use sphgreen::spectral::{
    bump_center, gaussian_bump, harmonic_field, solve_convolution_with, solve_spectral,
    KernelEvaluator, QuadratureEvaluator, SelfTerm, SphereField, SphereGrid, SplitEvaluator,
};
use sphgreen::{
    Error, EvalPoint, GreenResult, Method, Precision, ShellParams, TruncationPolicy,
    DEFAULT_RADIUS_KM,
};

use output::{sink, write_records, Format, Record};

const DD_EPSILON: f64 = 1e-18;
const DOUBLE_EPSILON: f64 = 1e-14;
const QUAD_ABS_TOL: f64 = 1e-22;

#[derive(Parser)]
#[command(name = "sphgreen", version, about = "Green's function of the screened Poisson equation on a sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate G at one separation.
    Eval(EvalArgs),
    /// Compare split sum, quadrature and closed forms over a set of rows.
    Table(TableArgs),
    /// Absolute error of the split sum against the number of terms.
    ErrorCurve(CurveArgs),
    /// G, G* and G - G* over a range of separations.
    GgStar(GgStarArgs),
    /// Solve the screened Poisson equation for a gridded forcing.
    Solve(SolveArgs),
}

#[derive(Args, Clone)]
struct ShellOpts {
    /// Shell radius in km.
    #[arg(long, env = "GREEN_DEFAULT_RADIUS_KM", default_value_t = DEFAULT_RADIUS_KM)]
    radius_km: f64,
}

#[derive(Args, Clone)]
struct OutOpts {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SeriesOpts {
    /// Arithmetic of the split sum (default: dd for the split sum).
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
    /// Bracket-coefficient cutoff of the automatic truncation.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Fixed number of terms instead of the automatic truncation.
    #[arg(long)]
    l_trunc: Option<usize>,
    /// Relative tolerance of the quadrature.
    #[arg(long, default_value_t = 1e-12)]
    rel_tol: f64,
    /// Round gamma/gamma* to single precision before use, as the published
    /// split-sum column was computed.
    #[arg(long, value_enum, default_value = "double")]
    ratio_precision: RatioPrecision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecisionArg {
    Double,
    Dd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RatioPrecision {
    Double,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Split,
    Quadrature,
    Closed,
    Auto,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("where").required(true).args(["gamma_ratio", "cos_gamma", "gamma"])))]
struct EvalArgs {
    /// Rossby radius of deformation in km.
    #[arg(long)]
    ld_km: f64,
    /// Separation as a multiple of gamma* = L_d / R.
    #[arg(long, allow_negative_numbers = true)]
    gamma_ratio: Option<f64>,
    /// Cosine of the separation.
    #[arg(long, allow_negative_numbers = true)]
    cos_gamma: Option<f64>,
    /// Separation in radians.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    #[command(flatten)]
    shell: ShellOpts,
    #[command(flatten)]
    series: SeriesOpts,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TablePreset {
    Table1,
    Table2,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_enum)]
    preset: Option<TablePreset>,
    /// Rossby radii in km (list; `a:b:n` expands to a range).
    #[arg(long, allow_hyphen_values = true)]
    ld_km: Option<String>,
    /// Separations as multiples of gamma* (list).
    #[arg(long, allow_hyphen_values = true)]
    gamma_ratio: Option<String>,
    /// Cosines of the separations (list).
    #[arg(long, allow_hyphen_values = true)]
    cos_gamma: Option<String>,
    #[command(flatten)]
    shell: ShellOpts,
    #[command(flatten)]
    series: SeriesOpts,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurvePreset {
    Fig2,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, value_enum)]
    preset: Option<CurvePreset>,
    /// Rossby radii in km (list).
    #[arg(long)]
    ld_km: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    gamma_ratio: f64,
    /// Largest number of terms on the curve.
    #[arg(long, allow_negative_numbers = true)]
    l_max: Option<i64>,
    #[command(flatten)]
    shell: ShellOpts,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GgPreset {
    Fig3,
    Fig4,
}

#[derive(Args)]
struct GgStarArgs {
    #[arg(long, value_enum)]
    preset: Option<GgPreset>,
    /// Rossby radii in km (list).
    #[arg(long)]
    ld_km: Option<String>,
    /// Separations as multiples of gamma* (list; default 0.1 to 20).
    #[arg(long)]
    gamma_ratio: Option<String>,
    /// Arithmetic of the split sum (default double).
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[command(flatten)]
    shell: ShellOpts,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Spectral,
    Convolution,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldPreset {
    /// Y_{2,0}.
    Y20,
    /// Gaussian bump of angular width 5 gamma*.
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Split,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SelfTermArg {
    Subtracted,
    Disk,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("forcing").required(true).args(["input", "preset"])))]
struct SolveArgs {
    /// Forcing field file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<FieldPreset>,
    #[arg(long)]
    ld_km: f64,
    #[arg(long, value_enum, default_value = "both")]
    method: SolveMethod,
    /// Harmonic truncation of the spectral solver; also sizes preset grids.
    #[arg(long, default_value_t = 32)]
    l_max: usize,
    /// Grid size for presets (default l_max + 1 by 2 l_max + 2).
    #[arg(long)]
    n_theta: Option<usize>,
    #[arg(long)]
    n_phi: Option<usize>,
    /// Kernel evaluator of the convolution solver.
    #[arg(long, value_enum, default_value = "split")]
    kernel: KernelArg,
    /// Cutoff of the split-sum kernel.
    #[arg(long, default_value_t = DOUBLE_EPSILON)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "subtracted")]
    self_term: SelfTermArg,
    /// Also write the forcing field here.
    #[arg(long)]
    write_forcing: Option<PathBuf>,
    #[command(flatten)]
    shell: ShellOpts,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. }
            | Error::DivByZero
            | Error::Singular { .. }
            | Error::DomainError { .. }
            | Error::ArgOutOfRange { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| config(format!("{}: {e}", path.display()))
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Table(a) => cmd_table(a),
        Command::ErrorCurve(a) => cmd_error_curve(a),
        Command::GgStar(a) => cmd_gg_star(a),
        Command::Solve(a) => cmd_solve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sphgreen: {e}");
            ExitCode::from(match e {
                CliError::Config(_) => 2,
                CliError::Numerical(_) => 3,
            })
        }
    }
}

fn emit(out: &OutOpts, records: &[Record]) -> CliResult<()> {
    let w = match &out.output {
        Some(p) => sink(Some(p)).map_err(io_err(p))?,
        None => sink(None).map_err(|e| config(e.to_string()))?,
    };
    match write_records(w, records, out.format) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(config(format!("writing output: {e}")))
        }
        _ => Ok(()),
    }
}

fn list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    parse_real_list(text).map_err(|e| config(format!("--{what}: {e}")))
}

fn round_ratio(ratio: f64, rp: RatioPrecision) -> f64 {
    match rp {
        RatioPrecision::Double => ratio,
        RatioPrecision::Single => ratio as f32 as f64,
    }
}

/// The split-sum settings implied by the series options.
fn split_settings(s: &SeriesOpts, default: Precision) -> CliResult<(TruncationPolicy, Precision)> {
    let precision = match s.precision {
        Some(PrecisionArg::Double) => Precision::Double,
        Some(PrecisionArg::Dd) => Precision::DoubleDouble,
        None => default,
    };
    let policy = match (s.l_trunc, s.epsilon) {
        (Some(_), Some(_)) => return Err(config("--l-trunc and --epsilon are mutually exclusive")),
        (Some(l), None) => TruncationPolicy::Fixed(l),
        (None, Some(e)) => TruncationPolicy::auto(e),
        (None, None) => TruncationPolicy::auto(match precision {
            Precision::Double => DOUBLE_EPSILON,
            Precision::DoubleDouble => DD_EPSILON,
        }),
    };
    Ok((policy, precision))
}

fn quad_spec(s: &SeriesOpts) -> QuadratureSpec {
    QuadratureSpec::new(s.rel_tol, QUAD_ABS_TOL)
}

/// Closed form when the point is exactly the equator or the antipode.
fn closed_form(params: &ShellParams, p: &EvalPoint) -> Option<f64> {
    if p.cos_gamma() == -1.0 {
        Some(green_antipode(params))
    } else if p.cos_gamma() == 0.0 {
        Some(green_equator(params))
    } else {
        None
    }
}

fn cmd_eval(a: EvalArgs) -> CliResult<()> {
    let params = ShellParams::new(a.shell.radius_km, a.ld_km)?;
    let ratio_in = a.gamma_ratio.map(|r| round_ratio(r, a.series.ratio_precision));
    let p = match (ratio_in, a.cos_gamma, a.gamma) {
        (Some(r), _, _) => EvalPoint::from_ratio(r, &params)?,
        (_, Some(c), _) => EvalPoint::from_cos(c)?,
        (_, _, Some(g)) => EvalPoint::from_gamma(g)?,
        _ => unreachable!("clap requires one of the three"),
    };
    let precision_given = a.series.precision;
    // auto: closed form, else quadrature; an explicit precision selects the split sum
    let method = match a.method {
        MethodArg::Auto if precision_given.is_some() => MethodArg::Split,
        MethodArg::Auto if closed_form(&params, &p).is_some() => MethodArg::Closed,
        MethodArg::Auto => MethodArg::Quadrature,
        m => m,
    };
    if method != MethodArg::Split && precision_given == Some(PrecisionArg::Dd) {
        return Err(config(
            "double-double precision is only available for the split sum",
        ));
    }
    let r: GreenResult = match method {
        MethodArg::Split => {
            let (policy, precision) = split_settings(&a.series, Precision::DoubleDouble)?;
            green_split(&params, &p, policy, precision)?
        }
        MethodArg::Direct => {
            if a.series.epsilon.is_some() {
                return Err(config("the direct sum takes --l-trunc, not --epsilon"));
            }
            let l = a.series.l_trunc.unwrap_or(100_000);
            if l as u64 > series::MAX_TERMS {
                return Err(Error::TruncationTooLarge {
                    requested: l as u64,
                    limit: series::MAX_TERMS,
                }
                .into());
            }
            green_direct(&params, &p, l)
        }
        MethodArg::Quadrature => green_quadrature(&params, &p, &quad_spec(&a.series))?,
        MethodArg::Closed => {
            let value = closed_form(&params, &p).ok_or_else(|| {
                config("closed forms exist only at cos gamma = 0 and cos gamma = -1")
            })?;
            GreenResult {
                value,
                method: Method::ClosedForm,
                terms_used: 0,
                est_error: 0.0,
            }
        }
        MethodArg::Auto => unreachable!(),
    };
    let rec = Record::new()
        .with("ld_km", params.rossby_km())
        .with("radius_km", params.radius_km())
        .with("gamma_ratio", p.gamma() / params.gamma_star())
        .with("gamma_rad", p.gamma())
        .with("cos_gamma", p.cos_gamma())
        .with("value", r.value)
        .with("method", r.method.as_str())
        .with("terms_used", r.terms_used)
        .with("est_error", r.est_error);
    emit(&a.out, &[rec])
}

#[derive(Clone, Copy)]
enum Where {
    Ratio(f64),
    Cos(f64),
}

fn cmd_table(a: TableArgs) -> CliResult<()> {
    let mut rows: Vec<(f64, Where)> = Vec::new();
    match a.preset {
        Some(_) if a.ld_km.is_some() || a.gamma_ratio.is_some() || a.cos_gamma.is_some() => {
            return Err(config("--preset cannot be combined with explicit rows"));
        }
        Some(TablePreset::Table1) => {
            for r in presets::TABLE1_RATIOS {
                rows.push((presets::TABLE1_LD_KM, Where::Ratio(r)));
            }
        }
        Some(TablePreset::Table2) => {
            for ld in presets::table2_equator_ld() {
                rows.push((ld, Where::Cos(0.0)));
            }
            for ld in presets::table2_antipode_ld() {
                rows.push((ld, Where::Cos(-1.0)));
            }
        }
        None => {
            let lds = list(a.ld_km.as_deref().ok_or_else(|| config("--ld-km is required"))?, "ld-km")?;
            let wheres: Vec<Where> = match (&a.gamma_ratio, &a.cos_gamma) {
                (Some(r), None) => list(r, "gamma-ratio")?.into_iter().map(Where::Ratio).collect(),
                (None, Some(c)) => list(c, "cos-gamma")?.into_iter().map(Where::Cos).collect(),
                _ => return Err(config("give exactly one of --gamma-ratio and --cos-gamma")),
            };
            for ld in &lds {
                for w in &wheres {
                    rows.push((*ld, *w));
                }
            }
        }
    }
    let (policy, precision) = split_settings(&a.series, Precision::DoubleDouble)?;
    let spec = quad_spec(&a.series);
    let radius = a.shell.radius_km;
    let rp = a.series.ratio_precision;

    let records: Vec<CliResult<Record>> = rows
        .par_iter()
        .map(|&(ld, w)| {
            let params = ShellParams::new(radius, ld)?;
            let p = match w {
                Where::Ratio(r) => EvalPoint::from_ratio(round_ratio(r, rp), &params)?,
                Where::Cos(c) => EvalPoint::from_cos(c)?,
            };
            let split = green_split(&params, &p, policy, precision)?;
            let quad = green_quadrature(&params, &p, &spec)?;
            let closed = closed_form(&params, &p);
            let reference = closed.unwrap_or(quad.value);
            Ok(Record::new()
                .with("ld_km", ld)
                .with("cos_gamma", p.cos_gamma())
                .with("gamma_ratio", match w {
                    Where::Ratio(r) => r,
                    Where::Cos(_) => p.gamma() / params.gamma_star(),
                })
                .with("gamma_rad", p.gamma())
                .with("g_split", split.value)
                .with("split_method", split.method.as_str())
                .with("split_terms", split.terms_used)
                .with("split_est_error", split.est_error)
                .with("g_quadrature", quad.value)
                .with("quadrature_est_error", quad.est_error)
                .with("g_closed", closed)
                .with("rel_diff", ((split.value - reference) / reference).abs()))
        })
        .collect();
    let records = records.into_iter().collect::<CliResult<Vec<_>>>()?;
    emit(&a.out, &records)
}

fn cmd_error_curve(a: CurveArgs) -> CliResult<()> {
    let (lds, default_l) = match a.preset {
        Some(CurvePreset::Fig2) => {
            if a.ld_km.is_some() {
                return Err(config("--preset cannot be combined with --ld-km"));
            }
            (presets::FIG2_LD_KM.to_vec(), presets::FIG2_L_MAX)
        }
        None => (
            list(a.ld_km.as_deref().ok_or_else(|| config("--ld-km is required"))?, "ld-km")?,
            presets::FIG2_L_MAX,
        ),
    };
    let l_max = match a.l_max {
        None => default_l,
        Some(l) if l < 2 => return Err(config(format!("--l-max must be at least 2, got {l}"))),
        Some(l) => l as usize,
    };
    let mut records = Vec::new();
    for ld in lds {
        let params = ShellParams::new(a.shell.radius_km, ld)?;
        let p = EvalPoint::from_ratio(a.gamma_ratio, &params)?;
        let curve = error_curve(&params, &p, l_max)?;
        if let Some(s) = curve.fitted_slope(l_max / 10, l_max) {
            eprintln!("ld_km={ld} fitted slope over [{}, {l_max}]: {s:.3}", l_max / 10);
        }
        for pt in &curve.points {
            records.push(
                Record::new()
                    .with("ld_km", ld)
                    .with("gamma_ratio", a.gamma_ratio)
                    .with("l", pt.l)
                    .with("abs_error", pt.abs_error)
                    .with("envelope", pt.envelope)
                    .with("method", Method::SplitDd.as_str())
                    .with(
                        "est_error",
                        series::bracket_coefficient(pt.l, params.gamma_star()).abs() / (4.0 * PI),
                    ),
            );
        }
    }
    emit(&a.out, &records)
}

fn cmd_gg_star(a: GgStarArgs) -> CliResult<()> {
    let lds = match (a.preset, &a.ld_km) {
        (Some(_), Some(_)) => return Err(config("--preset cannot be combined with --ld-km")),
        (Some(GgPreset::Fig3), None) => presets::FIG3_LD_KM.to_vec(),
        (Some(GgPreset::Fig4), None) => presets::FIG4_LD_KM.to_vec(),
        (None, Some(l)) => list(l, "ld-km")?,
        (None, None) => return Err(config("--ld-km or --preset is required")),
    };
    let ratios = match &a.gamma_ratio {
        Some(r) => list(r, "gamma-ratio")?,
        None => presets::gg_star_ratios(),
    };
    let precision = match a.precision {
        Some(PrecisionArg::Dd) => Precision::DoubleDouble,
        _ => Precision::Double,
    };
    let policy = TruncationPolicy::auto(a.epsilon.unwrap_or(match precision {
        Precision::Double => DOUBLE_EPSILON,
        Precision::DoubleDouble => DD_EPSILON,
    }));

    let mut records = Vec::new();
    for ld in lds {
        let params = ShellParams::new(a.shell.radius_km, ld)?;
        let mut points = Vec::new();
        for &r in &ratios {
            match EvalPoint::from_ratio(r, &params) {
                Ok(p) => points.push((r, p)),
                Err(e) => eprintln!("warning: skipping ld_km={ld} gamma_ratio={r}: {e}"),
            }
        }
        let values: Vec<(f64, f64, &'static str)> = match precision {
            Precision::Double => {
                let table = SplitTable::new(&params, policy)?;
                let pts: Vec<EvalPoint> = points.iter().map(|(_, p)| *p).collect();
                let est = table.est_error();
                table
                    .eval_many(&pts)?
                    .into_iter()
                    .map(|g| (g, est, Method::Split.as_str()))
                    .collect()
            }
            Precision::DoubleDouble => points
                .par_iter()
                .map(|(_, p)| {
                    green_split(&params, p, policy, precision)
                        .map(|r| (r.value, r.est_error, r.method.as_str()))
                })
                .collect::<sphgreen::Result<_>>()?,
        };
        for ((r, p), (g, est, method)) in points.iter().zip(values) {
            let gs = g_star(p)?;
            records.push(
                Record::new()
                    .with("ld_km", ld)
                    .with("gamma_ratio", *r)
                    .with("gamma_rad", p.gamma())
                    .with("g", g)
                    .with("g_star", gs)
                    .with("g_minus_g_star", g - gs)
                    .with("method", method)
                    .with("est_error", est),
            );
        }
    }
    emit(&a.out, &records)
}

fn write_field_file(path: &Path, field: &SphereField) -> CliResult<()> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    write_field(std::io::BufWriter::new(f), field).map_err(io_err(path))
}

fn cmd_solve(a: SolveArgs) -> CliResult<()> {
    let params = ShellParams::new(a.shell.radius_km, a.ld_km)?;
    let forcing = match (&a.input, a.preset) {
        (Some(path), _) => {
            if a.n_theta.is_some() || a.n_phi.is_some() {
                return Err(config("--n-theta/--n-phi apply to presets only"));
            }
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let field = parse_field(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
            let r = field.grid().radius_km();
            if (r - params.radius_km()).abs() > 1e-12 * params.radius_km() {
                return Err(config(format!(
                    "field radius {r} km differs from --radius-km {}",
                    params.radius_km()
                )));
            }
            field
        }
        (None, Some(preset)) => {
            let nt = a.n_theta.unwrap_or(a.l_max + 1);
            let np = a.n_phi.unwrap_or(2 * a.l_max + 2);
            let grid = Arc::new(SphereGrid::new(nt, np, params.radius_km())?);
            match preset {
                FieldPreset::Y20 => harmonic_field(&grid, 2, 0)?,
                FieldPreset::Bump => {
                    gaussian_bump(&grid, &bump_center(), 5.0 * params.gamma_star())?
                }
            }
        }
        (None, None) => unreachable!("clap requires a forcing"),
    };
    if let Some(path) = &a.write_forcing {
        write_field_file(path, &forcing)?;
    }

    let evaluator: Box<dyn KernelEvaluator> = match a.kernel {
        KernelArg::Split => Box::new(SplitEvaluator {
            policy: TruncationPolicy::auto(a.epsilon),
        }),
        KernelArg::Quadrature => Box::new(QuadratureEvaluator::default()),
    };
    let self_term = match a.self_term {
        SelfTermArg::Subtracted => SelfTerm::Subtracted,
        SelfTermArg::Disk => SelfTerm::DiskMean,
    };
    let spectral = match a.method {
        SolveMethod::Spectral | SolveMethod::Both => Some(solve_spectral(&forcing, &params, a.l_max)?),
        SolveMethod::Convolution => None,
    };
    let conv = match a.method {
        SolveMethod::Convolution | SolveMethod::Both => Some(solve_convolution_with(
            &forcing,
            &params,
            evaluator.as_ref(),
            self_term,
        )?),
        SolveMethod::Spectral => None,
    };
    let discrepancy = match (&spectral, &conv) {
        (Some(s), Some(c)) => Some(c.relative_l2_diff(s)),
        _ => None,
    };
    let result = spectral.as_ref().or(conv.as_ref()).expect("one solver ran");

    let summary = Record::new()
        .with("ld_km", params.rossby_km())
        .with("n_theta", result.grid().n_theta())
        .with("n_phi", result.grid().n_phi())
        .with("l_max", a.l_max)
        .with(
            "method",
            match a.method {
                SolveMethod::Spectral => "spectral",
                SolveMethod::Convolution => "convolution",
                SolveMethod::Both => "spectral+convolution",
            },
        )
        .with("rel_l2_discrepancy", discrepancy)
        .with("est_error", discrepancy)
        .with("psi_l2_norm", result.l2_norm());

    match &a.out.output {
        Some(path) => {
            write_field_file(path, result)?;
            write_records(std::io::stdout().lock(), &[summary], a.out.format)
                .map_err(|e| config(e.to_string()))?;
        }
        None => {
            write_field(std::io::stdout().lock(), result).map_err(|e| config(e.to_string()))?;
            write_records(std::io::stderr().lock(), &[summary], a.out.format)
                .map_err(|e| config(e.to_string()))?;
        }
    }
    Ok(())
}
