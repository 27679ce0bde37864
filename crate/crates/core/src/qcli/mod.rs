//! Command-line front end. [`run`] parses arguments, validates the run
//! configuration, executes one subcommand and returns the exit status:
//! 0 on success, 1 on verification failure, 2 on usage or configuration errors.

pub mod config;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{QError, Result};
use crate::numfmt::{sig17, Sig17};
use crate::probes;
use crate::qbessel::{eigencheck, modified_q_bessel};
use crate::qgrid::{GridFunction, GridMeta, QGrid};
use crate::qtransform::{calibrate_normalization, TransformPlan};
use crate::qwavelet::{cwt, cwt_many, plancherel_ratio_of, WaveletSpec};
use crate::suite;
use crate::uncertainty::{lower_constant_of, report_from, UncertaintyReport};

use config::{parse_list, sweep_cells, ConfigFile, Overrides, RunConfig, RUN_KEYS};

#[derive(Debug, Parser)]
#[command(name = "qwave", version, about = "q-Bessel Fourier and wavelet analysis on the geometric grid")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Flat key=value file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nlow: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nhigh: Option<i64>,
    /// Series truncation threshold (term over partial sum).
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub max_terms: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the grid as CSV `n,x`.
    Grid(Common),
    /// Evaluate the modified kernel as CSV `x,value,err_bound`.
    Bessel {
        #[command(flatten)]
        common: Common,
        /// Comma-separated arguments; defaults to every grid point.
        #[arg(long)]
        x: Option<String>,
        /// Report D j~(lambda x) / j~(lambda x) for lambda = q^(beta+m) instead.
        #[arg(long)]
        eigencheck: bool,
        /// Index m of lambda for --eigencheck.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        lambda: i64,
    },
    /// Transform a grid function, or calibrate the normalization.
    Fourier {
        #[command(flatten)]
        common: Common,
        /// Input CSV `n,value`; the grid comes from its `.json` sidecar.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Output CSV (sidecar written alongside); stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print {"c_qv", "residual"} from the default probe family.
        #[arg(long)]
        calibrate: bool,
    },
    /// Continuous wavelet transform as CSV `a,b,coeff`.
    Cwt {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
        /// Comma-separated scale exponents k (a = q^k); default: all that fit.
        #[arg(long, allow_hyphen_values = true)]
        scales: Option<String>,
        /// Comma-separated position indices n (b = q^n); default: the whole grid.
        #[arg(long, allow_hyphen_values = true)]
        positions: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wavelet Plancherel ratio over the probe family (or one input).
    Plancherel {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
    },
    /// Uncertainty ratios and their empirical lower constant.
    Uncertainty {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
        /// Lattice config; writes CSV `q,alpha,beta,K_emp`.
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite for one cell and print a JSON report.
    Verify(Common),
}

#[derive(Debug, Args, Clone, Default)]
pub struct Source {
    /// Input CSV `n,value` with `.json` sidecar.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Use probe number i of the default family instead.
    #[arg(long)]
    pub probe: Option<usize>,
    /// Mother wavelet: `pair` or `bump`.
    #[arg(long, default_value = "pair")]
    pub mother: String,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Verification(String),
}

impl From<QError> for Failure {
    fn from(e: QError) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult = std::result::Result<String, Failure>;

/// Runs one invocation. Output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let (code, text) = match dispatch(cli.command) {
        Ok(s) => (0, s),
        Err(Failure::Verification(s)) => (1, s),
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            return 2;
        }
    };
    if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
        return 2;
    }
    code
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    file.check_keys(&RUN_KEYS)?;
    RunConfig::resolve(
        &file,
        &Overrides {
            q: common.q,
            alpha: common.alpha,
            beta: common.beta,
            n_low: common.nlow,
            n_high: common.nhigh,
            rel_tol: common.rel_tol,
            max_terms: common.max_terms,
        },
    )
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Grid(c) => grid_cmd(&resolve(&c)?),
        Command::Bessel {
            common,
            x,
            eigencheck,
            lambda,
        } => bessel_cmd(&resolve(&common)?, x.as_deref(), eigencheck, lambda),
        Command::Fourier {
            common,
            input,
            out,
            calibrate,
        } => fourier_cmd(&common, input.as_deref(), out.as_deref(), calibrate),
        Command::Cwt {
            common,
            source,
            scales,
            positions,
            out,
        } => cwt_cmd(&common, &source, scales.as_deref(), positions.as_deref(), out.as_deref()),
        Command::Plancherel { common, source } => plancherel_cmd(&common, &source),
        Command::Uncertainty {
            common,
            source,
            sweep,
            out,
        } => match sweep {
            Some(p) => sweep_cmd(&common, &p, out.as_deref()),
            None => uncertainty_cmd(&common, &source, out.as_deref()),
        },
        Command::Verify(c) => verify_cmd(&resolve(&c)?),
    }
}

fn grid_cmd(cfg: &RunConfig) -> CliResult {
    let g = cfg.grid()?;
    let mut s = String::from("n,x\n");
    for n in g.indices() {
        let _ = writeln!(s, "{n},{}", sig17(g.point(n)));
    }
    Ok(s)
}

fn bessel_cmd(cfg: &RunConfig, xs: Option<&str>, eigen: bool, lambda: i64) -> CliResult {
    let v = cfg.params()?;
    let g = cfg.grid()?;
    if eigen {
        let mut s = String::from("x,ratio\n");
        for (n, r) in eigencheck(&g, &v, lambda)? {
            let _ = writeln!(s, "{},{}", sig17(g.point(n)), sig17(r));
        }
        return Ok(s);
    }
    let points = match xs {
        Some(t) => parse_list::<f64>(t, "--x")?,
        None => g.points(),
    };
    let mut s = String::from("x,value,err_bound\n");
    for x in points {
        let r = modified_q_bessel(&v, x, cfg.q, cfg.tol)?;
        let _ = writeln!(s, "{},{},{}", sig17(x), sig17(r.value), sig17(r.err_bound));
    }
    Ok(s)
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn read_function(path: &Path) -> Result<GridFunction> {
    let meta_path = sidecar_path(path);
    let text = std::fs::read_to_string(&meta_path)
        .map_err(|e| QError::Invalid(format!("cannot read sidecar {}: {e}", meta_path.display())))?;
    let meta: GridMeta =
        serde_json::from_str(&text).map_err(|e| QError::Invalid(format!("sidecar {}: {e}", meta_path.display())))?;
    let grid = meta.grid()?;
    let file = std::fs::File::open(path).map_err(|e| QError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    GridFunction::read_csv(&grid, file)
}

fn write_function(f: &GridFunction, path: Option<&Path>) -> Result<String> {
    let mut buf = Vec::new();
    f.write_csv(&mut buf)?;
    match path {
        None => Ok(String::from_utf8(buf).expect("ascii csv")),
        Some(p) => {
            let io = |e: std::io::Error| QError::Invalid(format!("cannot write {}: {e}", p.display()));
            std::fs::write(p, &buf).map_err(io)?;
            std::fs::write(sidecar_path(p), f.grid().meta().to_json()).map_err(io)?;
            Ok(String::new())
        }
    }
}

/// Input grid must agree with any explicitly requested grid parameters.
fn check_against_flags(common: &Common, g: &QGrid) -> Result<()> {
    let clash = |what: &str, a: String, b: String| QError::Invalid(format!("--{what} {a} conflicts with input grid value {b}"));
    if let Some(q) = common.q {
        if q != g.q() {
            return Err(clash("q", q.to_string(), g.q().to_string()));
        }
    }
    if let Some(n) = common.nlow {
        if n != g.n_low() {
            return Err(clash("nlow", n.to_string(), g.n_low().to_string()));
        }
    }
    if let Some(n) = common.nhigh {
        if n != g.n_high() {
            return Err(clash("nhigh", n.to_string(), g.n_high().to_string()));
        }
    }
    Ok(())
}

/// Run configuration, with the grid taken from `input` when given.
fn resolve_with_input(common: &Common, input: Option<&Path>) -> Result<(RunConfig, Option<GridFunction>)> {
    let mut cfg = resolve(common)?;
    let f = match input {
        Some(p) => {
            let f = read_function(p)?;
            check_against_flags(common, f.grid())?;
            cfg.q = f.grid().q();
            cfg.n_low = f.grid().n_low();
            cfg.n_high = f.grid().n_high();
            Some(f)
        }
        None => None,
    };
    Ok((cfg, f))
}

/// Plan on the configured grid, calibrated on the default probe family when
/// it fits, otherwise carrying the closed-form constant.
fn calibrated_plan(cfg: &RunConfig) -> Result<TransformPlan> {
    let g = cfg.grid()?;
    let base = TransformPlan::new(&g, cfg.params()?)?;
    match probes::standard_family(&base) {
        Ok(p) => {
            let c = calibrate_normalization(*base.v(), &g, &p)?;
            base.with_normalization(c.c_qv)
        }
        Err(_) => Ok(base),
    }
}

#[derive(Serialize)]
struct CalibrationOut {
    c_qv: Sig17,
    residual: Sig17,
}

fn fourier_cmd(common: &Common, input: Option<&Path>, out: Option<&Path>, calibrate: bool) -> CliResult {
    if calibrate {
        let cfg = resolve(common)?;
        let g = cfg.grid()?;
        let base = TransformPlan::new(&g, cfg.params()?)?;
        let c = calibrate_normalization(*base.v(), &g, &probes::standard_family(&base)?)?;
        let mut s = serde_json::to_string(&CalibrationOut {
            c_qv: Sig17(c.c_qv),
            residual: Sig17(c.residual),
        })
        .expect("serializes");
        s.push('\n');
        return Ok(s);
    }
    let input = input.ok_or_else(|| Failure::Usage("fourier needs --in <csv> or --calibrate".into()))?;
    let mut cfg = resolve(common)?;
    let f = read_function(input)?;
    check_against_flags(common, f.grid())?;
    cfg.q = f.grid().q();
    cfg.n_low = f.grid().n_low();
    cfg.n_high = f.grid().n_high();
    let plan = calibrated_plan(&cfg)?;
    let g = f.grid();
    let f = if g.shift() == 0.0 || g.shift() == plan.v().beta() {
        // reattach to the plan's own grid object for the given side
        let target = if g.shift() == 0.0 { plan.spatial() } else { plan.spectral() };
        GridFunction::new(target, f.into_values())?
    } else {
        return Err(Failure::Usage(format!(
            "input grid shift {} is neither 0 (spatial) nor beta = {} (spectral)",
            g.shift(),
            plan.v().beta()
        )));
    };
    Ok(write_function(&plan.transform(&f)?, out)?)
}

fn source_functions(plan: &TransformPlan, source: &Source, input: Option<GridFunction>) -> Result<Vec<GridFunction>> {
    if let Some(f) = input {
        return Ok(vec![GridFunction::new(plan.spatial(), f.into_values())?]);
    }
    let family = probes::standard_family(plan)?;
    match source.probe {
        Some(i) => family
            .get(i)
            .cloned()
            .map(|f| vec![f])
            .ok_or_else(|| QError::Invalid(format!("probe {i} out of range 0..{}", family.len()))),
        None => Ok(family),
    }
}

fn wavelet(plan: TransformPlan, mother: &str) -> Result<WaveletSpec> {
    let plan = Arc::new(plan);
    match mother {
        "pair" => WaveletSpec::pair(plan, 2, 3),
        "bump" => WaveletSpec::bump(plan, 4, 2),
        m => Err(QError::Invalid(format!("unknown mother wavelet {m:?} (pair, bump)"))),
    }
}

fn check_spatial(f: &Option<GridFunction>) -> Result<()> {
    match f {
        Some(f) if f.grid().shift() != 0.0 => Err(QError::GridMismatch("input must be a spatial function".into())),
        _ => Ok(()),
    }
}

fn cwt_cmd(common: &Common, source: &Source, scales: Option<&str>, positions: Option<&str>, out: Option<&Path>) -> CliResult {
    let (cfg, input) = resolve_with_input(common, source.input.as_deref())?;
    check_spatial(&input)?;
    let spec = wavelet(calibrated_plan(&cfg)?, &source.mother)?;
    let plan = spec.plan();
    let fs = source_functions(plan, source, input)?;
    if fs.len() != 1 {
        return Err(Failure::Usage("cwt needs --in <csv> or --probe <i>".into()));
    }
    let ks = match scales {
        Some(t) => parse_list::<i64>(t, "--scales")?,
        None => spec.scales(),
    };
    let bs = match positions {
        Some(t) => parse_list::<i64>(t, "--positions")?,
        None => plan.spatial().indices().collect(),
    };
    let s = cwt(&fs[0], &spec, &ks, &bs)?;
    let mut text = String::from("a,b,coeff\n");
    for i in 0..ks.len() {
        for j in 0..bs.len() {
            let _ = writeln!(text, "{},{},{}", sig17(s.scale_point(i)), sig17(s.position_point(j)), sig17(s.get(i, j)));
        }
    }
    emit(text, out)
}

fn emit(text: String, out: Option<&Path>) -> CliResult {
    match out {
        None => Ok(text),
        Some(p) => {
            std::fs::write(p, text).map_err(|e| QError::Invalid(format!("cannot write {}: {e}", p.display())))?;
            Ok(String::new())
        }
    }
}

#[derive(Serialize)]
struct PlancherelOut {
    ratio: Sig17,
    #[serde(rename = "C_v_psi")]
    c_v_psi: Sig17,
    #[serde(rename = "ratio_over_C")]
    ratio_over_c: Sig17,
    probes: usize,
    #[serde(rename = "q4v2_C_v_psi")]
    q4v2: Sig17,
    spread: Sig17,
}

fn plancherel_cmd(common: &Common, source: &Source) -> CliResult {
    let (cfg, input) = resolve_with_input(common, source.input.as_deref())?;
    check_spatial(&input)?;
    let spec = wavelet(calibrated_plan(&cfg)?, &source.mother)?;
    let plan = spec.plan();
    let fs = source_functions(plan, source, input)?;
    let pos: Vec<i64> = plan.spatial().indices().collect();
    let ss = cwt_many(&fs, &spec, &spec.scales(), &pos)?;
    let ratios = fs
        .iter()
        .zip(&ss)
        .map(|(f, s)| plancherel_ratio_of(s, f, plan))
        .collect::<Result<Vec<_>>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let c = spec.admissibility();
    let o = PlancherelOut {
        ratio: Sig17(mean),
        c_v_psi: Sig17(c),
        ratio_over_c: Sig17(mean / c),
        probes: ratios.len(),
        q4v2: Sig17(cfg.q.powf(4.0 * (cfg.alpha + cfg.beta) + 2.0) * c),
        spread: Sig17(hi / lo - 1.0),
    };
    Ok(serde_json::to_string(&o).expect("serializes") + "\n")
}

#[derive(Serialize)]
struct ProbeOut {
    #[serde(rename = "I_R")]
    i_r: Sig17,
    #[serde(rename = "I_S")]
    i_s: Sig17,
    norm_sq: Sig17,
    ratio: Sig17,
}

#[derive(Serialize)]
struct SummaryOut {
    #[serde(rename = "K_emp")]
    k_emp: Sig17,
    probes: usize,
    q: Sig17,
    alpha: Sig17,
    beta: Sig17,
}

/// Reports for the uncertainty family (or the given functions) on one cell.
fn uncertainty_reports(cfg: &RunConfig, source: &Source, input: Option<GridFunction>) -> Result<Vec<UncertaintyReport>> {
    let spec = wavelet(calibrated_plan(cfg)?, &source.mother)?;
    let plan = spec.plan();
    let fs = if input.is_some() || source.probe.is_some() {
        source_functions(plan, source, input)?
    } else {
        probes::uncertainty_family(plan)?
    };
    let pos: Vec<i64> = plan.spatial().indices().collect();
    let ss = cwt_many(&fs, &spec, &spec.scales(), &pos)?;
    fs.iter().zip(&ss).map(|(f, s)| report_from(f, s, plan)).collect()
}

fn uncertainty_cmd(common: &Common, source: &Source, out: Option<&Path>) -> CliResult {
    let (cfg, input) = resolve_with_input(common, source.input.as_deref())?;
    check_spatial(&input)?;
    let reports = uncertainty_reports(&cfg, source, input)?;
    let mut text = String::new();
    for r in &reports {
        let p = ProbeOut {
            i_r: Sig17(r.i_r),
            i_s: Sig17(r.i_s),
            norm_sq: Sig17(r.norm_sq),
            ratio: Sig17(r.ratio),
        };
        text.push_str(&serde_json::to_string(&p).expect("serializes"));
        text.push('\n');
    }
    let summary = SummaryOut {
        k_emp: Sig17(lower_constant_of(&reports)?),
        probes: reports.len(),
        q: Sig17(cfg.q),
        alpha: Sig17(cfg.alpha),
        beta: Sig17(cfg.beta),
    };
    text.push_str(&serde_json::to_string(&summary).expect("serializes"));
    text.push('\n');
    emit(text, out)
}

fn sweep_cmd(common: &Common, path: &Path, out: Option<&Path>) -> CliResult {
    let file = ConfigFile::load(path)?;
    let cells = sweep_cells(&file)?;
    let base = resolve(common)?;
    let n_low = common.nlow.or(file.parsed("n_low")?).unwrap_or(base.n_low);
    let n_high = common.nhigh.or(file.parsed("n_high")?).unwrap_or(base.n_high);
    let mut text = String::from("q,alpha,beta,K_emp\n");
    for (q, alpha, beta) in cells {
        let cfg = RunConfig {
            q,
            alpha,
            beta,
            n_low,
            n_high,
            ..base.clone()
        };
        let reports = uncertainty_reports(&cfg, &Source::default_pair(), None)?;
        let k = lower_constant_of(&reports)?;
        let _ = writeln!(text, "{},{},{},{}", sig17(q), sig17(alpha), sig17(beta), sig17(k));
    }
    emit(text, out)
}

impl Source {
    fn default_pair() -> Self {
        Source {
            mother: "pair".into(),
            ..Default::default()
        }
    }
}

fn verify_cmd(cfg: &RunConfig) -> CliResult {
    let report = suite::run_cell(cfg.q, cfg.alpha, cfg.beta, &cfg.grid()?)?;
    let text = report.to_json();
    if report.pass {
        Ok(text)
    } else {
        Err(Failure::Verification(text))
    }
}
