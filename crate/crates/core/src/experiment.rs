//! Versioned experiment configs and the batch runner.
//!
//! A config names a model, a step distribution, a basepoint, the walk length
//! `n`, the number of sample paths and a seed, plus one experiment with its
//! parameters. [`run`] produces a [`Report`] whose JSON form is a pure
//! function of the config (the `timing` object aside) and a [`Series`] for
//! CSV export.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::audit::{HypothesesAudit, RankOneAudit, Verdict};
use crate::boundary::{boundary_metric, tits_ball_is_trivial, tits_distance, TitsValue};
use crate::error::{usage, LabError, Result};
use crate::geometry::{distance, BoundaryPoint, Ideal, ModelSpace, Point, ProductIdeal, Tolerance};
use crate::isometry::{north_south_constant, NORTH_SOUTH_CAP};
use crate::sampling::{boundary_direction, random_isometry, random_point};
use crate::stats::{
    cocycle_residual, convergence_profile, dirac_path, drift_estimate, hitting_measure, horofunction_gap,
    pi_convergence_check, regular_checkpoints, stationarity_defect, theil_sen, tracking_error, transient_cocycle_sums,
    BinScheme, DriftReport, HittingHistogram, PiConvergence, TheilSen,
};
use crate::walk::{path_rng, sample_path, StepDistribution, WalkTrace};

pub const CONFIG_SCHEMA: &str = "cat0lab.config/1";
pub const REPORT_SCHEMA: &str = "cat0lab.report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Drift,
    Converge,
    Hitting,
    Stationarity,
    Dirac,
    Gap,
    Cocycle,
    Track,
    Northsouth,
    PiConvergence,
    TitsTable,
    RankoneAudit,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 12] = [
        ExperimentKind::Drift,
        ExperimentKind::Converge,
        ExperimentKind::Hitting,
        ExperimentKind::Stationarity,
        ExperimentKind::Dirac,
        ExperimentKind::Gap,
        ExperimentKind::Cocycle,
        ExperimentKind::Track,
        ExperimentKind::Northsouth,
        ExperimentKind::PiConvergence,
        ExperimentKind::TitsTable,
        ExperimentKind::RankoneAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Drift => "drift",
            ExperimentKind::Converge => "converge",
            ExperimentKind::Hitting => "hitting",
            ExperimentKind::Stationarity => "stationarity",
            ExperimentKind::Dirac => "dirac",
            ExperimentKind::Gap => "gap",
            ExperimentKind::Cocycle => "cocycle",
            ExperimentKind::Track => "track",
            ExperimentKind::Northsouth => "northsouth",
            ExperimentKind::PiConvergence => "pi-convergence",
            ExperimentKind::TitsTable => "tits-table",
            ExperimentKind::RankoneAudit => "rankone-audit",
        }
    }

    /// Experiments that sample the walk and so need an admissible
    /// distribution unless the caller overrides.
    pub fn samples_walk(self) -> bool {
        matches!(
            self,
            ExperimentKind::Drift
                | ExperimentKind::Converge
                | ExperimentKind::Hitting
                | ExperimentKind::Stationarity
                | ExperimentKind::Dirac
                | ExperimentKind::Gap
                | ExperimentKind::Track
        )
    }
}

/// Steps at which series are recorded: an explicit list or every `every` steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Checkpoints {
    List(Vec<u64>),
    Every { every: u64 },
}

impl Default for Checkpoints {
    fn default() -> Self {
        Checkpoints::Every { every: 10 }
    }
}

impl Checkpoints {
    pub fn resolve(&self, n: u64) -> Vec<u64> {
        match self {
            Checkpoints::List(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
            Checkpoints::Every { every } => regular_checkpoints(n, *every),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftParams {
    /// Boundary point for the horofunction estimate of the drift.
    pub xi: Option<BoundaryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeParams {
    /// First checkpoint of the judged tail; `n/2` when absent.
    pub tail_from: Option<u64>,
    pub threshold: f64,
}

impl Default for ConvergeParams {
    fn default() -> Self {
        Self { tail_from: None, threshold: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HittingParams {
    pub bins: Option<BinScheme>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationarityParams {
    pub bins: Option<BinScheme>,
    pub refinement_samples: usize,
}

impl Default for StationarityParams {
    fn default() -> Self {
        Self { bins: None, refinement_samples: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiracParams {
    pub atoms_a: Option<Vec<BoundaryPoint>>,
    pub atoms_b: Option<Vec<BoundaryPoint>>,
    /// Size of each generated set when the sets are not given.
    pub count: usize,
    pub threshold: f64,
}

impl Default for DiracParams {
    fn default() -> Self {
        Self { atoms_a: None, atoms_b: None, count: 10, threshold: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapParams {
    pub xi: Option<BoundaryPoint>,
    /// First step of the trend window; `n/10` when absent.
    pub trend_from: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CocycleParams {
    pub xi: Option<BoundaryPoint>,
    pub random_samples: usize,
}

impl Default for CocycleParams {
    fn default() -> Self {
        Self { xi: None, random_samples: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackParams {
    /// Ray speed; the empirical drift of the sampled paths when absent.
    pub lambda: Option<f64>,
    pub threshold: f64,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self { lambda: None, threshold: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NorthSouthParams {
    /// Atom to iterate; the first rank one atom when absent.
    pub atom: Option<usize>,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub samples: usize,
    pub powers: Vec<u32>,
}

impl Default for NorthSouthParams {
    fn default() -> Self {
        Self { atom: None, eps_plus: 0.01, eps_minus: 0.1, samples: 200, powers: vec![1, 2] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PiConvergenceParams {
    pub atom: Option<usize>,
    /// Number of powers `g¹ … g^L`; `n` when absent.
    pub length: Option<usize>,
    pub k_points: usize,
    pub eps: f64,
    /// Adds the repelling point to `K`, which must be rejected.
    pub include_eta: bool,
}

impl Default for PiConvergenceParams {
    fn default() -> Self {
        Self { atom: None, length: None, k_points: 50, eps: 0.01, include_eta: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TitsTableParams {
    pub grid: usize,
}

impl Default for TitsTableParams {
    fn default() -> Self {
        Self { grid: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Drift(DriftParams),
    Converge(ConvergeParams),
    Hitting(HittingParams),
    Stationarity(StationarityParams),
    Dirac(DiracParams),
    Gap(GapParams),
    Cocycle(CocycleParams),
    Track(TrackParams),
    Northsouth(NorthSouthParams),
    PiConvergence(PiConvergenceParams),
    TitsTable(TitsTableParams),
    RankoneAudit,
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::Drift(_) => ExperimentKind::Drift,
            Experiment::Converge(_) => ExperimentKind::Converge,
            Experiment::Hitting(_) => ExperimentKind::Hitting,
            Experiment::Stationarity(_) => ExperimentKind::Stationarity,
            Experiment::Dirac(_) => ExperimentKind::Dirac,
            Experiment::Gap(_) => ExperimentKind::Gap,
            Experiment::Cocycle(_) => ExperimentKind::Cocycle,
            Experiment::Track(_) => ExperimentKind::Track,
            Experiment::Northsouth(_) => ExperimentKind::Northsouth,
            Experiment::PiConvergence(_) => ExperimentKind::PiConvergence,
            Experiment::TitsTable(_) => ExperimentKind::TitsTable,
            Experiment::RankoneAudit => ExperimentKind::RankoneAudit,
        }
    }

    /// Default parameters for `kind`.
    pub fn default_for(kind: ExperimentKind) -> Experiment {
        Experiment::from_params(kind, Value::Null).expect("defaults parse")
    }

    fn from_params(kind: ExperimentKind, params: Value) -> std::result::Result<Experiment, serde_json::Error> {
        let params = if params.is_null() { Value::Object(Default::default()) } else { params };
        Ok(match kind {
            ExperimentKind::Drift => Experiment::Drift(serde_json::from_value(params)?),
            ExperimentKind::Converge => Experiment::Converge(serde_json::from_value(params)?),
            ExperimentKind::Hitting => Experiment::Hitting(serde_json::from_value(params)?),
            ExperimentKind::Stationarity => Experiment::Stationarity(serde_json::from_value(params)?),
            ExperimentKind::Dirac => Experiment::Dirac(serde_json::from_value(params)?),
            ExperimentKind::Gap => Experiment::Gap(serde_json::from_value(params)?),
            ExperimentKind::Cocycle => Experiment::Cocycle(serde_json::from_value(params)?),
            ExperimentKind::Track => Experiment::Track(serde_json::from_value(params)?),
            ExperimentKind::Northsouth => Experiment::Northsouth(serde_json::from_value(params)?),
            ExperimentKind::PiConvergence => Experiment::PiConvergence(serde_json::from_value(params)?),
            ExperimentKind::TitsTable => Experiment::TitsTable(serde_json::from_value(params)?),
            ExperimentKind::RankoneAudit => {
                let NoParams {} = serde_json::from_value(params)?;
                Experiment::RankoneAudit
            }
        })
    }

    fn params(&self) -> Value {
        let v = match self {
            Experiment::Drift(p) => serde_json::to_value(p),
            Experiment::Converge(p) => serde_json::to_value(p),
            Experiment::Hitting(p) => serde_json::to_value(p),
            Experiment::Stationarity(p) => serde_json::to_value(p),
            Experiment::Dirac(p) => serde_json::to_value(p),
            Experiment::Gap(p) => serde_json::to_value(p),
            Experiment::Cocycle(p) => serde_json::to_value(p),
            Experiment::Track(p) => serde_json::to_value(p),
            Experiment::Northsouth(p) => serde_json::to_value(p),
            Experiment::PiConvergence(p) => serde_json::to_value(p),
            Experiment::TitsTable(p) => serde_json::to_value(p),
            Experiment::RankoneAudit => serde_json::to_value(NoParams {}),
        };
        v.expect("params serialise")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRepr {
    schema: String,
    model: ModelSpace,
    distribution: StepDistribution,
    #[serde(default)]
    basepoint: Option<Point>,
    n: u64,
    m_samples: usize,
    seed: u64,
    #[serde(default)]
    checkpoints: Option<Checkpoints>,
    #[serde(default)]
    tolerance: Option<Tolerance>,
    experiment: ExperimentKind,
    #[serde(default)]
    params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr", into = "ConfigRepr")]
pub struct ExperimentConfig {
    pub model: ModelSpace,
    pub distribution: StepDistribution,
    pub basepoint: Point,
    pub n: u64,
    pub m_samples: usize,
    pub seed: u64,
    pub checkpoints: Checkpoints,
    pub tolerance: Tolerance,
    pub experiment: Experiment,
}

impl TryFrom<ConfigRepr> for ExperimentConfig {
    type Error = LabError;

    fn try_from(r: ConfigRepr) -> Result<Self> {
        if r.schema != CONFIG_SCHEMA {
            return Err(LabError::Config(format!("unsupported schema {:?}, expected {CONFIG_SCHEMA:?}", r.schema)));
        }
        let experiment = Experiment::from_params(r.experiment, r.params)
            .map_err(|e| LabError::Config(format!("params for {}: {e}", r.experiment.name())))?;
        let config = ExperimentConfig {
            model: r.model,
            basepoint: r.basepoint.unwrap_or_else(|| Point::origin(r.model)),
            distribution: r.distribution,
            n: r.n,
            m_samples: r.m_samples,
            seed: r.seed,
            checkpoints: r.checkpoints.unwrap_or_default(),
            tolerance: r.tolerance.unwrap_or_default(),
            experiment,
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<ExperimentConfig> for ConfigRepr {
    fn from(c: ExperimentConfig) -> Self {
        ConfigRepr {
            schema: CONFIG_SCHEMA.to_string(),
            model: c.model,
            distribution: c.distribution,
            basepoint: Some(c.basepoint),
            n: c.n,
            m_samples: c.m_samples,
            seed: c.seed,
            checkpoints: Some(c.checkpoints),
            tolerance: Some(c.tolerance),
            experiment: c.experiment.kind(),
            params: c.experiment.params(),
        }
    }
}

fn config_error(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

impl ExperimentConfig {
    /// Config with default checkpoints, tolerance and parameters.
    pub fn new(distribution: StepDistribution, n: u64, m_samples: usize, seed: u64, experiment: Experiment) -> Self {
        let model = distribution.model();
        ExperimentConfig {
            model,
            basepoint: Point::origin(model),
            distribution,
            n,
            m_samples,
            seed,
            checkpoints: Checkpoints::default(),
            tolerance: Tolerance::default(),
            experiment,
        }
    }

    /// Parses and validates a JSON config. Every failure is a
    /// [`LabError::Config`].
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| match e.is_data() {
            true => {
                let msg = e.to_string();
                config_error(msg.strip_prefix("config error: ").unwrap_or(&msg).to_string())
            }
            false => config_error(e.to_string()),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind()
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.model;
        if self.distribution.model() != model {
            return Err(config_error(format!(
                "distribution is on {}, config model is {model}",
                self.distribution.model()
            )));
        }
        if self.basepoint.model() != model {
            return Err(config_error(format!("basepoint is on {}, config model is {model}", self.basepoint.model())));
        }
        if self.n == 0 || self.m_samples == 0 {
            return Err(config_error("n and m_samples must be positive"));
        }
        if !(self.tolerance.0 > 0.0 && self.tolerance.0.is_finite()) {
            return Err(config_error("tolerance must be positive"));
        }
        let cps = self.checkpoints.resolve(self.n);
        if cps.is_empty() || cps[0] == 0 || *cps.last().expect("nonempty") > self.n {
            return Err(config_error(format!("checkpoints must be nonempty and lie in 1..={}", self.n)));
        }
        let atoms = self.distribution.atoms().len();
        let check_point = |b: &BoundaryPoint, what: &str| -> Result<()> {
            if b.model() != model {
                return Err(config_error(format!("{what} is on {}, config model is {model}", b.model())));
            }
            Ok(())
        };
        let check_atom = |a: Option<usize>| -> Result<()> {
            match a {
                Some(i) if i >= atoms => Err(config_error(format!("atom {i} out of range (distribution has {atoms})"))),
                _ => Ok(()),
            }
        };
        let check_bins = |b: &Option<BinScheme>| -> Result<()> {
            match b {
                Some(b) => b.check(model).map_err(|e| config_error(e.to_string())),
                None => Ok(()),
            }
        };
        match &self.experiment {
            Experiment::Drift(p) => {
                if let Some(xi) = &p.xi {
                    check_point(xi, "xi")?;
                }
            }
            Experiment::Converge(p) => positive(p.threshold, "threshold")?,
            Experiment::Hitting(p) => check_bins(&p.bins)?,
            Experiment::Stationarity(p) => {
                check_bins(&p.bins)?;
                if p.refinement_samples == 0 {
                    return Err(config_error("refinement_samples must be positive"));
                }
            }
            Experiment::Dirac(p) => {
                positive(p.threshold, "threshold")?;
                for set in [&p.atoms_a, &p.atoms_b].into_iter().flatten() {
                    if set.len() < 2 {
                        return Err(config_error("initial sets need at least two points"));
                    }
                    for b in set {
                        check_point(b, "initial atom")?;
                    }
                }
                if (p.atoms_a.is_none() || p.atoms_b.is_none()) && p.count < 2 {
                    return Err(config_error("count must be at least 2"));
                }
            }
            Experiment::Gap(p) => match &p.xi {
                Some(xi) => check_point(xi, "xi")?,
                None => return Err(config_error("gap needs a boundary point xi")),
            },
            Experiment::Cocycle(p) => {
                if let Some(xi) = &p.xi {
                    check_point(xi, "xi")?;
                }
            }
            Experiment::Track(p) => {
                positive(p.threshold, "threshold")?;
                if let Some(l) = p.lambda {
                    positive(l, "lambda")?;
                }
            }
            Experiment::Northsouth(p) => {
                check_atom(p.atom)?;
                positive(p.eps_plus, "eps_plus")?;
                positive(p.eps_minus, "eps_minus")?;
                if p.samples == 0 || p.powers.is_empty() || p.powers.contains(&0) {
                    return Err(config_error("northsouth needs samples > 0 and positive powers"));
                }
            }
            Experiment::PiConvergence(p) => {
                check_atom(p.atom)?;
                positive(p.eps, "eps")?;
                if p.length == Some(0) {
                    return Err(config_error("length must be positive"));
                }
            }
            Experiment::TitsTable(p) => {
                if p.grid < 2 {
                    return Err(config_error("grid must be at least 2"));
                }
            }
            Experiment::RankoneAudit => {}
        }
        Ok(())
    }
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("{what} must be positive, got {v}")))
    }
}

/// Rows for CSV export.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Series {
    fn new(header: &[&str]) -> Self {
        Series { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub experiment: ExperimentKind,
    pub version: String,
    pub config: ExperimentConfig,
    pub hypotheses: HypothesesAudit,
    pub hypotheses_hold: bool,
    pub warnings: Vec<String>,
    pub result: Value,
    /// Wall clock and worker count; the only part of a report that varies
    /// between reruns.
    pub timing: Timing,
    #[serde(skip)]
    pub series: Option<Series>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// The report without its `timing` object.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serialises");
        v.as_object_mut().expect("object").remove("timing");
        serde_json::to_string_pretty(&v).expect("value serialises")
    }

    /// `<outdir>/<experiment>-<seed>/`.
    pub fn artifact_dir(&self, outdir: &Path) -> PathBuf {
        outdir.join(format!("{}-{}", self.experiment.name(), self.config.seed))
    }

    /// Writes `report.json` and, when present, `series.csv`. Returns the
    /// artifact directory.
    pub fn write_artifacts(&self, outdir: &Path) -> Result<PathBuf> {
        let dir = self.artifact_dir(outdir);
        let io = |e: std::io::Error| LabError::Io(format!("{}: {e}", dir.display()));
        fs::create_dir_all(&dir).map_err(io)?;
        fs::write(dir.join("report.json"), self.to_json()).map_err(io)?;
        if let Some(series) = &self.series {
            fs::write(dir.join("series.csv"), series.to_csv()).map_err(io)?;
        }
        Ok(dir)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; rayon's default when `None`.
    pub threads: Option<usize>,
    pub allow_uncertified: bool,
}

/// Runs one experiment on a dedicated thread pool.
pub fn run(config: &ExperimentConfig, options: RunOptions) -> Result<Report> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = options.threads {
        if t == 0 {
            return Err(usage("thread count must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| usage(format!("cannot build thread pool: {e}")))?;
    let start = Instant::now();
    let (mut report, threads) =
        pool.install(|| run_in_pool(config, options.allow_uncertified).map(|r| (r, rayon::current_num_threads())))?;
    report.timing = Timing { wall_clock_seconds: start.elapsed().as_secs_f64(), threads };
    Ok(report)
}

fn run_in_pool(config: &ExperimentConfig, allow_uncertified: bool) -> Result<Report> {
    let tol = config.tolerance;
    let spec = &config.distribution;
    let hypotheses = HypothesesAudit::run(spec, tol)?;
    let kind = config.kind();
    if kind.samples_walk() && !hypotheses.admissibility.certified && !allow_uncertified {
        return Err(LabError::Refused(format!(
            "{}: the support does not certifiably generate a group at depth {}; rerun with --allow-uncertified",
            kind.name(),
            hypotheses.admissibility.depth
        )));
    }
    let mut warnings = Vec::new();
    if !hypotheses.admissibility.certified {
        warnings.push("admissibility not certified".to_string());
    }
    match hypotheses.rank_one.verdict {
        Verdict::CertifiedNonElementary => {}
        Verdict::Indeterminate => warnings.push("non-elementarity indeterminate".to_string()),
        Verdict::HypothesesViolated => warnings.push("hypotheses violated: no rank one atom".to_string()),
    }
    let hypotheses_hold = hypotheses.hypotheses_hold();
    let ctx = Ctx { config, tol, hypotheses_hold, audit: &hypotheses.rank_one };
    let (result, series) = match &config.experiment {
        Experiment::Drift(p) => ctx.drift(p)?,
        Experiment::Converge(p) => ctx.converge(p)?,
        Experiment::Hitting(p) => ctx.hitting(p)?,
        Experiment::Stationarity(p) => ctx.stationarity(p)?,
        Experiment::Dirac(p) => ctx.dirac(p)?,
        Experiment::Gap(p) => ctx.gap(p)?,
        Experiment::Cocycle(p) => ctx.cocycle(p)?,
        Experiment::Track(p) => ctx.track(p)?,
        Experiment::Northsouth(p) => ctx.northsouth(p)?,
        Experiment::PiConvergence(p) => ctx.pi_convergence(p)?,
        Experiment::TitsTable(p) => ctx.tits_table(p)?,
        Experiment::RankoneAudit => ctx.rankone_audit()?,
    };
    Ok(Report {
        schema: REPORT_SCHEMA.to_string(),
        experiment: kind,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        hypotheses,
        hypotheses_hold,
        warnings,
        result,
        timing: Timing { wall_clock_seconds: 0.0, threads: 0 },
        series: Some(series),
    })
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    tol: Tolerance,
    hypotheses_hold: bool,
    audit: &'a RankOneAudit,
}

type Outcome = Result<(Value, Series)>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serialises")
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Per-checkpoint median and maximum of `values[path][checkpoint]` over the
/// paths that recorded that checkpoint.
fn summarise(checkpoints: &[u64], per_path: &[Vec<(u64, f64)>]) -> Vec<(u64, f64, f64)> {
    checkpoints
        .iter()
        .map(|&c| {
            let vals: Vec<f64> =
                per_path.iter().filter_map(|p| p.binary_search_by_key(&c, |e| e.0).ok().map(|i| p[i].1)).collect();
            let max = vals.iter().copied().fold(f64::NAN, f64::max);
            (c, median(vals), max)
        })
        .collect()
}

#[derive(Serialize)]
struct ConvergeResult {
    tail_from: u64,
    threshold: f64,
    /// `cauchy_tail` at the first checkpoint `≥ tail_from`, per path.
    final_tail: Vec<Option<f64>>,
    settled: usize,
    fraction_settled: f64,
}

#[derive(Serialize)]
struct StationarityResult {
    histogram: HittingHistogram,
    defect: f64,
}

#[derive(Serialize)]
struct DiracResult {
    atoms_a: Vec<BoundaryPoint>,
    atoms_b: Vec<BoundaryPoint>,
    threshold: f64,
    hypotheses_warning: bool,
    final_spread_a: Vec<f64>,
    final_spread_b: Vec<f64>,
    final_cross_spread: Vec<f64>,
    /// Paths whose two spreads and cross spread all end below the threshold.
    concentrated: usize,
    fraction_concentrated: f64,
}

#[derive(Serialize)]
struct GapResult {
    xi: BoundaryPoint,
    trend_from: u64,
    sup_gap: Vec<f64>,
    trend: Vec<Option<TheilSen>>,
    not_increasing: usize,
    fraction_not_increasing: f64,
}

#[derive(Serialize)]
struct CocycleResult {
    xi: BoundaryPoint,
    random_samples: usize,
    random_max_residual: f64,
    /// Largest `|Σ h_{Z_{k-1}⁻¹ξ}(ω_k x) − h_ξ(Z_k x)|` over stored steps, per path.
    path_max_residual: Vec<f64>,
}

#[derive(Serialize)]
struct TrackResult {
    lambda: f64,
    lambda_estimated: bool,
    threshold: f64,
    final_error: Vec<Option<f64>>,
    trend: Vec<Option<TheilSen>>,
    within: usize,
    fraction_within: f64,
}

#[derive(Serialize)]
struct NorthSouthRow {
    power: u32,
    k0: u64,
    overflow: bool,
}

#[derive(Serialize)]
struct NorthSouthResult {
    atom: usize,
    rows: Vec<NorthSouthRow>,
    /// `k₀` does not grow along the listed powers.
    nonincreasing: bool,
}

#[derive(Serialize)]
struct PiResult {
    atom: usize,
    length: usize,
    k_points: usize,
    eps: f64,
    check: PiConvergence,
}

#[derive(Serialize)]
struct TitsTableResult {
    points: Vec<BoundaryPoint>,
    table: Vec<Vec<TitsValue>>,
    tits_ball_trivial: bool,
}

impl Ctx<'_> {
    fn x(&self) -> &Point {
        &self.config.basepoint
    }

    fn spec(&self) -> &StepDistribution {
        &self.config.distribution
    }

    fn checkpoints(&self) -> Vec<u64> {
        self.config.checkpoints.resolve(self.config.n)
    }

    /// One trace per path, storing positions at a stride that hits every checkpoint.
    fn traces(&self) -> Result<Vec<WalkTrace>> {
        let c = self.config;
        let stride = self.checkpoints().iter().fold(0, |g, &k| gcd(g, k)).max(1);
        (0..c.m_samples as u64)
            .into_par_iter()
            .map(|path| sample_path(&c.distribution, &c.basepoint, c.n, c.seed, path, stride))
            .collect()
    }

    fn rank_one_atom(&self, atom: Option<usize>) -> Result<usize> {
        match atom {
            Some(i) => Ok(i),
            None => self
                .audit
                .atoms
                .iter()
                .find(|a| a.rank_one)
                .map(|a| a.index)
                .ok_or_else(|| LabError::Domain("the distribution has no rank one atom".to_string())),
        }
    }

    fn drift(&self, p: &DriftParams) -> Outcome {
        let c = self.config;
        let r: DriftReport =
            drift_estimate(self.spec(), self.x(), c.n, c.m_samples, c.seed, p.xi.as_ref(), true, self.tol)?;
        let mut s = Series::new(&["path", "terminal_speed"]);
        for (i, v) in r.per_sample_terminal.iter().enumerate() {
            s.push(vec![i.to_string(), fmt(*v)]);
        }
        Ok((to_value(&r), s))
    }

    fn converge(&self, p: &ConvergeParams) -> Outcome {
        let cps = self.checkpoints();
        let tail_from = p.tail_from.unwrap_or(self.config.n / 2);
        let profiles =
            self.traces()?.into_par_iter().map(|t| convergence_profile(&t, &cps)).collect::<Result<Vec<_>>>()?;
        let final_tail: Vec<Option<f64>> = profiles.iter().map(|pr| pr.tail_after(tail_from)).collect();
        let settled = final_tail.iter().filter(|t| t.is_some_and(|v| v <= p.threshold)).count();
        let per_path: Vec<Vec<(u64, f64)>> = profiles
            .iter()
            .map(|pr| pr.checkpoints.iter().copied().zip(pr.cauchy_tail.iter().copied()).collect())
            .collect();
        let mut s = Series::new(&["step", "median_cauchy_tail", "max_cauchy_tail"]);
        for (c, med, max) in summarise(&cps, &per_path) {
            s.push(vec![c.to_string(), fmt(med), fmt(max)]);
        }
        let r = ConvergeResult {
            tail_from,
            threshold: p.threshold,
            fraction_settled: settled as f64 / final_tail.len() as f64,
            final_tail,
            settled,
        };
        Ok((to_value(&r), s))
    }

    fn histogram(&self, bins: Option<BinScheme>) -> Result<HittingHistogram> {
        let c = self.config;
        let bins = bins.unwrap_or_else(|| BinScheme::default_for(c.model));
        hitting_measure(self.spec(), self.x(), c.n, c.m_samples, bins, c.seed, true, self.tol)
    }

    fn histogram_series(h: &HittingHistogram) -> Series {
        let mut s = Series::new(&["bin", "label", "mass", "std_error"]);
        for i in 0..h.masses.len() {
            s.push(vec![i.to_string(), h.labels[i].clone(), fmt(h.masses[i]), fmt(h.std_error(i))]);
        }
        s
    }

    fn hitting(&self, p: &HittingParams) -> Outcome {
        let h = self.histogram(p.bins)?;
        let s = Self::histogram_series(&h);
        Ok((to_value(&h), s))
    }

    fn stationarity(&self, p: &StationarityParams) -> Outcome {
        let histogram = self.histogram(p.bins)?;
        let defect = stationarity_defect(self.spec(), &histogram, p.refinement_samples, self.config.seed)?;
        let s = Self::histogram_series(&histogram);
        Ok((to_value(&StationarityResult { histogram, defect }), s))
    }

    fn dirac(&self, p: &DiracParams) -> Outcome {
        let c = self.config;
        let (gen_a, gen_b) = default_atom_sets(c.model, p.count, c.seed);
        let atoms_a = p.atoms_a.clone().unwrap_or(gen_a);
        let atoms_b = p.atoms_b.clone().unwrap_or(gen_b);
        let cps = self.checkpoints();
        let warning = !self.hypotheses_hold;
        let reports = (0..c.m_samples as u64)
            .into_par_iter()
            .map(|path| dirac_path(self.spec(), self.x(), &atoms_a, &atoms_b, c.n, c.seed, path, &cps, warning))
            .collect::<Result<Vec<_>>>()?;
        let last = |v: &Vec<f64>| *v.last().expect("checkpoints nonempty");
        let final_a: Vec<f64> = reports.iter().map(|r| last(&r.spread_a)).collect();
        let final_b: Vec<f64> = reports.iter().map(|r| last(&r.spread_b)).collect();
        let final_x: Vec<f64> = reports.iter().map(|r| last(&r.cross_spread)).collect();
        let concentrated = (0..reports.len())
            .filter(|&i| final_a[i] <= p.threshold && final_b[i] <= p.threshold && final_x[i] <= p.threshold)
            .count();
        let mut s =
            Series::new(&["step", "median_spread_a", "median_spread_b", "median_cross_spread", "max_cross_spread"]);
        for (k, &cp) in cps.iter().enumerate() {
            let col = |f: &dyn Fn(&crate::stats::DiracReport) -> f64| median(reports.iter().map(f).collect());
            let max_x = reports.iter().map(|r| r.cross_spread[k]).fold(f64::NAN, f64::max);
            s.push(vec![
                cp.to_string(),
                fmt(col(&|r| r.spread_a[k])),
                fmt(col(&|r| r.spread_b[k])),
                fmt(col(&|r| r.cross_spread[k])),
                fmt(max_x),
            ]);
        }
        let r = DiracResult {
            atoms_a,
            atoms_b,
            threshold: p.threshold,
            hypotheses_warning: warning,
            fraction_concentrated: concentrated as f64 / reports.len() as f64,
            final_spread_a: final_a,
            final_spread_b: final_b,
            final_cross_spread: final_x,
            concentrated,
        };
        Ok((to_value(&r), s))
    }

    fn gap(&self, p: &GapParams) -> Outcome {
        let xi = p.xi.clone().expect("validated");
        let trend_from = p.trend_from.unwrap_or(self.config.n / 10);
        let series = self.traces()?.into_par_iter().map(|t| horofunction_gap(&t, &xi)).collect::<Result<Vec<_>>>()?;
        let trend: Vec<Option<TheilSen>> = series
            .iter()
            .map(|g| {
                let (xs, ys): (Vec<f64>, Vec<f64>) = g
                    .steps
                    .iter()
                    .zip(&g.gap_series)
                    .filter(|(k, _)| **k >= trend_from)
                    .map(|(k, v)| (*k as f64, *v))
                    .unzip();
                theil_sen(&xs, &ys)
            })
            .collect();
        let span = (self.config.n - trend_from.min(self.config.n)) as f64;
        let tol = self.tol.0;
        let not_increasing = trend.iter().filter(|t| t.is_some_and(|t| t.not_increasing_within(span, tol))).count();
        let cps = self.checkpoints();
        let per_path: Vec<Vec<(u64, f64)>> =
            series.iter().map(|g| g.steps.iter().copied().zip(g.gap_series.iter().copied()).collect()).collect();
        let mut s = Series::new(&["step", "median_gap", "max_gap"]);
        for (c, med, max) in summarise(&cps, &per_path) {
            s.push(vec![c.to_string(), fmt(med), fmt(max)]);
        }
        let r = GapResult {
            xi,
            trend_from,
            sup_gap: series.iter().map(|g| g.sup_gap).collect(),
            fraction_not_increasing: not_increasing as f64 / trend.len() as f64,
            trend,
            not_increasing,
        };
        Ok((to_value(&r), s))
    }

    fn cocycle(&self, p: &CocycleParams) -> Outcome {
        let c = self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let xi = p.xi.clone().unwrap_or_else(|| boundary_direction(self.x(), &mut rng));
        let mut random_max = 0.0f64;
        for _ in 0..p.random_samples {
            let g1 = random_isometry(c.model, &mut rng);
            let g2 = random_isometry(c.model, &mut rng);
            let x = random_point(c.model, &mut rng);
            let zeta = boundary_direction(&x, &mut rng);
            random_max = random_max.max(cocycle_residual(&g1, &g2, &zeta, &x)?);
        }
        let path_max = self
            .traces()?
            .into_par_iter()
            .map(|t| -> Result<f64> {
                let sums = transient_cocycle_sums(&t, &xi)?;
                let mut worst = 0.0f64;
                for (k, pos) in t.steps.iter().zip(&t.positions) {
                    let h = crate::boundary::horofunction(&xi, &t.basepoint, pos)?;
                    worst = worst.max((sums[*k as usize] - h).abs());
                }
                Ok(worst)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut s = Series::new(&["path", "max_transient_residual"]);
        for (i, v) in path_max.iter().enumerate() {
            s.push(vec![i.to_string(), fmt(*v)]);
        }
        let r = CocycleResult {
            xi,
            random_samples: p.random_samples,
            random_max_residual: random_max,
            path_max_residual: path_max,
        };
        Ok((to_value(&r), s))
    }

    fn track(&self, p: &TrackParams) -> Outcome {
        let c = self.config;
        let traces = self.traces()?;
        let (lambda, estimated) = match p.lambda {
            Some(l) => (l, false),
            None => {
                let mut total = 0.0;
                for t in &traces {
                    total += distance(&t.basepoint, t.final_position())? / c.n as f64;
                }
                (total / traces.len() as f64, true)
            }
        };
        if !(lambda > 0.0) {
            return Err(LabError::Domain(format!("estimated drift {lambda} is not positive; pass lambda explicitly")));
        }
        let cps = self.checkpoints();
        let per_path: Vec<Option<crate::stats::TrackingSeries>> = traces
            .par_iter()
            .map(|t| match tracking_error(t, lambda) {
                Ok(s) => Ok(Some(s)),
                Err(LabError::Domain(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        let at_checkpoints: Vec<Vec<(u64, f64)>> = per_path
            .iter()
            .map(|s| match s {
                Some(s) => s
                    .steps
                    .iter()
                    .copied()
                    .zip(s.errors.iter().copied())
                    .filter(|(k, _)| cps.binary_search(k).is_ok())
                    .collect(),
                None => Vec::new(),
            })
            .collect();
        let final_error: Vec<Option<f64>> =
            per_path.iter().map(|s| s.as_ref().and_then(|s| s.errors.last().copied())).collect();
        let trend: Vec<Option<TheilSen>> = at_checkpoints
            .iter()
            .map(|v| {
                let (xs, ys): (Vec<f64>, Vec<f64>) = v.iter().map(|(k, e)| (*k as f64, *e)).unzip();
                theil_sen(&xs, &ys)
            })
            .collect();
        let within = final_error.iter().filter(|e| e.is_some_and(|e| e <= p.threshold)).count();
        let mut s = Series::new(&["step", "median_error", "max_error"]);
        for (k, med, max) in summarise(&cps, &at_checkpoints) {
            s.push(vec![k.to_string(), fmt(med), fmt(max)]);
        }
        let r = TrackResult {
            lambda,
            lambda_estimated: estimated,
            threshold: p.threshold,
            fraction_within: within as f64 / final_error.len() as f64,
            final_error,
            trend,
            within,
        };
        Ok((to_value(&r), s))
    }

    fn northsouth(&self, p: &NorthSouthParams) -> Outcome {
        let atom = self.rank_one_atom(p.atom)?;
        let g = self.spec().isometry(atom);
        let mut rows = Vec::new();
        for &power in &p.powers {
            let ns = north_south_constant(
                &g.power(power as i64),
                p.eps_plus,
                p.eps_minus,
                p.samples,
                self.config.seed,
                NORTH_SOUTH_CAP,
                self.tol,
            )?;
            rows.push(NorthSouthRow { power, k0: ns.k0, overflow: ns.overflow });
        }
        let nonincreasing = rows.windows(2).all(|w| !w[1].overflow && (w[0].overflow || w[1].k0 <= w[0].k0));
        let mut s = Series::new(&["power", "k0", "overflow"]);
        for r in &rows {
            s.push(vec![r.power.to_string(), r.k0.to_string(), r.overflow.to_string()]);
        }
        Ok((to_value(&NorthSouthResult { atom, rows, nonincreasing }), s))
    }

    fn pi_convergence(&self, p: &PiConvergenceParams) -> Outcome {
        let c = self.config;
        let atom = self.rank_one_atom(p.atom)?;
        let g = self.spec().isometry(atom);
        let (eta, xi) = g.axis_endpoints(self.tol)?;
        let length = p.length.unwrap_or(c.n as usize);
        let mut gs = Vec::with_capacity(length);
        let mut cur = g.clone();
        for _ in 0..length {
            gs.push(cur.clone());
            cur.right_multiply(g)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let mut k_set = Vec::with_capacity(p.k_points + 1);
        let mut attempts = 0;
        while k_set.len() < p.k_points {
            attempts += 1;
            if attempts > 100 * p.k_points.max(1) {
                return Err(LabError::Domain("could not sample boundary points outside the Tits π-ball of η".into()));
            }
            let kappa = boundary_direction(self.x(), &mut rng);
            let far = match tits_distance(&eta, &kappa, self.tol)? {
                TitsValue::Infinite => true,
                TitsValue::Finite(v) => v > PI + self.tol.0,
            };
            if far {
                k_set.push(kappa);
            }
        }
        if p.include_eta {
            k_set.push(eta.clone());
        }
        let check = pi_convergence_check(&gs, self.x(), &k_set, p.eps, Some((xi.clone(), eta)), self.tol)?;
        let mut s = Series::new(&["n", "max_distance_to_xi"]);
        for (i, gn) in gs.iter().enumerate() {
            let mut worst = 0.0f64;
            for kappa in &k_set {
                worst = worst.max(boundary_metric(self.x(), &gn.apply_boundary(kappa)?, &xi)?);
            }
            s.push(vec![(i + 1).to_string(), fmt(worst)]);
        }
        Ok((to_value(&PiResult { atom, length, k_points: k_set.len(), eps: p.eps, check }), s))
    }

    fn tits_table(&self, p: &TitsTableParams) -> Outcome {
        let points = boundary_grid(self.config.model, p.grid);
        let mut table = Vec::with_capacity(points.len());
        let mut s = Series::new(&["i", "j", "tits_distance"]);
        for (i, a) in points.iter().enumerate() {
            let mut row = Vec::with_capacity(points.len());
            for (j, b) in points.iter().enumerate() {
                let d = tits_distance(a, b, self.tol)?;
                let cell = match d {
                    TitsValue::Finite(v) => fmt(v),
                    TitsValue::Infinite => "inf".to_string(),
                };
                s.push(vec![i.to_string(), j.to_string(), cell]);
                row.push(d);
            }
            table.push(row);
        }
        let tits_ball_trivial = tits_ball_is_trivial(&points[0]);
        Ok((to_value(&TitsTableResult { points, table, tits_ball_trivial }), s))
    }

    fn rankone_audit(&self) -> Outcome {
        let mut s = Series::new(&["i", "j", "power", "score"]);
        for pair in &self.audit.pairs {
            for (m, score) in &pair.scores {
                s.push(vec![pair.i.to_string(), pair.j.to_string(), m.to_string(), fmt(*score)]);
            }
        }
        Ok((to_value(self.audit), s))
    }
}

/// Two disjoint sets of `count` boundary points each. On circle boundaries
/// they interleave at spacing `π/count`; tree ends are sampled from distinct
/// length-3 cylinders.
pub fn default_atom_sets(model: ModelSpace, count: usize, seed: u64) -> (Vec<BoundaryPoint>, Vec<BoundaryPoint>) {
    let angle = |j: usize| TAU * j as f64 / (2 * count) as f64;
    let point = |j: usize, rng: &mut ChaCha8Rng| match model {
        ModelSpace::E2 => BoundaryPoint::e2(angle(j)),
        ModelSpace::H2 => BoundaryPoint::H2(Ideal::from_cayley_angle(angle(j))),
        ModelSpace::H2xR => {
            let xi = Ideal::from_cayley_angle(angle(j));
            BoundaryPoint::H2xR(ProductIdeal::new(Some(xi), 0.0, 0.0).expect("equatorial point"))
        }
        ModelSpace::T4 => {
            let bins = BinScheme::Cylinder { length: 3 };
            bins.sample(model, j % bins.count(), rng)
        }
    };
    let mut rng = path_rng(seed, u64::MAX);
    let mut a = Vec::with_capacity(count);
    let mut b = Vec::with_capacity(count);
    for j in 0..2 * count {
        let p = point(j, &mut rng);
        if j % 2 == 0 {
            a.push(p);
        } else {
            b.push(p);
        }
    }
    (a, b)
}

/// A fixed grid of `grid` boundary points per model for the Tits table.
pub fn boundary_grid(model: ModelSpace, grid: usize) -> Vec<BoundaryPoint> {
    (0..grid)
        .map(|j| {
            let t = TAU * j as f64 / grid as f64;
            match model {
                ModelSpace::E2 => BoundaryPoint::e2(t),
                ModelSpace::H2 => BoundaryPoint::H2(Ideal::from_cayley_angle(t)),
                ModelSpace::T4 => {
                    let bins = BinScheme::Cylinder { length: 2 };
                    let w = bins.label(j % bins.count());
                    BoundaryPoint::t4(&w, "").expect("reduced label")
                }
                ModelSpace::H2xR => {
                    let slope = -FRAC_PI_2 + PI * (j as f64 + 0.5) / grid as f64;
                    let xi = Ideal::from_cayley_angle(TAU * (j % 4) as f64 / 4.0);
                    BoundaryPoint::H2xR(ProductIdeal::new(Some(xi), slope, 0.0).expect("interior slope"))
                }
            }
        })
        .collect()
}
