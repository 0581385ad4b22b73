use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;
use serde::Serialize;

use wva_core::detector::{
    error_suppression_experiment, expected_counts_from_density, first_order_signal, signal,
    x_bar_window, DetectorSetup, SuppressionReport, MIN_TRIALS,
};
use wva_core::parallel::map_indices;
use wva_core::params::{derive_couplings, CouplingReport, RegimeFlag, RegimeStatus, Thresholds};
use wva_core::pipeline::{run, Experiment, RunOutput, RunRecord};
use wva_core::weakvalue::{weak_value, WeakValueResult};

use crate::config::{EngineChoice, RunConfig};
use crate::output::{self, num, sig6, Format};

/// Exit code 1: the physics refused (regime failure, singular post-selection, ...).
/// Exit code 2: the invocation or the config file is wrong.
#[derive(Debug)]
pub enum Failure {
    Physics(anyhow::Error),
    Usage(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Physics(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Physics(e) | Failure::Usage(e) => e,
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

trait Classify<T> {
    fn usage(self) -> Outcome<T>;
    fn physics(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Outcome<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn physics(self) -> Outcome<T> {
        self.map_err(|e| Failure::Physics(e.into()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML config; the built-in defaults are used when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the machine-readable result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Overrides the top-level `seed` of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the `engine` of the config.
    #[arg(long, value_enum)]
    pub engine: Option<EngineChoice>,
    /// Print the resolved config as TOML and exit.
    #[arg(long)]
    pub dump_config: bool,
}

impl Common {
    fn load(&self) -> Outcome<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).usage()?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(e) = self.engine {
            cfg.engine = e;
        }
        Ok(cfg)
    }

    fn emit(&self, bytes: &[u8]) -> Outcome<()> {
        output::emit(bytes, self.out.as_deref()).usage()
    }

    /// Loads the config, or dumps it and returns `None`.
    fn prepare(&self) -> Outcome<Option<RunConfig>> {
        let cfg = self.load()?;
        if self.dump_config {
            self.emit(cfg.to_toml().usage()?.as_bytes())?;
            return Ok(None);
        }
        Ok(Some(cfg))
    }
}

#[derive(Debug, Clone, Serialize)]
struct FlagRow {
    name: &'static str,
    condition: &'static str,
    ratio: f64,
    warn: f64,
    fail: f64,
    status: RegimeStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

impl FlagRow {
    fn new(f: &RegimeFlag) -> Self {
        let note = match (f.name, f.status) {
            (_, RegimeStatus::Pass) => None,
            ("k_x0", _) => Some(
                "k x_0 is close to the tan/cos singularity at 0 or pi/2 of the linearized coupling"
                    .to_string(),
            ),
            ("gc2_abs_aw", _) => Some(format!(
                "g_c^2 |A_w| = {}: a weak value can not be infinitely amplified, higher orders in g_c take over",
                sig6(f.ratio)
            )),
            _ => Some(format!("{} is violated", f.condition)),
        };
        Self {
            name: f.name,
            condition: f.condition,
            ratio: f.ratio,
            warn: f.thresholds.warn,
            fail: f.thresholds.fail,
            status: f.status,
            note,
        }
    }
}

struct Regime {
    couplings: CouplingReport,
    weak_value: Result<WeakValueResult, String>,
    flags: Vec<FlagRow>,
    status: RegimeStatus,
}

fn regime(exp: &Experiment) -> anyhow::Result<Regime> {
    let couplings = derive_couplings(&exp.physical)?;
    let wv = weak_value(&exp.qubit, &exp.postselect).map_err(|e| e.to_string());
    let gc2 = match &wv {
        Ok(w) => couplings.g_c * couplings.g_c * w.a_w.norm(),
        Err(_) => f64::INFINITY,
    };
    let gc2_flag = RegimeFlag::new("gc2_abs_aw", "g_c^2 |A_w| << 1", gc2, Thresholds::MUCH_LESS);
    let mut flags: Vec<FlagRow> = couplings.flags.iter().map(FlagRow::new).collect();
    flags.push(FlagRow::new(&gc2_flag));
    if let Err(e) = &wv {
        flags.last_mut().unwrap().note = Some(e.clone());
    }
    let status = flags
        .iter()
        .map(|f| f.status)
        .max()
        .unwrap_or(RegimeStatus::Pass);
    Ok(Regime {
        couplings,
        weak_value: wv,
        flags,
        status,
    })
}

fn status_word(s: RegimeStatus) -> &'static str {
    match s {
        RegimeStatus::Pass => "pass",
        RegimeStatus::Warn => "warn",
        RegimeStatus::Fail => "fail",
    }
}

fn complex(re: f64, im: f64) -> String {
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{} {sign} {}i", sig6(re), sig6(im.abs()))
}

fn print_flags(flags: &[FlagRow]) {
    for f in flags {
        eprintln!(
            "  {:<24} {:<22} {:>12}  {}",
            f.name,
            f.condition,
            sig6(f.ratio),
            status_word(f.status)
        );
        if let Some(n) = &f.note {
            eprintln!("      {n}");
        }
    }
}

fn failing(flags: &[FlagRow]) -> String {
    flags
        .iter()
        .filter(|f| f.status == RegimeStatus::Fail)
        .map(|f| f.name)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Refuses to run outside the validity regime.
fn checked_regime(exp: &Experiment) -> Outcome<Regime> {
    let r = regime(exp).physics()?;
    if r.status == RegimeStatus::Fail {
        print_flags(&r.flags);
        return Err(Failure::Physics(anyhow!(
            "regime check failed: {}",
            failing(&r.flags)
        )));
    }
    Ok(r)
}

#[derive(Serialize)]
struct WeakValueSummary {
    re: f64,
    im: f64,
    probability: f64,
}

#[derive(Serialize)]
struct ValidateRecord {
    status: RegimeStatus,
    g0_over_2pi_hz: f64,
    omega_xc_over_2pi_hz: f64,
    g_c: f64,
    g_c_prime: f64,
    weak_value: Option<WeakValueSummary>,
    flags: Vec<FlagRow>,
}

const VALIDATE_HEADER: [&str; 7] = [
    "name",
    "condition",
    "ratio",
    "warn",
    "fail",
    "status",
    "note",
];

pub fn validate(c: &Common) -> Outcome<u8> {
    let Some(cfg) = c.prepare()? else {
        return Ok(0);
    };
    let exp = cfg.experiment().usage()?;
    let r = regime(&exp).physics()?;
    let record = ValidateRecord {
        status: r.status,
        g0_over_2pi_hz: r.couplings.g0_over_2pi,
        omega_xc_over_2pi_hz: r.couplings.omega_xc_over_2pi,
        g_c: r.couplings.g_c,
        g_c_prime: r.couplings.g_c_prime,
        weak_value: r.weak_value.as_ref().ok().map(|w| WeakValueSummary {
            re: w.re,
            im: w.im,
            probability: w.probability,
        }),
        flags: r.flags.clone(),
    };
    let bytes = match c.format.unwrap_or(Format::Json) {
        Format::Json => output::json(&record).usage()?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = record
                .flags
                .iter()
                .map(|f| {
                    vec![
                        f.name.to_string(),
                        f.condition.to_string(),
                        num(Some(f.ratio)),
                        num(Some(f.warn)),
                        num(Some(f.fail)),
                        status_word(f.status).to_string(),
                        f.note.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            output::csv(&VALIDATE_HEADER, &rows).usage()?
        }
    };
    c.emit(&bytes)?;
    eprintln!("regime check");
    print_flags(&r.flags);
    eprintln!(
        "  g0/2pi = {} kHz, Omega x_c/2pi = {} kHz, g_c = {}",
        sig6(r.couplings.g0_over_2pi / 1e3),
        sig6(r.couplings.omega_xc_over_2pi / 1e3),
        sig6(r.couplings.g_c)
    );
    if let Ok(w) = &r.weak_value {
        eprintln!(
            "  A_w = {}, P = {}",
            complex(w.re, w.im),
            sig6(w.probability)
        );
    }
    eprintln!("overall: {}", status_word(r.status));
    Ok(if r.status == RegimeStatus::Fail { 1 } else { 0 })
}

#[derive(Debug, Clone, Copy, Serialize)]
struct SignalRecord {
    n1_bar: f64,
    n2_bar: f64,
    s_bar: f64,
    x_bar_l: f64,
    first_order_signal: f64,
}

fn expected_signal(out: &RunOutput, setup: &DetectorSetup) -> anyhow::Result<SignalRecord> {
    let p = &out.pointer;
    let (n1_bar, n2_bar) =
        expected_counts_from_density(p.grid(), &p.position_density(), p.probability, setup)?;
    let x_bar_l = x_bar_window(p.grid(), setup)?;
    let r = &out.record;
    Ok(SignalRecord {
        n1_bar,
        n2_bar,
        s_bar: signal(n1_bar, n2_bar)?,
        x_bar_l,
        first_order_signal: first_order_signal(r.couplings.g_c, r.weak_value.im, x_bar_l),
    })
}

/// Fixed column set of `sweep` tables and of `run --format csv`.
pub const SWEEP_HEADER: [&str; 15] = [
    "index",
    "parameter",
    "value",
    "status",
    "re_aw",
    "im_aw",
    "probability",
    "g0_over_2pi_hz",
    "g_c",
    "predicted_p_shift_over_2dp",
    "predicted_x_shift_over_2delta",
    "measured_p_shift_over_2dp",
    "measured_x_shift_over_2delta",
    "s_bar",
    "error",
];

#[derive(Debug, Clone, Default, Serialize)]
struct Row {
    index: usize,
    parameter: Option<String>,
    value: Option<f64>,
    status: Option<RegimeStatus>,
    re_aw: Option<f64>,
    im_aw: Option<f64>,
    probability: Option<f64>,
    g0_over_2pi_hz: Option<f64>,
    g_c: Option<f64>,
    predicted_p_shift_over_2dp: Option<f64>,
    predicted_x_shift_over_2delta: Option<f64>,
    measured_p_shift_over_2dp: Option<f64>,
    measured_x_shift_over_2delta: Option<f64>,
    s_bar: Option<f64>,
    error: Option<String>,
}

impl Row {
    fn fill(&mut self, status: RegimeStatus, rec: &RunRecord, s_bar: Option<f64>) {
        self.status = Some(status);
        self.re_aw = Some(rec.weak_value.re);
        self.im_aw = Some(rec.weak_value.im);
        self.probability = Some(rec.probability);
        self.g0_over_2pi_hz = Some(rec.couplings.g0_over_2pi);
        self.g_c = Some(rec.couplings.g_c);
        self.predicted_p_shift_over_2dp = Some(rec.predicted.p_shift_over_2dp);
        self.predicted_x_shift_over_2delta = Some(rec.predicted.x_shift_over_2delta);
        self.measured_p_shift_over_2dp = Some(rec.measured.p_shift_over_2dp);
        self.measured_x_shift_over_2delta = Some(rec.measured.x_shift_over_2delta);
        self.s_bar = s_bar;
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.index.to_string(),
            self.parameter.clone().unwrap_or_default(),
            num(self.value),
            self.status.map(status_word).unwrap_or_default().to_string(),
            num(self.re_aw),
            num(self.im_aw),
            num(self.probability),
            num(self.g0_over_2pi_hz),
            num(self.g_c),
            num(self.predicted_p_shift_over_2dp),
            num(self.predicted_x_shift_over_2delta),
            num(self.measured_p_shift_over_2dp),
            num(self.measured_x_shift_over_2delta),
            num(self.s_bar),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn rows_csv(rows: &[Row]) -> Outcome<Vec<u8>> {
    let cells: Vec<Vec<String>> = rows.iter().map(Row::cells).collect();
    output::csv(&SWEEP_HEADER, &cells).usage()
}

#[derive(Serialize)]
struct RunReport {
    status: RegimeStatus,
    flags: Vec<FlagRow>,
    run: RunRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    detector: Option<SignalRecord>,
}

pub fn run_cmd(c: &Common) -> Outcome<u8> {
    let Some(cfg) = c.prepare()? else {
        return Ok(0);
    };
    let exp = cfg.experiment().usage()?;
    let detector = cfg.detector_setup().usage()?;
    let r = checked_regime(&exp)?;
    let out = run(&exp).context("run failed").physics()?;
    let signal = match &detector {
        Some((setup, _)) => Some(expected_signal(&out, setup).physics()?),
        None => None,
    };
    let bytes = match c.format.unwrap_or(Format::Json) {
        Format::Json => output::json(&RunReport {
            status: r.status,
            flags: r.flags,
            run: out.record.clone(),
            detector: signal,
        })
        .usage()?,
        Format::Csv => {
            let mut row = Row::default();
            row.fill(r.status, &out.record, signal.map(|s| s.s_bar));
            rows_csv(&[row])?
        }
    };
    c.emit(&bytes)?;
    let rec = &out.record;
    eprintln!(
        "{:?} engine: A_w = {}, P = {}",
        rec.engine,
        complex(rec.weak_value.re, rec.weak_value.im),
        sig6(rec.probability)
    );
    eprintln!(
        "  <p>_w/2dp predicted {} measured {}",
        sig6(rec.predicted.p_shift_over_2dp),
        sig6(rec.measured.p_shift_over_2dp)
    );
    eprintln!(
        "  <x>_w/2D  predicted {} measured {}",
        sig6(rec.predicted.x_shift_over_2delta),
        sig6(rec.measured.x_shift_over_2delta)
    );
    if let Some(ex) = &rec.exact {
        eprintln!(
            "  fidelity with effective engine {}, cavity excitation {}",
            sig6(ex.fidelity_with_effective),
            sig6(ex.diagnostics.cavity_excitation)
        );
    }
    if let Some(s) = signal {
        eprintln!(
            "  s_bar {} (first order {})",
            sig6(s.s_bar),
            sig6(s.first_order_signal)
        );
    }
    Ok(0)
}

fn sweep_row(cfg: &RunConfig, index: usize, parameter: &str, value: f64) -> Row {
    let mut row = Row {
        index,
        parameter: Some(parameter.to_string()),
        value: Some(value),
        ..Row::default()
    };
    let attempt = || -> anyhow::Result<(RegimeStatus, RunOutput, Option<f64>)> {
        let point = cfg.with_value(parameter, value)?;
        let exp = point.experiment()?;
        let r = regime(&exp)?;
        if r.status == RegimeStatus::Fail {
            return Err(anyhow!("regime check failed: {}", failing(&r.flags)));
        }
        let out = run(&exp)?;
        let s_bar = match point.detector_setup()? {
            Some((setup, _)) => Some(expected_signal(&out, &setup)?.s_bar),
            None => None,
        };
        Ok((r.status, out, s_bar))
    };
    match attempt() {
        Ok((status, out, s_bar)) => row.fill(status, &out.record, s_bar),
        Err(e) => row.error = Some(format!("{e:#}")),
    }
    row
}

#[derive(Serialize)]
struct SweepReport<'a> {
    parameter: &'a str,
    scale: crate::config::Scale,
    rows: &'a [Row],
}

pub fn sweep(c: &Common) -> Outcome<u8> {
    let Some(cfg) = c.prepare()? else {
        return Ok(0);
    };
    let spec = cfg
        .sweep
        .clone()
        .ok_or_else(|| anyhow!("sweep needs a [sweep] section"))
        .usage()?;
    let values = spec.values().usage()?;
    let rows = map_indices(values.len(), cfg.numerics.execution, |k| {
        sweep_row(&cfg, k, &spec.parameter, values[k])
    });
    let bytes = match c.format.unwrap_or(Format::Csv) {
        Format::Csv => rows_csv(&rows)?,
        Format::Json => output::json(&SweepReport {
            parameter: &spec.parameter,
            scale: spec.scale,
            rows: &rows,
        })
        .usage()?,
    };
    c.emit(&bytes)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "sweep of {} over {} points ({} to {}), {} failed",
        spec.parameter,
        rows.len(),
        sig6(spec.start),
        sig6(spec.stop),
        failed
    );
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("  row {}: {}", r.index, r.error.as_deref().unwrap_or(""));
    }
    Ok(if failed > 0 { 1 } else { 0 })
}

#[derive(Args, Debug, Clone)]
pub struct DetectArgs {
    #[command(flatten)]
    pub common: Common,
    /// Write the per-trial counts and signal estimates as CSV.
    #[arg(long)]
    pub trials_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DetectRecord {
    seed: u64,
    g_c: f64,
    re_aw: f64,
    im_aw: f64,
    probability: f64,
    first_order_signal: f64,
    report: SuppressionReport,
    bias_over_standard_error: f64,
    verdict: &'static str,
}

const DETECT_HEADER: [&str; 14] = [
    "seed",
    "trials",
    "n1_bar",
    "n2_bar",
    "s_bar",
    "first_order_signal",
    "mean",
    "std_dev",
    "standard_error",
    "bias",
    "systematic_bias",
    "systematic_bias_se",
    "predicted_std",
    "verdict",
];

fn verdict(r: &SuppressionReport) -> &'static str {
    if r.systematic_cancelled {
        "systematic error suppressed"
    } else {
        "systematic error not cancelled"
    }
}

pub fn detect(a: &DetectArgs) -> Outcome<u8> {
    let c = &a.common;
    let Some(cfg) = c.prepare()? else {
        return Ok(0);
    };
    let exp = cfg.experiment().usage()?;
    let (setup, trials) = cfg
        .detector_setup()
        .usage()?
        .ok_or_else(|| anyhow!("detect needs a [detector] section"))
        .usage()?;
    let seed = setup
        .seed
        .ok_or_else(|| anyhow!("detect needs a seed: set `seed` in the config or pass --seed"))
        .usage()?;
    if trials < MIN_TRIALS {
        return Err(Failure::Usage(anyhow!(
            "[detector] trials = {trials} is below the minimum of {MIN_TRIALS}"
        )));
    }
    checked_regime(&exp)?;
    let out = run(&exp).context("run failed").physics()?;
    let p = &out.pointer;
    let report = error_suppression_experiment(
        p.grid(),
        &p.position_density(),
        p.probability,
        &setup,
        trials,
        cfg.numerics.execution,
    )
    .physics()?;
    let rec = &out.record;
    let x_bar_l = report.x_bar_l;
    let record = DetectRecord {
        seed,
        g_c: rec.couplings.g_c,
        re_aw: rec.weak_value.re,
        im_aw: rec.weak_value.im,
        probability: rec.probability,
        first_order_signal: first_order_signal(rec.couplings.g_c, rec.weak_value.im, x_bar_l),
        bias_over_standard_error: report.bias / report.with_systematic.standard_error,
        verdict: verdict(&report),
        report,
    };
    if let Some(path) = &a.trials_out {
        let rows: Vec<Vec<String>> = record
            .report
            .samples
            .iter()
            .enumerate()
            .map(|(k, &(n1, n2))| {
                vec![
                    k.to_string(),
                    num(Some(n1)),
                    num(Some(n2)),
                    num(signal(n1, n2).ok()),
                ]
            })
            .collect();
        let bytes = output::csv(&["trial", "n1", "n2", "s_hat"], &rows).usage()?;
        output::emit(&bytes, Some(path)).usage()?;
    }
    let r = &record.report;
    let bytes = match c.format.unwrap_or(Format::Json) {
        Format::Json => output::json(&record).usage()?,
        Format::Csv => {
            let row = vec![
                seed.to_string(),
                r.trials.to_string(),
                num(Some(r.n1_bar)),
                num(Some(r.n2_bar)),
                num(Some(r.s_bar)),
                num(Some(record.first_order_signal)),
                num(Some(r.with_systematic.mean)),
                num(Some(r.with_systematic.std_dev)),
                num(Some(r.with_systematic.standard_error)),
                num(Some(r.bias)),
                num(Some(r.systematic_bias)),
                num(Some(r.systematic_bias_se)),
                num(Some(r.predicted_std)),
                record.verdict.to_string(),
            ];
            output::csv(&DETECT_HEADER, &[row]).usage()?
        }
    };
    c.emit(&bytes)?;
    eprintln!(
        "{} trials, seed {}: s_bar {}, mean s_hat {} +- {} (std {}, predicted {})",
        r.trials,
        seed,
        sig6(r.s_bar),
        sig6(r.with_systematic.mean),
        sig6(r.with_systematic.standard_error),
        sig6(r.with_systematic.std_dev),
        sig6(r.predicted_std)
    );
    eprintln!(
        "  systematic shift {} +- {}: {}",
        sig6(r.systematic_bias),
        sig6(r.systematic_bias_se),
        record.verdict
    );
    Ok(0)
}
