//! Two symmetric atom detectors, the ratio signal and its error channels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WvaError};
use crate::grid::{Grid1D, Representation};
use crate::parallel::{map_indices, pairwise_sum, Execution};
use crate::wavepacket::{make_gaussian, WavepacketState, NORM_TOLERANCE};

/// Poisson draws above this mean use the rounded Gaussian approximation.
pub const GAUSSIAN_APPROX_MEAN: f64 = 1e3;
pub const MIN_TRIALS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSetup {
    /// Window center in units of `Delta`; the second detector sits at `-x_pos`.
    pub x_pos: f64,
    /// Window width in units of `Delta`.
    pub l: f64,
    /// Atoms injected per trial.
    pub n_atoms: u64,
    pub chi: f64,
    pub delta0: f64,
    /// Separate systematic coefficient for detector 2. Not part of the
    /// symmetric model; it shows what happens when the error does not cancel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0_second: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl DetectorSetup {
    pub fn window(&self, detector: usize) -> (f64, f64) {
        let c = if detector == 0 {
            self.x_pos
        } else {
            -self.x_pos
        };
        (c - self.l / 2.0, c + self.l / 2.0)
    }

    fn delta0_for(&self, detector: usize) -> f64 {
        if detector == 0 {
            self.delta0
        } else {
            self.delta0_second.unwrap_or(self.delta0)
        }
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        if !(self.x_pos.is_finite() && self.x_pos > 0.0) {
            return Err(WvaError::InvalidDetector(format!(
                "x_pos = {} must be > 0",
                self.x_pos
            )));
        }
        if !(self.l > 0.0 && self.l < self.x_pos) {
            return Err(WvaError::InvalidDetector(format!(
                "window width l = {} must lie in (0, x_pos = {})",
                self.l, self.x_pos
            )));
        }
        if !(self.chi > 0.0 && self.chi <= 1.0) {
            return Err(WvaError::InvalidDetector(format!(
                "chi = {} outside (0, 1]",
                self.chi
            )));
        }
        for d in [self.delta0, self.delta0_for(1)] {
            if !(d.is_finite() && self.chi + d > 0.0) {
                return Err(WvaError::InvalidDetector(format!(
                    "delta0 = {d} makes chi + delta0 non-positive"
                )));
            }
        }
        let lo = grid.position(0);
        let hi = grid.position(grid.n_points() - 1);
        let (a, b) = (-self.x_pos - self.l / 2.0, self.x_pos + self.l / 2.0);
        if a < lo || b > hi {
            return Err(WvaError::WindowOutsideGrid { lo: a, hi: b });
        }
        Ok(())
    }
}

/// Trapezoid rule for `int_lo^hi f(x) density(x) dx`, with the density
/// interpolated linearly at the window edges.
pub fn window_integral(
    grid: &Grid1D,
    density: &[f64],
    lo: f64,
    hi: f64,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let first = grid.position(0);
    let last = grid.position(grid.n_points() - 1);
    if lo < first || hi > last || !(lo < hi) {
        return Err(WvaError::WindowOutsideGrid { lo, hi });
    }
    let dx = grid.spacing();
    let interp = |x: f64| {
        let s = (x - first) / dx;
        let j = (s.floor() as usize).min(grid.n_points() - 2);
        let w = s - j as f64;
        density[j] * (1.0 - w) + density[j + 1] * w
    };
    let mut nodes = vec![(lo, interp(lo))];
    let start = ((lo - first) / dx).floor() as usize + 1;
    for (j, &d) in density.iter().enumerate().skip(start) {
        let x = grid.position(j);
        if x >= hi {
            break;
        }
        if x > lo {
            nodes.push((x, d));
        }
    }
    nodes.push((hi, interp(hi)));
    Ok(nodes
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (f(w[0].0) * w[0].1 + f(w[1].0) * w[1].1))
        .sum())
}

fn position_density(pointer: &WavepacketState) -> Result<Vec<f64>> {
    if pointer.representation() != Representation::Position {
        return Err(WvaError::Contract(
            "detector model needs a position-space pointer".into(),
        ));
    }
    let norm = pointer.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(WvaError::Unnormalized { norm });
    }
    Ok(pointer.amplitudes().iter().map(|a| a.norm_sqr()).collect())
}

/// `n_i = N P int_window |phi_w|^2` from a normalized position density.
pub fn expected_counts_from_density(
    grid: &Grid1D,
    density: &[f64],
    probability: f64,
    setup: &DetectorSetup,
) -> Result<(f64, f64)> {
    setup.validate(grid)?;
    let scale = setup.n_atoms as f64 * probability;
    let count = |d| {
        let (lo, hi) = setup.window(d);
        window_integral(grid, density, lo, hi, |_| 1.0).map(|w| scale * w)
    };
    Ok((count(0)?, count(1)?))
}

pub fn expected_counts(
    pointer: &WavepacketState,
    probability: f64,
    setup: &DetectorSetup,
) -> Result<(f64, f64)> {
    let density = position_density(pointer)?;
    expected_counts_from_density(pointer.grid(), &density, probability, setup)
}

/// Mean position of the unshifted packet inside detector 1's window, in units of `Delta`.
pub fn x_bar_window(grid: &Grid1D, setup: &DetectorSetup) -> Result<f64> {
    setup.validate(grid)?;
    let density: Vec<f64> = make_gaussian(*grid)
        .amplitudes()
        .iter()
        .map(|a| a.norm_sqr())
        .collect();
    let (lo, hi) = setup.window(0);
    let mass = window_integral(grid, &density, lo, hi, |_| 1.0)?;
    let first = window_integral(grid, &density, lo, hi, |x| x)?;
    Ok(first / mass)
}

pub fn signal(n1: f64, n2: f64) -> Result<f64> {
    if n2 == 0.0 {
        return Err(WvaError::ZeroCounts);
    }
    Ok(n1 / n2 - 1.0)
}

/// `ln(n1 / n2)`, equal to [`signal`] up to `O(s^2)`.
pub fn log_signal(n1: f64, n2: f64) -> Result<f64> {
    if n2 == 0.0 || n1 == 0.0 {
        return Err(WvaError::ZeroCounts);
    }
    Ok(n1.ln() - n2.ln())
}

/// `4 g_c Im(A_w) x_bar_l`.
pub fn first_order_signal(gc: f64, im_aw: f64, x_bar_l: f64) -> f64 {
    4.0 * gc * im_aw * x_bar_l
}

/// Integer-valued draw with mean and variance `mean`.
fn poisson_draw<R: Rng>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        0.0
    } else if mean > GAUSSIAN_APPROX_MEAN {
        let z: f64 = Normal::new(mean, mean.sqrt())
            .expect("finite positive sd")
            .sample(rng);
        z.round().max(0.0)
    } else {
        Poisson::new(mean).expect("positive mean").sample(rng)
    }
}

/// `n_i = chi n_bar + delta0 n_bar + (shot noise with variance chi n_bar)`.
pub fn sample_count<R: Rng>(n_bar: f64, chi: f64, delta0: f64, rng: &mut R) -> f64 {
    poisson_draw(chi * n_bar, rng) + delta0 * n_bar
}

/// Independent, reproducible generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountingResult {
    pub n1_bar: f64,
    pub n2_bar: f64,
    pub n1: f64,
    pub n2: f64,
    pub s_bar: f64,
    pub s: f64,
    pub x_bar_l: f64,
}

fn require_seed(setup: &DetectorSetup) -> Result<u64> {
    setup
        .seed
        .ok_or_else(|| WvaError::InvalidDetector("a seed is required for sampling".into()))
}

/// Samples both detectors for a single trial.
pub fn sample_counts(n_bar: (f64, f64), setup: &DetectorSetup, trial: u64) -> Result<(f64, f64)> {
    let mut rng = trial_rng(require_seed(setup)?, trial);
    let n1 = sample_count(n_bar.0, setup.chi, setup.delta0_for(0), &mut rng);
    let n2 = sample_count(n_bar.1, setup.chi, setup.delta0_for(1), &mut rng);
    Ok((n1, n2))
}

pub fn count_once(
    grid: &Grid1D,
    density: &[f64],
    probability: f64,
    setup: &DetectorSetup,
    trial: u64,
) -> Result<CountingResult> {
    let (n1_bar, n2_bar) = expected_counts_from_density(grid, density, probability, setup)?;
    let (n1, n2) = sample_counts((n1_bar, n2_bar), setup, trial)?;
    Ok(CountingResult {
        n1_bar,
        n2_bar,
        n1,
        n2,
        s_bar: signal(n1_bar, n2_bar)?,
        s: signal(n1, n2)?,
        x_bar_l: x_bar_window(grid, setup)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub standard_error: f64,
    pub min: f64,
    pub max: f64,
}

impl SampleSummary {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = pairwise_sum(values) / n;
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1.0).max(1.0);
        Self {
            mean,
            std_dev: var.sqrt(),
            standard_error: (var / n).sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuppressionReport {
    pub trials: usize,
    pub n1_bar: f64,
    pub n2_bar: f64,
    pub s_bar: f64,
    pub x_bar_l: f64,
    /// Estimates of `s` with the configured systematic error.
    pub with_systematic: SampleSummary,
    /// Same random streams with `delta0 = 0`.
    pub without_systematic: SampleSummary,
    pub bias: f64,
    /// Mean of the paired difference between the two runs.
    pub systematic_bias: f64,
    pub systematic_bias_se: f64,
    /// `(1 + s) sqrt(chi (1/n1 + 1/n2)) / (chi + delta0)`.
    pub predicted_std: f64,
    pub systematic_cancelled: bool,
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

/// Monte Carlo check that a proportional systematic error drops out of the
/// ratio signal while shot noise does not.
pub fn error_suppression_experiment(
    grid: &Grid1D,
    density: &[f64],
    probability: f64,
    setup: &DetectorSetup,
    trials: usize,
    execution: Execution,
) -> Result<SuppressionReport> {
    if trials < MIN_TRIALS {
        return Err(WvaError::InsufficientTrials { trials });
    }
    let seed = require_seed(setup)?;
    let (n1_bar, n2_bar) = expected_counts_from_density(grid, density, probability, setup)?;
    let s_bar = signal(n1_bar, n2_bar)?;
    let pairs = map_indices(trials, execution, |k| {
        let mut rng = trial_rng(seed, k as u64);
        // shared draws so the two runs differ only by the systematic term
        let k1 = poisson_draw(setup.chi * n1_bar, &mut rng);
        let k2 = poisson_draw(setup.chi * n2_bar, &mut rng);
        let with = (
            k1 + setup.delta0_for(0) * n1_bar,
            k2 + setup.delta0_for(1) * n2_bar,
        );
        (with, (k1, k2))
    });
    let mut s_with = Vec::with_capacity(trials);
    let mut s_without = Vec::with_capacity(trials);
    for &(w, c) in &pairs {
        s_with.push(signal(w.0, w.1)?);
        s_without.push(signal(c.0, c.1)?);
    }
    let diff: Vec<f64> = s_with.iter().zip(&s_without).map(|(a, b)| a - b).collect();
    let with_systematic = SampleSummary::from_samples(&s_with);
    let without_systematic = SampleSummary::from_samples(&s_without);
    let d = SampleSummary::from_samples(&diff);
    let chi = setup.chi;
    let predicted_std =
        (1.0 + s_bar) * (chi * (1.0 / n1_bar + 1.0 / n2_bar)).sqrt() / (chi + setup.delta0);
    Ok(SuppressionReport {
        trials,
        n1_bar,
        n2_bar,
        s_bar,
        x_bar_l: x_bar_window(grid, setup)?,
        bias: with_systematic.mean - s_bar,
        systematic_bias: d.mean,
        systematic_bias_se: d.standard_error,
        predicted_std,
        systematic_cancelled: d.mean.abs() <= 3.0 * d.standard_error + 1e-15,
        with_systematic,
        without_systematic,
        samples: pairs.iter().map(|p| p.0).collect(),
    })
}
