//! Dimensional experiment parameters and the bridge to the dimensionless
//! couplings used everywhere else.
//!
//! Only the fields of [`PhysicalParams`] are stored; every derived quantity
//! is recomputed from them on demand.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WvaError};

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Mass of an 85Rb atom [kg]; the default pointer particle.
pub const RB85_MASS: f64 = 1.409_993_199e-25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Cavity wavelength [m].
    pub lambda: f64,
    /// Vacuum Rabi frequency `Omega_0 / 2 pi` [Hz].
    pub omega0_over_2pi: f64,
    /// Phase offset `k x_0` of the atomic beam in the standing wave.
    pub k_x0: f64,
    /// Atom-cavity detuning `delta / 2 pi` [Hz].
    pub delta_over_2pi: f64,
    /// Flat-top interaction duration [s].
    pub t: f64,
    /// rms width `Delta` of the transverse packet [m].
    #[serde(alias = "Delta")]
    pub packet_width: f64,
    /// Atomic mass [kg].
    #[serde(alias = "m")]
    pub mass: f64,
}

impl PhysicalParams {
    /// Parameters from the worked example: 1 cm cavity, 10 kHz Rabi
    /// frequency, `k x_0 = pi/4` and `Omega x_c / delta = 0.1`. Packet width,
    /// mass and duration are illustrative choices giving `g_c ~ 0.01`.
    pub fn worked_example() -> Self {
        let omega0_over_2pi = 1.0e4;
        Self {
            lambda: 1.0e-2,
            omega0_over_2pi,
            k_x0: FRAC_PI_4,
            delta_over_2pi: omega0_over_2pi * FRAC_PI_4.sin() / 0.1,
            t: 1.8e-4,
            packet_width: 1.0e-5,
            mass: RB85_MASS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("omega0_over_2pi", self.omega0_over_2pi),
            ("delta_over_2pi", self.delta_over_2pi),
            ("t", self.t),
            ("packet_width", self.packet_width),
            ("mass", self.mass),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(WvaError::Domain(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.k_x0 > 0.0 && self.k_x0 < FRAC_PI_2) {
            return Err(WvaError::Domain(format!(
                "k_x0 = {} outside (0, pi/2): tan/cos singularity",
                self.k_x0
            )));
        }
        Ok(())
    }

    pub fn k(&self) -> f64 {
        TAU / self.lambda
    }

    /// `Omega_0` [rad/s].
    pub fn rabi0(&self) -> f64 {
        TAU * self.omega0_over_2pi
    }

    /// `delta` [rad/s].
    pub fn detuning(&self) -> f64 {
        TAU * self.delta_over_2pi
    }

    /// Cavity mode frequency `omega_c = 2 pi c / lambda` [rad/s].
    pub fn omega_c(&self) -> f64 {
        TAU * SPEED_OF_LIGHT / self.lambda
    }

    /// Atomic transition frequency `omega_a = omega_c + delta` [rad/s].
    pub fn omega_a(&self) -> f64 {
        self.omega_c() + self.detuning()
    }

    /// Field gradient coupling `Omega = k cos(k x_0) Omega_0` [rad/(s m)].
    pub fn omega_gradient(&self) -> f64 {
        self.k() * self.k_x0.cos() * self.rabi0()
    }

    /// `x_c = tan(k x_0) / k` [m].
    pub fn x_c(&self) -> f64 {
        self.k_x0.tan() / self.k()
    }

    /// `Omega x_c = Omega_0 sin(k x_0)` [rad/s].
    pub fn omega_xc(&self) -> f64 {
        self.rabi0() * self.k_x0.sin()
    }

    /// `Omega x_c / delta`.
    pub fn coupling_ratio(&self) -> f64 {
        self.omega_xc() / self.detuning()
    }

    /// `g_0 = (Omega x_c)^2 / delta` [rad/s].
    pub fn g0(&self) -> f64 {
        self.omega_xc().powi(2) / self.detuning()
    }

    pub fn k_delta(&self) -> f64 {
        self.k() * self.packet_width
    }

    pub fn delta_over_xc(&self) -> f64 {
        self.packet_width / self.x_c()
    }

    /// `Delta_p = hbar / (2 Delta)`.
    pub fn delta_p(&self) -> f64 {
        HBAR / (2.0 * self.packet_width)
    }

    /// Free-diffraction time scale `m Delta^2 / hbar` [s].
    pub fn diffraction_time(&self) -> f64 {
        self.mass * self.packet_width.powi(2) / HBAR
    }

    pub fn couplings(&self) -> Couplings {
        Couplings::new(self.g0() * self.t, self.delta_over_xc())
    }

    /// Same parameters with `t` chosen so that `g_c = target`.
    pub fn with_gc(&self, target: f64) -> Self {
        Self {
            t: target / (2.0 * self.g0() * self.delta_over_xc()),
            ..*self
        }
    }

    /// Same parameters with the detuning set so that `Omega x_c / delta = ratio`.
    pub fn with_coupling_ratio(&self, ratio: f64) -> Self {
        Self {
            delta_over_2pi: self.omega_xc() / ratio / TAU,
            ..*self
        }
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::worked_example()
    }
}

/// Dimensionless measurement strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    /// Bare vacuum phase `g_0 t` on `|e>`.
    pub g0_t: f64,
    /// `Delta / x_c`.
    pub delta_over_xc: f64,
    /// `g_c = 2 g_0 t Delta / x_c`: momentum kick on `|e>` in units of `hbar/Delta`.
    pub gc: f64,
    /// `g_c' = g_0 t (Delta / x_c)^2`: quadratic phase on `|e>`.
    pub gc_prime: f64,
}

impl Couplings {
    pub fn new(g0_t: f64, delta_over_xc: f64) -> Self {
        Self {
            g0_t,
            delta_over_xc,
            gc: 2.0 * g0_t * delta_over_xc,
            gc_prime: g0_t * delta_over_xc * delta_over_xc,
        }
    }

    /// Couplings with a prescribed `g_c` at a given `Delta / x_c`.
    pub fn from_gc(gc: f64, delta_over_xc: f64) -> Self {
        Self::new(gc / (2.0 * delta_over_xc), delta_over_xc)
    }

    /// Couplings for an interaction lasting `factor` times as long.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.g0_t * factor, self.delta_over_xc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub warn: f64,
    pub fail: f64,
}

impl Thresholds {
    /// Generic thresholds for a `ratio << 1` condition.
    pub const MUCH_LESS: Thresholds = Thresholds {
        warn: 0.1,
        fail: 0.5,
    };

    pub fn classify(&self, ratio: f64) -> RegimeStatus {
        // relative slack so that a ratio set exactly at the threshold passes
        let slack = 1.0 + 1e-9;
        if !ratio.is_finite() || ratio > self.fail * slack {
            RegimeStatus::Fail
        } else if ratio > self.warn * slack {
            RegimeStatus::Warn
        } else {
            RegimeStatus::Pass
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeFlag {
    pub name: &'static str,
    pub condition: &'static str,
    pub ratio: f64,
    pub thresholds: Thresholds,
    pub status: RegimeStatus,
}

impl RegimeFlag {
    pub fn new(
        name: &'static str,
        condition: &'static str,
        ratio: f64,
        thresholds: Thresholds,
    ) -> Self {
        Self {
            name,
            condition,
            ratio,
            thresholds,
            status: thresholds.classify(ratio),
        }
    }
}

/// Thresholds for the distance of `k x_0` from the edges of `(0, pi/2)`.
pub const K_X0_THRESHOLDS: Thresholds = Thresholds {
    warn: 0.8,
    fail: 0.98,
};

/// Everything [`derive_couplings`] computes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub k: f64,
    pub omega_gradient: f64,
    pub x_c: f64,
    pub omega_xc: f64,
    pub omega_xc_over_2pi: f64,
    pub g0: f64,
    pub g0_over_2pi: f64,
    pub g_c: f64,
    pub g_c_prime: f64,
    pub flags: Vec<RegimeFlag>,
}

impl CouplingReport {
    pub fn status(&self) -> RegimeStatus {
        self.flags
            .iter()
            .map(|f| f.status)
            .max()
            .unwrap_or(RegimeStatus::Pass)
    }

    pub fn flag(&self, name: &str) -> Option<&RegimeFlag> {
        self.flags.iter().find(|f| f.name == name)
    }
}

/// Closeness of `k x_0` to `0` or `pi/2`: zero at `pi/4`, one at either edge.
pub fn k_x0_edge_proximity(k_x0: f64) -> f64 {
    1.0 - k_x0.min(FRAC_PI_2 - k_x0) / FRAC_PI_4
}

pub fn derive_couplings(params: &PhysicalParams) -> Result<CouplingReport> {
    params.validate()?;
    let c = params.couplings();
    let flags = vec![
        RegimeFlag::new(
            "k_delta",
            "k Delta << 1",
            params.k_delta(),
            Thresholds::MUCH_LESS,
        ),
        RegimeFlag::new(
            "k_x0",
            "0 << k x_0 << pi/2",
            k_x0_edge_proximity(params.k_x0),
            K_X0_THRESHOLDS,
        ),
        RegimeFlag::new(
            "coupling_over_detuning",
            "Omega x_c / delta <= 0.1",
            params.coupling_ratio(),
            Thresholds::MUCH_LESS,
        ),
        RegimeFlag::new(
            "impulse",
            "t << m Delta^2 / hbar",
            params.t / params.diffraction_time(),
            Thresholds::MUCH_LESS,
        ),
        RegimeFlag::new(
            "width_over_xc",
            "Delta << x_c",
            params.delta_over_xc(),
            Thresholds::MUCH_LESS,
        ),
        RegimeFlag::new("g_c", "g_c << 1", c.gc, Thresholds::MUCH_LESS),
    ];
    Ok(CouplingReport {
        k: params.k(),
        omega_gradient: params.omega_gradient(),
        x_c: params.x_c(),
        omega_xc: params.omega_xc(),
        omega_xc_over_2pi: params.omega_xc() / TAU,
        g0: params.g0(),
        g0_over_2pi: params.g0() / TAU,
        g_c: c.gc,
        g_c_prime: c.gc_prime,
        flags,
    })
}
