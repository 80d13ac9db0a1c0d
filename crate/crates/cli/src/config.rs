use std::path::{Path, PathBuf};

use crossover_core::circuit::CircuitParams;
use crossover_core::crossover::{ScanSettings, SweepSettings, DEFAULT_SCAN_POINTS, DEFAULT_TOL};
use crossover_core::metrology::DEFAULT_RELATIVE_STEP;
use crossover_core::model::SystemParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: SystemParams,
    pub circuit: Option<CircuitParams>,
    pub sweep: SweepRange,
    pub circuit_sweep: FluxRange,
    pub numerics: Numerics,
    pub verify: VerifySettings,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: SystemParams {
                omega0: 0.1,
                omega_c: 5.0,
                j: 0.1,
                j_c: 0.5,
            },
            circuit: None,
            sweep: SweepRange::default(),
            circuit_sweep: FluxRange::default(),
            numerics: Numerics::default(),
            verify: VerifySettings::default(),
            output: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepRange {
    pub jc_min: f64,
    pub jc_max: f64,
    pub points: usize,
}

impl Default for SweepRange {
    fn default() -> Self {
        Self {
            jc_min: 0.01,
            jc_max: 2.0,
            points: 200,
        }
    }
}

/// Range of flux_AC = flux_BC for `circuit --sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxRange {
    pub flux_min: f64,
    pub flux_max: f64,
    pub points: usize,
}

impl Default for FluxRange {
    fn default() -> Self {
        Self {
            flux_min: 0.0,
            flux_max: 0.45,
            points: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Finite-difference stride relative to max(1, |J_C|).
    pub fd_step: f64,
    pub scan_points: usize,
    pub tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            fd_step: DEFAULT_RELATIVE_STEP,
            scan_points: DEFAULT_SCAN_POINTS,
            tol: DEFAULT_TOL,
        }
    }
}

impl Numerics {
    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            fd_relative_step: self.fd_step,
        }
    }

    pub fn scan_settings(&self) -> ScanSettings {
        ScanSettings {
            points: self.scan_points,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Signal couplings J covered by the grid checks.
    pub js: Vec<f64>,
    pub jc_min: f64,
    pub jc_max: f64,
    pub points: usize,
    /// Bracket searched for crossings and obesity zeros.
    pub bracket: (f64, f64),
    pub lindblad_j: f64,
    pub lindblad_jcs: Vec<f64>,
    /// Rescaled rate used for the rate-independence check.
    pub lindblad_rate: f64,
    pub sensitivity_j: f64,
    pub oracle_points: usize,
    pub tolerances: Tolerances,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            js: vec![0.1, 1.0],
            jc_min: 0.01,
            jc_max: 3.0,
            points: 200,
            bracket: (0.01, 2.0),
            lindblad_j: 0.1,
            lindblad_jcs: vec![0.2, 0.5, 1.0],
            lindblad_rate: 0.37,
            sensitivity_j: 1.0,
            oracle_points: 10_000,
            tolerances: Tolerances::default(),
        }
    }
}

/// Pass thresholds. Zero is allowed and forces a failure wherever the
/// measured residual is not exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub infidelity: f64,
    pub obesity_abs: f64,
    pub volume_rel: f64,
    pub lindblad_trace_distance: f64,
    pub lindblad_rate_change: f64,
    pub crossing: f64,
    pub fi_equivalence_rel: f64,
    pub exchange: f64,
    pub cramer_rao_slack: f64,
    pub sensitivity: f64,
    pub probability: f64,
    pub circuit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            infidelity: 1e-10,
            obesity_abs: 1e-9,
            volume_rel: 1e-6,
            lindblad_trace_distance: 1e-8,
            lindblad_rate_change: 1e-9,
            crossing: 1e-7,
            fi_equivalence_rel: 1e-4,
            exchange: 1e-12,
            cramer_rao_slack: 1e-6,
            sensitivity: 1e-6,
            probability: 1e-12,
            circuit: 1e-12,
        }
    }
}

impl Tolerances {
    fn values(&self) -> [(&'static str, f64); 12] {
        [
            ("infidelity", self.infidelity),
            ("obesity_abs", self.obesity_abs),
            ("volume_rel", self.volume_rel),
            ("lindblad_trace_distance", self.lindblad_trace_distance),
            ("lindblad_rate_change", self.lindblad_rate_change),
            ("crossing", self.crossing),
            ("fi_equivalence_rel", self.fi_equivalence_rel),
            ("exchange", self.exchange),
            ("cramer_rao_slack", self.cramer_rao_slack),
            ("sensitivity", self.sensitivity),
            ("probability", self.probability),
            ("circuit", self.circuit),
        ]
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if let Err(e) = self.params.validate() {
            return bad(e.to_string());
        }
        let s = &self.sweep;
        if !(s.jc_min.is_finite() && s.jc_max.is_finite() && s.jc_min < s.jc_max) {
            return bad(format!(
                "invalid sweep range: jc_min = {}, jc_max = {}",
                s.jc_min, s.jc_max
            ));
        }
        if s.points < 2 {
            return bad(format!(
                "invalid sweep range: need at least 2 points, got {}",
                s.points
            ));
        }
        let f = &self.circuit_sweep;
        if !(f.flux_min.is_finite() && f.flux_max.is_finite() && f.flux_min < f.flux_max)
            || f.points < 2
        {
            return bad(format!(
                "invalid flux range: flux_min = {}, flux_max = {}, points = {}",
                f.flux_min, f.flux_max, f.points
            ));
        }
        let n = &self.numerics;
        if !(n.fd_step.is_finite() && n.fd_step > 0.0) {
            return bad(format!("fd_step must be positive, got {}", n.fd_step));
        }
        if !(n.tol.is_finite() && n.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", n.tol));
        }
        if n.scan_points < 2 {
            return bad(format!(
                "scan_points must be at least 2, got {}",
                n.scan_points
            ));
        }
        let v = &self.verify;
        if v.points < 2
            || !(v.jc_min < v.jc_max)
            || !(v.bracket.0 < v.bracket.1)
            || v.oracle_points < 2
        {
            return bad("invalid verify grid".into());
        }
        for (name, tol) in v.tolerances.values() {
            if !(tol >= 0.0) {
                return bad(format!(
                    "verify tolerance {name} must be non-negative, got {tol}"
                ));
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }
}
