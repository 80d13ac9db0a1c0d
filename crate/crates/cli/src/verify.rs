//! Self-checks of the numerical pipeline against closed forms, identities and
//! independent oracles.

use std::fmt;

use crossover_core::circuit::{
    circuit_spectrum, effective_hamiltonian, effective_params, CircuitParams, CircuitUnits,
    CouplerParams, Transmon, TransmonParams,
};
use crossover_core::crossover::{
    basis_probabilities, entropies, find_crossings, find_extrema, find_roots, linear_grid,
    local_vector_norms, obesity_zeros, superposition_probabilities, CriticalKind, ScanSettings,
};
use crossover_core::geometry::{
    closed_forms, ellipsoid, fano, obesity, volume_from_obesity, Party,
};
use crossover_core::linalg::trace_distance;
use crossover_core::lindblad::{build_jump_operators, build_liouvillian, steady_state};
use crossover_core::metrology::{fisher_report, population_score, FiniteDifference};
use crossover_core::model::{basis_index, build_hamiltonian, Site, SystemParams};
use crossover_core::spectral::{
    ground_state, ground_state_numeric, partial_trace, GroundState, Provenance,
};
use rayon::prelude::*;

use crate::config::{RunConfig, Tolerances, VerifySettings};
use crate::CliError;

pub const CHECKS: [&str; 11] = [
    "ground-state",
    "closed-form-obesity",
    "ellipsoid-volume",
    "closed-form-volumes",
    "lindblad",
    "crossing",
    "fisher",
    "sensitivity",
    "obesity-zeros",
    "probabilities",
    "circuit",
];

/// Marginals closer than this to pure are excluded from volume comparisons.
const VOLUME_PURITY_MARGIN: f64 = 1e-6;
/// Local-vector window for comparing the two classical Fisher forms.
const FI_WINDOW: (f64, f64) = (1e-3, 1.0 - 1e-3);

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    /// Threshold when the measurement is a residual.
    pub tolerance: Option<f64>,
    pub ok: bool,
}

impl Measurement {
    pub fn at_most(label: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            value,
            tolerance: Some(tolerance),
            ok: value <= tolerance,
        }
    }

    pub fn condition(label: impl Into<String>, value: f64, ok: bool) -> Self {
        Self {
            label: label.into(),
            value,
            tolerance: None,
            ok,
        }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tolerance {
            Some(t) => write!(f, "{} = {:.3e} (tol {:.1e})", self.label, self.value, t),
            None => write!(f, "{} = {}", self.label, self.value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub measurements: Vec<Measurement>,
    pub seconds: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        write!(f, "{tag} {:<20}", self.name)?;
        if self.status != Status::Skipped {
            let parts: Vec<String> = self.measurements.iter().map(|m| m.to_string()).collect();
            write!(f, " {} [{:.2}s]", parts.join("; "), self.seconds)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self
            .checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .count();
        let skipped = self
            .checks
            .iter()
            .filter(|c| c.status == Status::Skipped)
            .count();
        write!(
            f,
            "{} checks: {} passed, {failed} failed, {skipped} skipped",
            self.checks.len(),
            self.checks.len() - failed - skipped
        )
    }
}

/// Runs every check not listed in `skip`.
pub fn run(cfg: &RunConfig, skip: &[String]) -> Result<VerifyReport, CliError> {
    for name in skip {
        if !CHECKS.contains(&name.as_str()) {
            return Err(CliError::Config(format!(
                "unknown check '{name}'; available: {}",
                CHECKS.join(", ")
            )));
        }
    }
    let mut checks = Vec::new();
    for name in CHECKS {
        if skip.iter().any(|s| s == name) {
            checks.push(CheckResult {
                name,
                status: Status::Skipped,
                measurements: Vec::new(),
                seconds: 0.0,
            });
            continue;
        }
        let start = std::time::Instant::now();
        let measurements = run_check(name, cfg)?;
        let status = if measurements.iter().all(|m| m.ok) {
            Status::Pass
        } else {
            Status::Fail
        };
        checks.push(CheckResult {
            name,
            status,
            measurements,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(VerifyReport { checks })
}

pub fn run_check(name: &str, cfg: &RunConfig) -> Result<Vec<Measurement>, CliError> {
    let v = &cfg.verify;
    let t = &v.tolerances;
    let base = cfg.params;
    let scan = cfg.numerics.scan_settings();
    Ok(match name {
        "ground-state" => check_ground_state(&base, v, t)?,
        "closed-form-obesity" => check_closed_form_obesity(&base, v, t)?,
        "ellipsoid-volume" => check_ellipsoid_volume(&base, v, t)?,
        "closed-form-volumes" => check_closed_form_volumes(&base, v, t)?,
        "lindblad" => check_lindblad(&base, v, t)?,
        "crossing" => check_crossing(&base, v, t, &scan)?,
        "fisher" => check_fisher(&base, v, t, cfg.numerics.fd_step)?,
        "sensitivity" => check_sensitivity(&base, v, t, &scan)?,
        "obesity-zeros" => check_obesity_zeros(&base, v, &scan)?,
        "probabilities" => check_probabilities(&base, v, t)?,
        "circuit" => check_circuit(cfg.circuit.as_ref(), t)?,
        other => return Err(CliError::Config(format!("unknown check '{other}'"))),
    })
}

/// (J, J_C) pairs of the verification grid.
pub fn grid_points(base: &SystemParams, v: &VerifySettings) -> Result<Vec<SystemParams>, CliError> {
    let grid = linear_grid(v.jc_min, v.jc_max, v.points)?;
    Ok(v.js
        .iter()
        .flat_map(|&j| {
            grid.iter().map(move |&jc| SystemParams {
                j,
                j_c: jc,
                ..*base
            })
        })
        .collect())
}

fn par_map<T, F>(points: &[SystemParams], f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(&SystemParams) -> Result<T, CliError> + Sync + Send,
{
    points.par_iter().map(f).collect()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn check_ground_state(
    base: &SystemParams,
    v: &VerifySettings,
    t: &Tolerances,
) -> Result<Vec<Measurement>, CliError> {
    let points = grid_points(base, v)?;
    let rows = par_map(&points, |p| {
        let (g, provenance) = ground_state(p)?;
        let numeric = ground_state_numeric(&build_hamiltonian(p))?;
        Ok((
            1.0 - g.fidelity(&numeric),
            provenance == Provenance::Numeric,
        ))
    })?;
    let analytic: Vec<f64> = rows.iter().filter(|r| !r.1).map(|r| r.0).collect();
    let fallbacks = rows.len() - analytic.len();
    Ok(vec![
        Measurement::at_most("max analytic infidelity", max_of(analytic), t.infidelity),
        Measurement::condition("numeric fallbacks", fallbacks as f64, true),
    ])
}

struct Pair {
    g: GroundState,
    ab: crossover_core::geometry::FanoDecomposition,
    ac: crossover_core::geometry::FanoDecomposition,
}

fn pairs(p: &SystemParams) -> Result<Pair, CliError> {
    let (g, _) = ground_state(p)?;
    let rho = g.density();
    let ab = fano(&partial_trace(&rho, &[Site::A, Site::B])?)?;
    let ac = fano(&partial_trace(&rho, &[Site::A, Site::C])?)?;
    Ok(Pair { g, ab, ac })
}

fn check_closed_form_obesity(
    base: &SystemParams,
    v: &VerifySettings,
    t: &Tolerances,
) -> Result<Vec<Measurement>, CliError> {
    let points = grid_points(base, v)?;
    let rows = par_map(&points, |p| {
        let s = pairs(p)?;
        let c = closed_forms(s.g.alpha, s.g.beta, s.g.norm)?;
        Ok((
            (c.omega_ab - obesity(&s.ab)).abs(),
            (c.omega_ac - obesity(&s.ac)).abs(),
        ))
    })?;
    Ok(vec![
        Measurement::at_most(
            "max |dOmega_AB|",
            max_of(rows.iter().map(|r| r.0)),
            t.obesity_abs,
        ),
        Measurement::at_most(
            "max |dOmega_AC|",
            max_of(rows.iter().map(|r| r.1)),
            t.obesity_abs,
        ),
    ])
}

/// Ellipsoid of A steered by the second party of `f`, if that party's
/// marginal is mixed enough for the comparison.
fn usable_ellipsoid(
    f: &crossover_core::geometry::FanoDecomposition,
) -> Option<crossover_core::geometry::SteeringEllipsoid> {
    let e = ellipsoid(f, Party::First);
    (!e.degenerate && f.y.norm() < 1.0 - VOLUME_PURITY_MARGIN).then_some(e)
}

fn check_ellipsoid_volume(
    base: &SystemParams,
    v: &VerifySettings,
    t: &Tolerances,
) -> Result<Vec<Measurement>, CliError> {
    let points = grid_points(base, v)?;
    let rows = par_map(&points, |p| {
        let s = pairs(p)?;
        let rel = |f| {
            usable_ellipsoid(f)
                .map(|e| relative(e.volume, volume_from_obesity(e.gamma, e.obesity)))
                .unwrap_or(0.0)
        };
        Ok((rel(&s.ab), rel(&s.ac)))
    })?;
    Ok(vec![
        Measurement::at_most(
            "max rel dV_AB",
            max_of(rows.iter().map(|r| r.0)),
            t.volume_rel,
        ),
        Measurement::at_most(
            "max rel dV_AC",
            max_of(rows.iter().map(|r| r.1)),
            t.volume_rel,
        ),
    ])
}

fn check_closed_form_volumes(
    base: &SystemParams,
    v: &VerifySettings,
    t: &Tolerances,
) -> Result<Vec<Measurement>, CliError> {
    let points = grid_points(base, v)?;
    let rows = par_map(&points, |p| {
        let s = pairs(p)?;
        let c = closed_forms(s.g.alpha, s.g.beta, s.g.norm)?;
        let rel = |f, closed: Option<f64>| match (usable_ellipsoid(f), closed) {
            (Some(e), Some(x)) => relative(x, e.volume),
            _ => 0.0,
        };
        Ok((rel(&s.ab, c.v_ab), rel(&s.ac, c.v_ac)))
    })?;
    Ok(vec![
        Measurement::at_most(
            "max rel (V_AB closed form - ellipsoid)",
            max_of(rows.iter().map(|r| r.0)),
            t.volume_rel,
        ),
        Measurement::at_most(
            "max rel (V_AC closed form - ellipsoid)",
            max_of(rows.iter().map(|r| r.1)),
            t.volume_rel,
        ),
    ])
}

fn check_lindblad(
    base: &SystemParams,
    v: &VerifySettings,
    t: &Tolerances,
) -> Result<Vec<Measurement>, CliError> {
    let mut distance: f64 = 0.0;
    let mut rate_change: f64 = 0.0;
    for &jc in &v.lindblad_jcs {
        let p = SystemParams {
            j: v.lindblad_j,
            j_c: jc,
            ..*base
        };
        let h = build_hamiltonian(&p);
        let ground = ground_state(&p)?.0.density();
        let unit = steady_state(&build_liouvillian(
            &h,
            &build_jump_operators(&h, [1.0; 3])?,
        )?)?;
        let r = v.lindblad_rate;
        let scaled = steady_state(&build_liouvillian(&h, &build_jump_operators(&h, [r; 3])?)?)?;
        distance = distance.max(trace_distance(unit.matrix(), ground.matrix()));
        rate_change = rate_change.max(trace_distance(unit.matrix(), scaled.matrix()));
    }
    Ok(vec![
        Measurement::at_most(
            "max trace distance to ground",
            distance,
            t.lindblad_trace_distance,
        ),
        Measurement::at_most(
            "max change under rate rescaling",
            rate_change,
            t.lindblad_rate_change,
        ),
    ])
}

fn check_crossing(
    base: &SystemParams,
    v: &VerifySettings,
    t: &Tolerances,
    scan: &ScanSettings,
) -> Result<Vec<Measurement>, CliError> {
    let (lo, hi) = v.bracket;
    let mut worst: f64 = 0.0;
    let mut found_at_first = 0usize;
    for (k, &j) in v.js.iter().enumerate() {
        let p = SystemParams { j, ..*base };
        let e = find_crossings(
            |x| Ok(entropies(&p, x)?.0),
            |x| Ok(entropies(&p, x)?.1),
            lo,
            hi,
            scan,
            CriticalKind::EntropyCrossing,
        )?;
        let y = find_crossings(
            |x| Ok(local_vector_norms(&p, x)?.0),
            |x| Ok(local_vector_norms(&p, x)?.1),
            lo,
            hi,
            scan,
            CriticalKind::LocalVectorCrossing,
        )?;
        if e.len() != y.len() {
            worst = f64::INFINITY;
        } else {
            worst = worst.max(max_of(
                e.iter().zip(&y).map(|(a, b)| (a.jc_star - b.jc_star).abs()),
            ));
        }
        if k == 0 {
            found_at_first = e.len();
        }
    }
    Ok(vec![
        Measurement::at_most("max |JC*(entropy) - JC*(local vector)|", worst, t.crossing),
        Measurement::condition(
            format!(
                "entropy crossings at J = {}",
                v.js.first().copied().unwrap_or(f64::NAN)
            ),
            found_at_first as f64,
            found_at_first >= 1,
        ),
    ])
}

fn check_fisher(
    base: &SystemParams,
    v: &VerifySettings,
    t: &Tolerances,
    fd_step: f64,
) -> Result<Vec<Measurement>, CliError> {
    let points = grid_points(base, v)?;
    let rows = par_map(&points, |p| {
        let r = fisher_report(p, &FiniteDifference::relative(fd_step, p.j_c))?;
        let s = pairs(p)?;
        let in_window = |y: f64| y >= FI_WINDOW.0 && y <= FI_WINDOW.1;
        let mut equivalence: f64 = 0.0;
        if let (Some(fv), true) = (r.f_vec_a, in_window(s.ab.x.norm())) {
            equivalence = equivalence.max(relative(r.f_pop_a, fv));
        }
        if let (Some(fv), true) = (r.f_vec_c, in_window(s.ac.y.norm())) {
            equivalence = equivalence.max(relative(r.f_pop_c, fv));
        }
        let exchange = (r.f_pop_a - r.f_pop_b).abs();
        let site_max = r.f_pop_a.max(r.f_pop_b).max(r.f_pop_c);
        let violation = if site_max > r.qfi_global {
            (site_max - r.qfi_global) / r.qfi_global.max(f64::MIN_POSITIVE)
        } else {
            0.0
        };
        Ok((equivalence, exchange, violation))
    })?;
    Ok(vec![
        Measurement::at_most(
            "max rel (population FI - local-vector FI)",
            max_of(rows.iter().map(|r| r.0)),
            t.fi_equivalence_rel,
        ),
        Measurement::at_most(
            "max |F_A - F_B|",
            max_of(rows.iter().map(|r| r.1)),
            t.exchange,
        ),
        Measurement::at_most(
            "max rel excess of site FI over QFI",
            max_of(rows.iter().map(|r| r.2)),
            t.cramer_rao_slack,
        ),
    ])
}

fn check_sensitivity(
    base: &SystemParams,
    v: &VerifySettings,
    t: &Tolerances,
    scan: &ScanSettings,
) -> Result<Vec<Measurement>, CliError> {
    let p = SystemParams {
        j: v.sensitivity_j,
        ..*base
    };
    let (lo, hi) = v.bracket;
    let zeros = find_roots(
        |x| population_score(&p.with_jc(x), Site::A, &FiniteDifference::for_theta(x)),
        lo,
        hi,
        scan,
        CriticalKind::FiZero,
    )?;
    let extrema = find_extrema(
        |x| Ok(local_vector_norms(&p, x)?.0),
        lo,
        hi,
        scan,
        CriticalKind::FiZero,
    )?;
    let worst = max_of(zeros.iter().map(|z| {
        extrema
            .iter()
            .map(|e| (e.jc_star - z.jc_star).abs())
            .fold(f64::INFINITY, f64::min)
    }));
    Ok(vec![
        Measurement::at_most(
            "max |JC*(F_A = 0) - JC*(|y_A| extremum)|",
            worst,
            t.sensitivity,
        ),
        Measurement::condition("F_A zeros", zeros.len() as f64, !zeros.is_empty()),
    ])
}

/// Zeros of |β|⁴ − |α|² counted by sign changes on a dense grid, using
/// amplitudes from direct diagonalization.
pub fn dense_obesity_zero_count(
    base: &SystemParams,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<usize, CliError> {
    let grid = linear_grid(lo, hi, points)?;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&jc| {
            let g = ground_state_numeric(&build_hamiltonian(&base.with_jc(jc)))?;
            let top = g.amplitudes[basis_index(1, 1, 1)].norm_sqr();
            let a = g.amplitudes[basis_index(0, 0, 1)].norm_sqr() / top;
            let b = g.amplitudes[basis_index(0, 1, 0)].norm_sqr() / top;
            Ok(b * b - a)
        })
        .collect::<Result<_, CliError>>()?;
    let signs: Vec<f64> = values
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.signum())
        .collect();
    Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
}

fn check_obesity_zeros(
    base: &SystemParams,
    v: &VerifySettings,
    scan: &ScanSettings,
) -> Result<Vec<Measurement>, CliError> {
    let (lo, hi) = v.bracket;
    let mut out = Vec::new();
    for &j in &v.js {
        let p = SystemParams { j, ..*base };
        let found = obesity_zeros(&p, lo, hi, scan)?.len();
        let oracle = dense_obesity_zero_count(&p, lo, hi, v.oracle_points)?;
        out.push(Measurement::condition(
            format!("J = {j}: zeros found {found}, oracle"),
            oracle as f64,
            found == oracle,
        ));
    }
    Ok(out)
}

fn check_probabilities(
    base: &SystemParams,
    v: &VerifySettings,
    t: &Tolerances,
) -> Result<Vec<Measurement>, CliError> {
    let points = grid_points(base, v)?;
    let rows = par_map(&points, |p| {
        let (g, _) = ground_state(p)?;
        let b = basis_probabilities(&g);
        let s = superposition_probabilities(&g);
        let in_range = [s.sym_010_100, s.sym_001_111, s.sym_010_001]
            .iter()
            .all(|pp| (0.0..=1.0).contains(&pp.direct));
        Ok(((b.total() - 1.0).abs(), (b.p010 - b.p100).abs(), in_range))
    })?;
    let outside = rows.iter().filter(|r| !r.2).count();
    Ok(vec![
        Measurement::at_most(
            "max |sum P - 1|",
            max_of(rows.iter().map(|r| r.0)),
            t.probability,
        ),
        Measurement::at_most(
            "max |P_010 - P_100|",
            max_of(rows.iter().map(|r| r.1)),
            t.probability,
        ),
        Measurement::condition(
            "superposition values outside [0,1]",
            outside as f64,
            outside == 0,
        ),
    ])
}

/// Symmetric reference device used when the configuration has no circuit.
pub fn reference_circuit() -> CircuitParams {
    let qubit = Transmon { ec: 0.25, ej: 12.5 };
    CircuitParams {
        transmons: TransmonParams {
            a: qubit,
            b: qubit,
            c: Transmon { ec: 0.2, ej: 20.0 },
        },
        coupler: CouplerParams {
            l0_nh: 20.0,
            flux_ab: 0.1,
            flux_ac: 0.3,
            flux_bc: 0.3,
        },
        units: CircuitUnits::default(),
    }
}

fn check_circuit(
    circuit: Option<&CircuitParams>,
    t: &Tolerances,
) -> Result<Vec<Measurement>, CliError> {
    let c = circuit.copied().unwrap_or_else(reference_circuit);
    let with_ab = |flux| {
        let mut d = c;
        d.coupler.flux_ab = flux;
        circuit_spectrum(&d).map(|s| s.0.g_ab)
    };
    let g0 = with_ab(0.0)?;
    let half = with_ab(0.5)?.abs();
    let mut ratio: f64 = 0.0;
    for flux in [0.05, 0.1, 0.2, 0.25, 0.3, 0.4, 0.45] {
        ratio = ratio.max((with_ab(flux)? / g0 - (std::f64::consts::PI * flux).cos().abs()).abs());
    }
    let mapping = effective_params(&c)?;
    let diff = build_hamiltonian(&mapping.params).matrix()
        - effective_hamiltonian(&mapping.spectrum).matrix();
    let identity = max_of(diff.iter().map(|z| z.norm()));
    Ok(vec![
        Measurement::at_most("|g(1/2)|", half, 0.0),
        Measurement::at_most("max |g(flux)/g(0) - |cos(pi flux)||", ratio, t.circuit),
        Measurement::at_most("max |H(mapped) - H(circuit)|", identity, t.circuit),
    ])
}
