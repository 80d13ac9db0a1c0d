//! Sweeps over the probe coupling J_C and location of the points where the
//! indicator curves cross, vanish or turn around.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ellipsoid, fano, obesity, Party};
use crate::metrology::{
    bloch_vector, fisher_report, population_score, site_state, FiniteDifference,
};
use crate::model::{basis_index, Site, SystemParams};
use crate::spectral::{ground_state, linear_entropy, partial_trace, GroundState, Provenance};

pub const DEFAULT_SCAN_POINTS: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Bisection gives up after this many halvings.
const MAX_BISECTIONS: usize = 200;

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    if points < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 points, got {points}"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if k == points - 1 {
                hi
            } else {
                lo + step * k as f64
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisProbabilities {
    pub p001: f64,
    pub p010: f64,
    pub p100: f64,
    pub p111: f64,
}

impl BasisProbabilities {
    pub fn total(&self) -> f64 {
        self.p001 + self.p010 + self.p100 + self.p111
    }
}

pub fn basis_probabilities(g: &GroundState) -> BasisProbabilities {
    let p = |a, b, c| g.amplitudes[basis_index(a, b, c)].norm_sqr();
    BasisProbabilities {
        p001: p(0, 0, 1),
        p010: p(0, 1, 0),
        p100: p(1, 0, 0),
        p111: p(1, 1, 1),
    }
}

/// Born-rule value next to the simplified expression in α, β, N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityPair {
    pub direct: f64,
    pub paper_form: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionProbabilities {
    /// (|010⟩ + |100⟩)/√2
    pub sym_010_100: ProbabilityPair,
    /// (|001⟩ + |111⟩)/√2
    pub sym_001_111: ProbabilityPair,
    /// (|010⟩ + |001⟩)/√2
    pub sym_010_001: ProbabilityPair,
}

pub fn superposition_probabilities(g: &GroundState) -> SuperpositionProbabilities {
    let amp = |a, b, c| g.amplitudes[basis_index(a, b, c)];
    let pair = |u: (u8, u8, u8), v: (u8, u8, u8)| {
        (amp(u.0, u.1, u.2) + amp(v.0, v.1, v.2)).norm_sqr() / 2.0
    };
    let a = g.alpha.norm_sqr();
    let b = g.beta.norm_sqr();
    let n = g.norm;
    SuperpositionProbabilities {
        sym_010_100: ProbabilityPair {
            direct: pair((0, 1, 0), (1, 0, 0)),
            paper_form: b / n,
        },
        sym_001_111: ProbabilityPair {
            direct: pair((0, 0, 1), (1, 1, 1)),
            paper_form: (a + 1.0) / (2.0 * n),
        },
        sym_010_001: ProbabilityPair {
            direct: pair((0, 1, 0), (0, 0, 1)),
            paper_form: (a + b) / (2.0 * n),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    /// Finite-difference stride relative to max(1, |J_C|).
    pub fd_relative_step: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            fd_relative_step: crate::metrology::DEFAULT_RELATIVE_STEP,
        }
    }
}

/// Everything recorded at one J_C.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub jc: f64,
    pub omega_ab: f64,
    pub omega_ac: f64,
    /// Volume of A's ellipsoid steered from B; 0 when degenerate.
    pub v_ab: f64,
    /// Volume of A's ellipsoid steered from C; 0 when degenerate.
    pub v_ac: f64,
    pub e_c_ab: f64,
    pub e_b_ac: f64,
    pub y_a: f64,
    pub y_c: f64,
    pub f_a: f64,
    pub f_c: f64,
    pub qfi: f64,
    pub basis: BasisProbabilities,
    pub superposition: SuperpositionProbabilities,
    pub degenerate_ab: bool,
    pub degenerate_ac: bool,
    pub provenance: Provenance,
}

pub fn sweep_point(base: &SystemParams, jc: f64, settings: &SweepSettings) -> Result<SweepRecord> {
    let p = base.with_jc(jc);
    p.validate()?;
    let (g, provenance) = ground_state(&p)?;
    let rho = g.density();
    let f_ab = fano(&partial_trace(&rho, &[Site::A, Site::B])?)?;
    let f_ac = fano(&partial_trace(&rho, &[Site::A, Site::C])?)?;
    let e_ab = ellipsoid(&f_ab, Party::First);
    let e_ac = ellipsoid(&f_ac, Party::First);
    let rho_b = site_state(&g, Site::B)?;
    let rho_c = site_state(&g, Site::C)?;
    let fisher = fisher_report(
        &p,
        &FiniteDifference::relative(settings.fd_relative_step, jc),
    )?;
    Ok(SweepRecord {
        jc,
        omega_ab: obesity(&f_ab),
        omega_ac: obesity(&f_ac),
        v_ab: e_ab.volume,
        v_ac: e_ac.volume,
        e_c_ab: linear_entropy(&rho_c),
        e_b_ac: linear_entropy(&rho_b),
        y_a: f_ab.x.norm(),
        y_c: f_ac.y.norm(),
        f_a: fisher.f_pop_a,
        f_c: fisher.f_pop_c,
        qfi: fisher.qfi_global,
        basis: basis_probabilities(&g),
        superposition: superposition_probabilities(&g),
        degenerate_ab: e_ab.degenerate,
        degenerate_ac: e_ac.degenerate,
        provenance,
    })
}

/// One record per grid point, in grid order. Points are evaluated in parallel.
pub fn sweep(
    base: &SystemParams,
    grid: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRecord>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidGrid(format!(
            "grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    grid.par_iter()
        .map(|&jc| sweep_point(base, jc, settings))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    EntropyCrossing,
    LocalVectorCrossing,
    FiZero,
    ObesityZero,
    ProbabilityInversion,
}

impl CriticalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::EntropyCrossing => "entropy_crossing",
            Self::LocalVectorCrossing => "local_vector_crossing",
            Self::FiZero => "fi_zero",
            Self::ObesityZero => "obesity_zero",
            Self::ProbabilityInversion => "probability_inversion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub jc_star: f64,
    pub kind: CriticalKind,
    pub bracket: (f64, f64),
    /// |f − g| at `jc_star`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub points: usize,
    pub tol: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            points: DEFAULT_SCAN_POINTS,
            tol: DEFAULT_TOL,
        }
    }
}

impl ScanSettings {
    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!(
                "scan needs at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Roots of `h` on `[lo, hi]`: sign changes between consecutive nonzero scan
/// samples, each bisected until the bracket is no wider than `tol` and
/// `|h| ≤ tol`. Sign changes that do not shrink below `tol` (jumps) are dropped.
pub fn find_roots<H>(
    h: H,
    lo: f64,
    hi: f64,
    settings: &ScanSettings,
    kind: CriticalKind,
) -> Result<Vec<CriticalPoint>>
where
    H: Fn(f64) -> Result<f64> + Sync,
{
    settings.validate()?;
    let grid = linear_grid(lo, hi, settings.points)?;
    let values: Vec<f64> = grid.par_iter().map(|&x| h(x)).collect::<Result<_>>()?;

    let mut roots = Vec::new();
    let mut previous: Option<(f64, f64)> = None;
    for (&x, &v) in grid.iter().zip(&values) {
        if v == 0.0 {
            continue;
        }
        if let Some((px, pv)) = previous {
            if pv.signum() != v.signum() {
                if let Some(root) = bisect(&h, (px, pv), (x, v), settings.tol, kind)? {
                    roots.push(root);
                }
            }
        }
        previous = Some((x, v));
    }
    Ok(roots)
}

fn bisect<H>(
    h: &H,
    mut a: (f64, f64),
    mut b: (f64, f64),
    tol: f64,
    kind: CriticalKind,
) -> Result<Option<CriticalPoint>>
where
    H: Fn(f64) -> Result<f64>,
{
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a.0 + b.0);
        if mid <= a.0 || mid >= b.0 {
            break;
        }
        let vm = h(mid)?;
        if b.0 - a.0 <= tol && vm.abs() <= tol {
            return Ok(Some(CriticalPoint {
                jc_star: mid,
                kind,
                bracket: (a.0, b.0),
                residual: vm.abs(),
            }));
        }
        if vm == 0.0 {
            let half = 0.25 * (b.0 - a.0).min(tol);
            return Ok(Some(CriticalPoint {
                jc_star: mid,
                kind,
                bracket: (mid - half, mid + half),
                residual: 0.0,
            }));
        }
        if vm.signum() == a.1.signum() {
            a = (mid, vm);
        } else {
            b = (mid, vm);
        }
    }
    Ok(None)
}

/// Points where `f` and `g` cross.
pub fn find_crossings<F, G>(
    f: F,
    g: G,
    lo: f64,
    hi: f64,
    settings: &ScanSettings,
    kind: CriticalKind,
) -> Result<Vec<CriticalPoint>>
where
    F: Fn(f64) -> Result<f64> + Sync,
    G: Fn(f64) -> Result<f64> + Sync,
{
    find_roots(|x| Ok(f(x)? - g(x)?), lo, hi, settings, kind)
}

/// Stationary points of `f`, located as sign changes of its central
/// difference with stride `1e-5 · max(1, |x|)`. `residual` is |f'| there.
pub fn find_extrema<F>(
    f: F,
    lo: f64,
    hi: f64,
    settings: &ScanSettings,
    kind: CriticalKind,
) -> Result<Vec<CriticalPoint>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    find_roots(
        |x| FiniteDifference::for_theta(x).derivative_scalar(x, &f),
        lo,
        hi,
        settings,
        kind,
    )
}

fn ground(base: &SystemParams, jc: f64) -> Result<GroundState> {
    let p = base.with_jc(jc);
    p.validate()?;
    Ok(ground_state(&p)?.0)
}

/// |β|⁴ − |α|² as a function of J_C; Ω_AB vanishes exactly at its zeros.
pub fn obesity_indicator(base: &SystemParams, jc: f64) -> Result<f64> {
    let g = ground(base, jc)?;
    Ok(g.beta.norm_sqr().powi(2) - g.alpha.norm_sqr())
}

pub fn obesity_zeros(
    base: &SystemParams,
    lo: f64,
    hi: f64,
    settings: &ScanSettings,
) -> Result<Vec<CriticalPoint>> {
    find_roots(
        |x| obesity_indicator(base, x),
        lo,
        hi,
        settings,
        CriticalKind::ObesityZero,
    )
}

/// Linear entropies (E_{C|AB}, E_{B|AC}).
pub fn entropies(base: &SystemParams, jc: f64) -> Result<(f64, f64)> {
    let g = ground(base, jc)?;
    Ok((
        linear_entropy(&site_state(&g, Site::C)?),
        linear_entropy(&site_state(&g, Site::B)?),
    ))
}

/// Local-vector lengths (|y_A|, |y_C|).
pub fn local_vector_norms(base: &SystemParams, jc: f64) -> Result<(f64, f64)> {
    let g = ground(base, jc)?;
    Ok((
        bloch_vector(&site_state(&g, Site::A)?)?.norm(),
        bloch_vector(&site_state(&g, Site::C)?)?.norm(),
    ))
}

/// Every kind of critical point on `[lo, hi]`, grouped by kind and ascending
/// in J_C within each kind.
pub fn detect_all(
    base: &SystemParams,
    lo: f64,
    hi: f64,
    settings: &ScanSettings,
) -> Result<Vec<CriticalPoint>> {
    let mut out = find_crossings(
        |x| Ok(entropies(base, x)?.0),
        |x| Ok(entropies(base, x)?.1),
        lo,
        hi,
        settings,
        CriticalKind::EntropyCrossing,
    )?;
    out.extend(find_crossings(
        |x| Ok(local_vector_norms(base, x)?.0),
        |x| Ok(local_vector_norms(base, x)?.1),
        lo,
        hi,
        settings,
        CriticalKind::LocalVectorCrossing,
    )?);
    out.extend(find_roots(
        |x| population_score(&base.with_jc(x), Site::A, &FiniteDifference::for_theta(x)),
        lo,
        hi,
        settings,
        CriticalKind::FiZero,
    )?);
    out.extend(obesity_zeros(base, lo, hi, settings)?);
    out.extend(find_crossings(
        |x| {
            Ok(superposition_probabilities(&ground(base, x)?)
                .sym_010_100
                .direct)
        },
        |x| Ok(basis_probabilities(&ground(base, x)?).p001),
        lo,
        hi,
        settings,
        CriticalKind::ProbabilityInversion,
    )?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(j: f64) -> SystemParams {
        SystemParams::new(0.1, 5.0, j, 0.0).unwrap()
    }

    #[test]
    fn grid_is_inclusive() {
        let g = linear_grid(0.01, 2.0, 200).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[199], 2.0);
        assert!(linear_grid(1.0, 1.0, 3).is_err());
        assert!(linear_grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn decoupled_probe_point() {
        let r = sweep(&base(0.1), &[0.0], &SweepSettings::default()).unwrap();
        let r = &r[0];
        assert!((r.y_c - 1.0).abs() < 1e-12);
        assert!(r.degenerate_ac);
        assert!(r.omega_ac.abs() < 1e-3);
        assert_eq!(r.basis.p010, 0.0);
        assert_eq!(r.basis.p100, 0.0);
        assert_eq!(r.superposition.sym_010_100.direct, 0.0);
    }

    #[test]
    fn unordered_grid_is_rejected() {
        let err = sweep(&base(0.1), &[0.2, 0.1], &SweepSettings::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidGrid(_)));
        assert!(sweep(&base(0.1), &[0.2, 0.2], &SweepSettings::default()).is_err());
    }

    #[test]
    fn record_invariants() {
        let grid = linear_grid(0.01, 2.0, 15).unwrap();
        for r in sweep(&base(0.1), &grid, &SweepSettings::default()).unwrap() {
            assert!((r.basis.total() - 1.0).abs() <= 1e-12);
            assert!((r.basis.p010 - r.basis.p100).abs() <= 1e-12);
            assert!((r.e_c_ab - (1.0 - r.y_c * r.y_c) / 2.0).abs() <= 1e-10);
            assert!((r.e_b_ac - (1.0 - r.y_a * r.y_a) / 2.0).abs() <= 1e-10);
            for pp in [
                r.superposition.sym_010_100,
                r.superposition.sym_001_111,
                r.superposition.sym_010_001,
            ] {
                assert!((0.0..=1.0).contains(&pp.direct));
            }
        }
    }

    #[test]
    fn probabilities_from_alpha_beta() {
        let g = ground(&base(0.1), 0.5).unwrap();
        let (a, b, n) = (g.alpha.norm_sqr(), g.beta.norm_sqr(), g.norm);
        let p = basis_probabilities(&g);
        assert!((p.p001 - a / n).abs() < 1e-12);
        assert!((p.p010 - b / n).abs() < 1e-12);
        assert!((p.p100 - b / n).abs() < 1e-12);
        assert!((p.p111 - 1.0 / n).abs() < 1e-12);
        // Both |010> and |100> carry amplitude -β, so the symmetric overlap is 2|β|²/N.
        let s = superposition_probabilities(&g);
        assert!((s.sym_010_100.direct - 2.0 * b / n).abs() < 1e-12);
        assert!((s.sym_010_100.paper_form - b / n).abs() < 1e-15);
    }

    #[test]
    fn crossings_of_simple_functions() {
        let s = ScanSettings::default();
        let none = find_crossings(Ok, Ok, 0.0, 2.0, &s, CriticalKind::EntropyCrossing).unwrap();
        assert!(none.is_empty());
        let one =
            find_crossings(Ok, |_| Ok(1.0), 0.0, 2.0, &s, CriticalKind::EntropyCrossing).unwrap();
        assert_eq!(one.len(), 1);
        let c = one[0];
        assert!((c.jc_star - 1.0).abs() <= s.tol);
        assert!(c.bracket.0 < c.jc_star && c.jc_star < c.bracket.1);
        assert!(c.residual <= s.tol);
    }

    #[test]
    fn jumps_are_not_roots() {
        let s = ScanSettings::default();
        let step = find_roots(
            |x| Ok(if x < 0.3 { -1.0 } else { 1.0 }),
            0.0,
            1.0,
            &s,
            CriticalKind::FiZero,
        )
        .unwrap();
        assert!(step.is_empty());
    }

    #[test]
    fn extrema_of_simple_functions() {
        let s = ScanSettings::default();
        assert!(
            find_extrema(|_| Ok(3.0), 0.0, 2.0, &s, CriticalKind::FiZero)
                .unwrap()
                .is_empty()
        );
        let e = find_extrema(
            |x| Ok((x - 1.0).powi(2)),
            0.0,
            2.0,
            &s,
            CriticalKind::FiZero,
        )
        .unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0].jc_star - 1.0).abs() <= s.tol);
    }

    #[test]
    fn empty_bracket_has_no_obesity_zero() {
        let z = obesity_zeros(&base(0.1), 1.0, 2.0, &ScanSettings::default()).unwrap();
        assert!(z.is_empty());
    }

    #[test]
    fn obesity_vanishes_at_its_zeros() {
        let s = ScanSettings::default();
        let zeros = obesity_zeros(&base(0.1), 0.01, 2.0, &s).unwrap();
        assert!(!zeros.is_empty());
        for z in zeros {
            let r = sweep_point(&base(0.1), z.jc_star, &SweepSettings::default()).unwrap();
            assert!(r.omega_ab <= 1e-3, "{}", r.omega_ab);
            assert!(r.v_ab <= 1e-10, "{}", r.v_ab);
        }
    }

    #[test]
    fn entropy_and_local_vector_crossings_coincide() {
        let s = ScanSettings::default();
        let all = detect_all(&base(0.1), 0.01, 2.0, &s).unwrap();
        let pick = |k| {
            all.iter()
                .filter(|c| c.kind == k)
                .map(|c| c.jc_star)
                .collect::<Vec<_>>()
        };
        let e = pick(CriticalKind::EntropyCrossing);
        let y = pick(CriticalKind::LocalVectorCrossing);
        assert!(!e.is_empty());
        assert_eq!(e.len(), y.len());
        for (a, b) in e.iter().zip(&y) {
            assert!((a - b).abs() <= 10.0 * s.tol, "{a} vs {b}");
        }
    }

    #[test]
    fn probability_inversions_by_definition() {
        let s = ScanSettings::default();
        let b = base(0.1);
        let all = detect_all(&b, 0.01, 2.0, &s).unwrap();
        let entropy: Vec<f64> = all
            .iter()
            .filter(|c| c.kind == CriticalKind::EntropyCrossing)
            .map(|c| c.jc_star)
            .collect();
        // Born-rule inversion sits where |α|² = 2|β|², which is not an entropy crossing.
        for c in all
            .iter()
            .filter(|c| c.kind == CriticalKind::ProbabilityInversion)
        {
            let g = ground(&b, c.jc_star).unwrap();
            assert!((g.alpha.norm_sqr() - 2.0 * g.beta.norm_sqr()).abs() < 1e-6);
            assert!(entropy.iter().all(|e| (e - c.jc_star).abs() > 1e-3));
        }
        // The simplified form |β|²/N meets P_001 at |α|² = |β|², where the
        // local vectors of A and C have equal length.
        let simplified = find_crossings(
            |x| {
                Ok(superposition_probabilities(&ground(&b, x)?)
                    .sym_010_100
                    .paper_form)
            },
            |x| Ok(basis_probabilities(&ground(&b, x)?).p001),
            0.01,
            2.0,
            &s,
            CriticalKind::ProbabilityInversion,
        )
        .unwrap();
        assert!(!simplified.is_empty());
        for c in simplified {
            assert!(
                entropy
                    .iter()
                    .any(|e| (e - c.jc_star).abs() <= 10.0 * s.tol),
                "{}",
                c.jc_star
            );
        }
    }
}
