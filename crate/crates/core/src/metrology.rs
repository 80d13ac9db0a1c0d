//! Fisher information with respect to the probe coupling θ = J_C.
//!
//! Derivatives are central differences with one level of Richardson
//! extrapolation, i.e. the five-point stencil
//! `f'(θ) ≈ [8(f(θ+h/2) − f(θ−h/2)) − (f(θ+h) − f(θ−h))] / (6h)`.

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::model::{pauli, Axis, CMatrix, Site, SystemParams, C64};
use crate::spectral::{ground_state, partial_trace, DensityMatrix, GroundState};

/// Probabilities below this are excluded from Fisher sums.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
/// Default step relative to max(1, |θ|).
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference {
    pub step: f64,
    pub richardson: bool,
}

impl FiniteDifference {
    pub fn new(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidStep(step));
        }
        Ok(Self {
            step,
            richardson: true,
        })
    }

    /// Default stride `1e-5 · max(1, |θ|)`.
    pub fn for_theta(theta: f64) -> Self {
        Self::relative(DEFAULT_RELATIVE_STEP, theta)
    }

    pub fn relative(rel: f64, theta: f64) -> Self {
        Self {
            step: rel * theta.abs().max(1.0),
            richardson: true,
        }
    }

    pub fn halved(&self) -> Self {
        Self {
            step: self.step / 2.0,
            ..*self
        }
    }

    /// Positive offsets `o` and weights `w`; the derivative is
    /// `Σ w · (f(θ + o) − f(θ − o))`.
    pub fn stencil(&self) -> Vec<(f64, f64)> {
        let h = self.step;
        if self.richardson {
            vec![(h / 2.0, 4.0 / (3.0 * h)), (h, -1.0 / (6.0 * h))]
        } else {
            vec![(h, 0.5 / h)]
        }
    }

    /// Componentwise derivative of a vector-valued function.
    pub fn derivative<F>(&self, theta: f64, f: F) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> Result<Vec<f64>>,
    {
        let mut acc: Option<Vec<f64>> = None;
        for (offset, weight) in self.stencil() {
            let plus = f(theta + offset)?;
            let minus = f(theta - offset)?;
            let acc = acc.get_or_insert_with(|| vec![0.0; plus.len()]);
            for ((a, p), m) in acc.iter_mut().zip(plus).zip(minus) {
                *a += weight * (p - m);
            }
        }
        Ok(acc.unwrap_or_default())
    }

    pub fn derivative_scalar<F>(&self, theta: f64, f: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        Ok(self.derivative(theta, |x| f(x).map(|v| vec![v]))?[0])
    }
}

pub fn population_probabilities(rho: &DensityMatrix) -> Result<(f64, f64)> {
    if rho.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            rows: rho.dim(),
            cols: rho.dim(),
        });
    }
    Ok((rho.matrix()[(0, 0)].re, rho.matrix()[(1, 1)].re))
}

/// Bloch vector of a single-qubit state.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<Vector3<f64>> {
    if rho.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            rows: rho.dim(),
            cols: rho.dim(),
        });
    }
    let mut v = Vector3::zeros();
    for (i, axis) in Axis::ALL.into_iter().enumerate() {
        v[i] = (rho.matrix() * pauli(axis).matrix()).trace().re;
    }
    Ok(v)
}

pub fn site_state(g: &GroundState, site: Site) -> Result<DensityMatrix> {
    partial_trace(&g.density(), &[site])
}

fn ground_at(p: &SystemParams, theta: f64) -> Result<GroundState> {
    Ok(ground_state(&p.with_jc(theta))?.0)
}

/// Σ_m (dP_m)² / P_m, skipping outcomes below the floor. Returns the value
/// and the number of skipped terms.
fn fisher_sum(probs: &[f64], derivs: &[f64]) -> (f64, usize) {
    let mut value = 0.0;
    let mut skipped = 0;
    for (&p, &dp) in probs.iter().zip(derivs) {
        if p < PROBABILITY_FLOOR {
            skipped += 1;
            continue;
        }
        value += dp * dp / p;
    }
    (value, skipped)
}

fn population_vector(p: &SystemParams, site: Site, theta: f64) -> Result<Vec<f64>> {
    let (p0, p1) = population_probabilities(&site_state(&ground_at(p, theta)?, site)?)?;
    Ok(vec![p0, p1])
}

/// Fisher information of the computational-basis measurement on one qubit.
pub fn classical_fi_population(p: &SystemParams, site: Site, fd: &FiniteDifference) -> Result<f64> {
    let theta = p.j_c;
    let probs = population_vector(p, site, theta)?;
    let derivs = fd.derivative(theta, |x| population_vector(p, site, x))?;
    Ok(fisher_sum(&probs, &derivs).0)
}

/// Signed square root of the population Fisher information,
/// `dP₁/dθ / √(P₀P₁)`; its zeros are the zeros of the Fisher information.
pub fn population_score(p: &SystemParams, site: Site, fd: &FiniteDifference) -> Result<f64> {
    let theta = p.j_c;
    let probs = population_vector(p, site, theta)?;
    let dp1 = fd.derivative_scalar(theta, |x| Ok(population_vector(p, site, x)?[1]))?;
    let denom = (probs[0] * probs[1]).sqrt();
    if denom < PROBABILITY_FLOOR {
        return Ok(0.0);
    }
    Ok(dp1 / denom)
}

/// `(∂|y|/∂θ)² / (1 − |y|²)` for the local vector of one qubit.
///
/// |y| is differenced through its projection on the direction of y(θ), which
/// equals |y| to first order and stays smooth where |y| passes through zero.
pub fn classical_fi_localvector(
    p: &SystemParams,
    site: Site,
    fd: &FiniteDifference,
) -> Result<f64> {
    let theta = p.j_c;
    let y = bloch_vector(&site_state(&ground_at(p, theta)?, site)?)?;
    let norm = y.norm();
    if norm >= 1.0 - crate::geometry::PURE_MARGINAL_TOL {
        return Err(Error::DegenerateMarginal { site, norm });
    }
    let direction = if norm > 1e-12 { y / norm } else { Vector3::z() };
    let dy = fd.derivative_scalar(theta, |x| {
        let yx = bloch_vector(&site_state(&ground_at(p, x)?, site)?)?;
        Ok(yx.dot(&direction))
    })?;
    Ok(dy * dy / (1.0 - norm * norm))
}

/// Aligns the global phase of `v` with `reference`.
fn align_phase(v: &DVector<C64>, reference: &DVector<C64>) -> DVector<C64> {
    let overlap = reference.dotc(v);
    if overlap.norm() == 0.0 {
        return v.clone();
    }
    v * (overlap.conj() / overlap.norm())
}

fn split(v: &DVector<C64>) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn join(parts: &[f64]) -> DVector<C64> {
    DVector::from_iterator(
        parts.len() / 2,
        parts.chunks(2).map(|c| C64::new(c[0], c[1])),
    )
}

/// 4[⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²] for the global ground state.
pub fn qfi_pure(p: &SystemParams, fd: &FiniteDifference) -> Result<f64> {
    let theta = p.j_c;
    let psi = ground_at(p, theta)?.amplitudes;
    let dpsi = join(&fd.derivative(theta, |x| {
        let v = ground_at(p, x)?.amplitudes;
        Ok(split(&align_phase(&v, &psi)))
    })?);
    Ok(pure_state_qfi(&psi, &dpsi))
}

fn pure_state_qfi(psi: &DVector<C64>, dpsi: &DVector<C64>) -> f64 {
    (4.0 * (dpsi.norm_squared() - psi.dotc(dpsi).norm_sqr())).max(0.0)
}

/// Quantum Fisher information of a mixed-state family.
///
/// With ρ = Σ p_n |φ_n⟩⟨φ_n| and D = ⟨φ_m|∂ρ|φ_n⟩ (so D_nn = ∂p_n and
/// D_mn = (p_n − p_m)⟨φ_m|∂φ_n⟩), this evaluates
/// `Σ_n (∂p_n)²/p_n + 2 Σ_{m≠n} (p_m − p_n)²/(p_m + p_n) |⟨φ_m|∂φ_n⟩|²`.
/// Working with ∂ρ avoids tracking eigenvectors across the stencil.
pub fn qfi_mixed<F>(family: F, theta: f64, fd: &FiniteDifference) -> Result<f64>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    let rho = family(theta)?;
    let n = rho.dim();
    let drho_parts = fd.derivative(theta, |x| {
        let m = family(x)?;
        Ok(m.matrix().iter().flat_map(|z| [z.re, z.im]).collect())
    })?;
    let entries: Vec<C64> = drho_parts.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
    let drho = CMatrix::from_column_slice(n, n, &entries);
    let eig = eigh(rho.matrix());
    let d = eig.vectors.adjoint() * drho * &eig.vectors;
    let probs = &eig.values;

    let mut population = 0.0;
    for k in 0..n {
        if probs[k] > PROBABILITY_FLOOR {
            population += d[(k, k)].re.powi(2) / probs[k];
        }
    }
    let mut coherent = 0.0;
    for m in 0..n {
        for k in 0..n {
            let s = probs[m] + probs[k];
            if m != k && s > PROBABILITY_FLOOR {
                coherent += d[(m, k)].norm_sqr() / s;
            }
        }
    }
    Ok((population + 2.0 * coherent).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherReport {
    pub theta: f64,
    pub f_pop_a: f64,
    pub f_pop_b: f64,
    pub f_pop_c: f64,
    /// `None` where the marginal is pure.
    pub f_vec_a: Option<f64>,
    pub f_vec_c: Option<f64>,
    pub qfi_global: f64,
    pub derivative_step: f64,
    /// Outcome probabilities skipped for being below the floor.
    pub floored_terms: usize,
}

/// All Fisher quantities at `p.j_c`, sharing one set of ground-state solves.
pub fn fisher_report(p: &SystemParams, fd: &FiniteDifference) -> Result<FisherReport> {
    let theta = p.j_c;
    let center = ground_at(p, theta)?;
    let samples: Vec<(f64, GroundState, GroundState)> = fd
        .stencil()
        .into_iter()
        .map(|(offset, weight)| {
            Ok((
                weight,
                ground_at(p, theta + offset)?,
                ground_at(p, theta - offset)?,
            ))
        })
        .collect::<Result<_>>()?;

    let combine = |f: &dyn Fn(&GroundState) -> Result<Vec<f64>>| -> Result<Vec<f64>> {
        let mut acc: Option<Vec<f64>> = None;
        for (w, plus, minus) in &samples {
            let (vp, vm) = (f(plus)?, f(minus)?);
            let acc = acc.get_or_insert_with(|| vec![0.0; vp.len()]);
            for ((a, x), y) in acc.iter_mut().zip(vp).zip(vm) {
                *a += w * (x - y);
            }
        }
        Ok(acc.unwrap_or_default())
    };

    let mut floored = 0;
    let mut pop = |site: Site| -> Result<f64> {
        let probs = population_probabilities(&site_state(&center, site)?)?;
        let derivs = combine(&|g| {
            let (a, b) = population_probabilities(&site_state(g, site)?)?;
            Ok(vec![a, b])
        })?;
        let (v, skipped) = fisher_sum(&[probs.0, probs.1], &derivs);
        floored += skipped;
        Ok(v)
    };
    let f_pop_a = pop(Site::A)?;
    let f_pop_b = pop(Site::B)?;
    let f_pop_c = pop(Site::C)?;

    let vec_fi = |site: Site| -> Result<Option<f64>> {
        let y = bloch_vector(&site_state(&center, site)?)?;
        let norm = y.norm();
        if norm >= 1.0 - crate::geometry::PURE_MARGINAL_TOL {
            return Ok(None);
        }
        let direction = if norm > 1e-12 { y / norm } else { Vector3::z() };
        let dy = combine(&|g| Ok(vec![bloch_vector(&site_state(g, site)?)?.dot(&direction)]))?[0];
        Ok(Some(dy * dy / (1.0 - norm * norm)))
    };
    let f_vec_a = vec_fi(Site::A)?;
    let f_vec_c = vec_fi(Site::C)?;

    let psi = &center.amplitudes;
    let dpsi = join(&combine(&|g| Ok(split(&align_phase(&g.amplitudes, psi))))?);
    let qfi_global = pure_state_qfi(psi, &dpsi);

    Ok(FisherReport {
        theta,
        f_pop_a,
        f_pop_b,
        f_pop_c,
        f_vec_a,
        f_vec_c,
        qfi_global,
        derivative_step: fd.step,
        floored_terms: floored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(j: f64, jc: f64) -> SystemParams {
        SystemParams::new(0.1, 5.0, j, jc).unwrap()
    }

    #[test]
    fn stencil_differentiates_polynomials_exactly() {
        let fd = FiniteDifference::new(1e-2).unwrap();
        let d = fd
            .derivative_scalar(0.3, |x| Ok(x.powi(4) - 2.0 * x.powi(3) + x))
            .unwrap();
        let exact = 4.0 * 0.3_f64.powi(3) - 6.0 * 0.3_f64.powi(2) + 1.0;
        assert!((d - exact).abs() < 1e-12);
        assert!(FiniteDifference::new(0.0).is_err());
    }

    #[test]
    fn populations_of_reduced_states() {
        let params = p(0.1, 0.5);
        let g = ground_at(&params, 0.5).unwrap();
        let (a2, b2, n) = (g.alpha.norm_sqr(), g.beta.norm_sqr(), g.norm);
        let (p0, p1) = population_probabilities(&site_state(&g, Site::A).unwrap()).unwrap();
        assert!((p0 - (a2 + b2) / n).abs() < 1e-12 && (p1 - (1.0 + b2) / n).abs() < 1e-12);
        let (c0, c1) = population_probabilities(&site_state(&g, Site::C).unwrap()).unwrap();
        assert!((c0 - 2.0 * b2 / n).abs() < 1e-12 && (c1 - (1.0 + a2) / n).abs() < 1e-12);
        assert!((p0 + p1 - 1.0).abs() < 1e-12);
        let mixed = population_probabilities(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(mixed, (0.5, 0.5));
    }

    #[test]
    fn exchange_symmetric_fisher() {
        let params = p(1.0, 0.8);
        let fd = FiniteDifference::for_theta(0.8);
        let fa = classical_fi_population(&params, Site::A, &fd).unwrap();
        let fb = classical_fi_population(&params, Site::B, &fd).unwrap();
        assert!((fa - fb).abs() <= 1e-12);
    }

    #[test]
    fn constant_family_has_no_information() {
        let fd = FiniteDifference::new(1e-4).unwrap();
        let q = qfi_mixed(|_| Ok(DensityMatrix::maximally_mixed(2)), 0.3, &fd).unwrap();
        assert!(q < 1e-20, "{q}");
        // J = 0: C stays in |1> to first order around J_C = 0.
        let c = classical_fi_population(&p(0.0, 0.0).with_jc(0.0), Site::C, &fd).unwrap();
        assert!(c.abs() < 1e-6, "{c}");
        // J = J_C = 0 is a stationary point of the ground state.
        let q0 = qfi_pure(&SystemParams::new(0.1, 5.0, 0.0, 0.0).unwrap(), &fd).unwrap();
        assert!(q0 >= 0.0);
    }

    #[test]
    fn vector_and_population_forms_agree() {
        let params = p(0.1, 0.5);
        let fd = FiniteDifference::for_theta(0.5);
        for site in [Site::A, Site::C] {
            let a = classical_fi_population(&params, site, &fd).unwrap();
            let b = classical_fi_localvector(&params, site, &fd).unwrap();
            assert!((a - b).abs() <= 1e-4 * a.max(b), "{site:?}: {a} vs {b}");
        }
    }

    #[test]
    fn pure_marginal_is_rejected() {
        let fd = FiniteDifference::for_theta(0.0);
        let err = classical_fi_localvector(&p(0.1, 0.0), Site::C, &fd).unwrap_err();
        assert!(matches!(
            err,
            Error::DegenerateMarginal { site: Site::C, .. }
        ));
    }

    #[test]
    fn cramer_rao_ordering() {
        let params = p(0.1, 0.5);
        let fd = FiniteDifference::for_theta(0.5);
        let r = fisher_report(&params, &fd).unwrap();
        assert!(r.qfi_global >= r.f_pop_a.max(r.f_pop_c) - 1e-6 * (1.0 + r.qfi_global));
        let direct = qfi_pure(&params, &fd).unwrap();
        assert!((direct - r.qfi_global).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn mixed_formula_reduces_to_pure_and_population() {
        let params = p(1.0, 1.2);
        let fd = FiniteDifference::for_theta(1.2);
        let pure = qfi_pure(&params, &fd).unwrap();
        let projector = qfi_mixed(|x| Ok(ground_at(&params, x)?.density()), 1.2, &fd).unwrap();
        assert!((pure - projector).abs() <= 1e-6 * pure);
        let local = qfi_mixed(|x| site_state(&ground_at(&params, x)?, Site::A), 1.2, &fd).unwrap();
        let pop = classical_fi_population(&params, Site::A, &fd).unwrap();
        assert!(
            (local - pop).abs() <= 1e-6 * pop.max(1e-12),
            "{local} vs {pop}"
        );
    }

    #[test]
    fn step_halving_converges() {
        let params = p(0.1, 0.5);
        let fd = FiniteDifference::for_theta(0.5);
        let q1 = qfi_pure(&params, &fd).unwrap();
        let q2 = qfi_pure(&params, &fd.halved()).unwrap();
        assert!((q1 - q2).abs() <= 1e-6 * q1);
    }

    #[test]
    fn score_squares_to_fisher() {
        let params = p(1.0, 0.9);
        let fd = FiniteDifference::for_theta(0.9);
        let s = population_score(&params, Site::A, &fd).unwrap();
        let f = classical_fi_population(&params, Site::A, &fd).unwrap();
        assert!((s * s - f).abs() <= 1e-6 * f.max(1e-12), "{} vs {f}", s * s);
    }
}
