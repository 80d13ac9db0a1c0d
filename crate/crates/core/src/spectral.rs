//! Ground state of the three-qubit Hamiltonian, computed numerically and in
//! closed form, plus density matrices and reduced states.
//!
//! The ground state lives in the odd-parity, A↔B-symmetric sector
//! {|001⟩, |010⟩ + |100⟩, |111⟩}:
//!
//! ```text
//! |ψ_G⟩ = (0, −α, −β, 0, −β, 0, 0, 1)ᵀ / √N,   N = 1 + |α|² + 2|β|²
//! ```
//!
//! The closed form solves the cubic secular equation of that sector; `t` is
//! one of its roots (numerically twice the corresponding energy).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, outer};
use crate::model::{
    build_hamiltonian, hermitian_deviation, CMatrix, HermitianMatrix, Site, SystemParams, C64,
};

/// Relative spectral gap below which the ground level counts as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-10;
/// Smallest |111⟩ amplitude for which α and β are extracted.
pub const MIN_REFERENCE_AMPLITUDE: f64 = 1e-8;
/// Denominator guard of the closed form, relative to max(|J|, |J_C|, ω_C)².
pub const SINGULARITY_REL_TOL: f64 = 1e-12;
/// Largest imaginary part tolerated in α, β before the branch is rejected.
pub const BRANCH_IMAG_TOL: f64 = 1e-8;

const DENSITY_TRACE_TOL: f64 = 1e-12;
const DENSITY_HERMITIAN_TOL: f64 = 1e-14;
const DENSITY_PSD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Numeric,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    /// Normalized amplitudes with the |111⟩ component real and positive.
    pub amplitudes: DVector<C64>,
    pub energy: f64,
    pub alpha: C64,
    pub beta: C64,
    pub norm: f64,
    /// Root of the cubic selected by the closed form; `None` for numeric states.
    pub t_root: Option<C64>,
}

impl GroundState {
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(&self.amplitudes)
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &GroundState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// Lowest eigenvector of an 8×8 Hamiltonian, gauge-fixed so that the |111⟩
/// amplitude is real positive.
pub fn ground_state_numeric(h: &HermitianMatrix) -> Result<GroundState> {
    if h.dim() != 8 {
        return Err(Error::Dimension {
            expected: 8,
            rows: h.dim(),
            cols: h.dim(),
        });
    }
    let eig = eigh(h.matrix());
    let range = eig.values[7] - eig.values[0];
    let gap = eig.values[1] - eig.values[0];
    let threshold = DEGENERACY_REL_TOL * range;
    if gap <= threshold {
        return Err(Error::DegenerateGround { gap, threshold });
    }
    let mut psi = eig.vector(0);
    let reference = psi[7];
    if reference.norm() < MIN_REFERENCE_AMPLITUDE {
        return Err(Error::RatioUndefined {
            amplitude: reference.norm(),
        });
    }
    psi *= reference.conj() / reference.norm();
    let a7 = psi[7];
    Ok(GroundState {
        alpha: -psi[1] / a7,
        beta: -psi[2] / a7,
        norm: 1.0 / a7.norm_sqr(),
        energy: eig.values[0],
        t_root: None,
        amplitudes: psi,
    })
}

/// Coefficients A and B of the depressed cubic.
fn cubic_coefficients(p: &SystemParams) -> (f64, f64) {
    let (w, wc, j, jc) = (p.omega0, p.omega_c, p.j, p.j_c);
    let a = 4.0 * j * j + 12.0 * jc * jc + 3.0 * w * w + 2.0 * j * wc + wc * wc;
    let b = -8.0 * j.powi(3) + 72.0 * j * jc * jc - 9.0 * j * w * w - 6.0 * j * j * wc
        + 18.0 * jc * jc * wc
        - 9.0 * w * w * wc
        + 3.0 * j * wc * wc
        + wc.powi(3);
    (a, b)
}

/// The three candidate roots `t`, one per cube-root branch.
pub fn cubic_root_candidates(p: &SystemParams) -> [C64; 3] {
    let (a, b) = cubic_coefficients(p);
    let s = C64::from(b * b - a.powi(3)).sqrt();
    let principal = (C64::from(b) + s).powf(1.0 / 3.0);
    let sqrt3 = 3.0_f64.sqrt();
    let minus = C64::new(1.0, sqrt3);
    let plus = C64::new(-1.0, sqrt3);
    let mut out = [C64::from(0.0); 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let u = principal * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
        *slot = (C64::from(2.0 * p.j - p.omega_c) - C64::from(a) * minus / u + plus * u) / 3.0;
    }
    out
}

struct Candidate {
    t: C64,
    alpha: C64,
    beta: C64,
    state: DVector<C64>,
    energy: f64,
    residual: f64,
}

fn assemble(alpha: f64, beta: f64) -> (DVector<C64>, f64) {
    let norm = 1.0 + alpha * alpha + 2.0 * beta * beta;
    let s = 1.0 / norm.sqrt();
    let mut v = DVector::from_element(8, C64::from(0.0));
    v[1] = C64::from(-alpha * s);
    v[2] = C64::from(-beta * s);
    v[4] = C64::from(-beta * s);
    v[7] = C64::from(s);
    (v, norm)
}

/// Closed-form ground state.
///
/// Every cube-root branch is tried. A branch is kept when α and β come out
/// real and the assembled vector is an eigenvector of `H`; the lowest such
/// eigenvector wins.
pub fn ground_state_analytic(p: &SystemParams) -> Result<GroundState> {
    p.validate()?;
    let (w, wc, j, jc) = (p.omega0, p.omega_c, p.j, p.j_c);
    let scale = j.abs().max(jc.abs()).max(wc.abs());
    let h = build_hamiltonian(p);
    let spectral_scale = h.matrix().norm().max(1.0);

    let mut worst_imag = f64::INFINITY;
    let mut worst_den = f64::INFINITY;
    let mut candidates = Vec::with_capacity(3);
    for t in cubic_root_candidates(p) {
        let den = C64::from(2.0 * j * j - 4.0 * jc * jc + j * wc) - t * j;
        if den.norm() < SINGULARITY_REL_TOL * scale * scale {
            worst_den = worst_den.min(den.norm());
            continue;
        }
        let alpha_num =
            C64::from(-8.0 * jc * jc - 4.0 * j * w - 2.0 * j * wc - 2.0 * w * wc - wc * wc)
                - t * (2.0 * j)
                + t * (2.0 * w)
                + t * t;
        let alpha = alpha_num / (den * 2.0);
        let beta = (C64::from(2.0 * j * jc + 2.0 * jc * w + jc * wc) + t * jc) / den;
        let imag = alpha.im.abs() + beta.im.abs();
        if !(alpha.is_finite() && beta.is_finite()) {
            continue;
        }
        if imag > BRANCH_IMAG_TOL {
            worst_imag = worst_imag.min(imag);
            continue;
        }
        let (state, _) = assemble(alpha.re, beta.re);
        let hv = h.matrix() * &state;
        let energy = state.dotc(&hv).re;
        let residual = (hv - &state * C64::from(energy)).norm();
        candidates.push(Candidate {
            t,
            alpha: C64::from(alpha.re),
            beta: C64::from(beta.re),
            state,
            energy,
            residual,
        });
    }

    let best = candidates
        .into_iter()
        .filter(|c| c.residual <= 1e-8 * spectral_scale)
        .min_by(|a, b| a.energy.total_cmp(&b.energy));
    match best {
        Some(c) => {
            let norm = 1.0 + c.alpha.norm_sqr() + 2.0 * c.beta.norm_sqr();
            Ok(GroundState {
                amplitudes: c.state,
                energy: c.energy,
                alpha: c.alpha,
                beta: c.beta,
                norm,
                t_root: Some(c.t),
            })
        }
        None if worst_den.is_finite() => Err(Error::AnalyticSingularity {
            denominator: worst_den,
        }),
        None => Err(Error::BranchSelection {
            imaginary: if worst_imag.is_finite() {
                worst_imag
            } else {
                0.0
            },
        }),
    }
}

/// Closed form where it is defined, numeric diagonalization otherwise.
pub fn ground_state(p: &SystemParams) -> Result<(GroundState, Provenance)> {
    match ground_state_analytic(p) {
        Ok(g) => Ok((g, Provenance::Analytic)),
        Err(Error::AnalyticSingularity { .. }) | Err(Error::BranchSelection { .. }) => {
            let g = ground_state_numeric(&build_hamiltonian(p))?;
            Ok((g, Provenance::Numeric))
        }
        Err(e) => Err(e),
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix of dimension 2, 4 or 8.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = m.nrows();
        if !m.is_square() || !matches!(n, 2 | 4 | 8) {
            return Err(Error::Dimension {
                expected: if n <= 2 {
                    2
                } else if n <= 4 {
                    4
                } else {
                    8
                },
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let deviation = hermitian_deviation(&m);
        if deviation > DENSITY_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = m.trace();
        if (trace - C64::from(1.0)).norm() > DENSITY_TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {trace} differs from 1")));
        }
        let min = eigh(&m).values[0];
        if min < -DENSITY_PSD_TOL {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(m))
    }

    /// Projector onto a state vector; the vector is normalized first.
    pub fn from_pure(psi: &DVector<C64>) -> Self {
        let v = psi / C64::from(psi.norm());
        Self(outer(&v, &v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim) / C64::from(dim as f64))
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.0).values
    }
}

/// Reduced state on the sites in `keep` (ordering A, B, C preserved).
pub fn partial_trace(rho: &DensityMatrix, keep: &[Site]) -> Result<DensityMatrix> {
    if rho.dim() != 8 {
        return Err(Error::Dimension {
            expected: 8,
            rows: rho.dim(),
            cols: rho.dim(),
        });
    }
    let mut kept: Vec<usize> = keep.iter().map(|s| s.index()).collect();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.len() == 3 {
        return Err(Error::InvalidSubsystem(format!(
            "keep must be a nonempty proper subset, got {keep:?}"
        )));
    }
    let traced: Vec<usize> = (0..3).filter(|q| !kept.contains(q)).collect();
    // Bit of qubit q inside a 3-bit index (A is the most significant).
    let bit = |q: usize| 2 - q;
    let compose = |sub: usize, sites: &[usize], rest: usize, rest_sites: &[usize]| {
        let mut full = 0;
        for (k, &q) in sites.iter().enumerate() {
            let b = (sub >> (sites.len() - 1 - k)) & 1;
            full |= b << bit(q);
        }
        for (k, &q) in rest_sites.iter().enumerate() {
            let b = (rest >> (rest_sites.len() - 1 - k)) & 1;
            full |= b << bit(q);
        }
        full
    };
    let d = 1 << kept.len();
    let e = 1 << traced.len();
    let m = rho.matrix();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::from(0.0);
            for r in 0..e {
                acc += m[(compose(i, &kept, r, &traced), compose(j, &kept, r, &traced))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::new_unchecked(out))
}

/// 1 − Tr ρ².
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - rho.purity()
}

/// Reduced matrices built directly from α, β and N.
pub mod templates {
    use super::*;

    fn scaled(entries: [C64; 16], norm: f64) -> CMatrix {
        CMatrix::from_row_slice(4, 4, &entries) / C64::from(norm)
    }

    pub fn rho_ab(alpha: C64, beta: C64, norm: f64) -> CMatrix {
        let z = C64::from(0.0);
        let a2 = C64::from(alpha.norm_sqr());
        let b2 = C64::from(beta.norm_sqr());
        scaled(
            [
                a2,
                z,
                z,
                -alpha, //
                z,
                b2,
                b2,
                z, //
                z,
                b2,
                b2,
                z, //
                -alpha.conj(),
                z,
                z,
                C64::from(1.0),
            ],
            norm,
        )
    }

    pub fn rho_ac(alpha: C64, beta: C64, norm: f64) -> CMatrix {
        let z = C64::from(0.0);
        let a2 = C64::from(alpha.norm_sqr());
        let b2 = C64::from(beta.norm_sqr());
        scaled(
            [
                b2,
                z,
                z,
                -beta, //
                z,
                a2,
                alpha * beta.conj(),
                z, //
                z,
                alpha.conj() * beta,
                b2,
                z, //
                -beta.conj(),
                z,
                z,
                C64::from(1.0),
            ],
            norm,
        )
    }

    pub fn rho_a(alpha: C64, beta: C64, norm: f64) -> CMatrix {
        let a2 = alpha.norm_sqr();
        let b2 = beta.norm_sqr();
        CMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::from((a2 + b2) / norm),
            C64::from((1.0 + b2) / norm),
        ]))
    }

    pub fn rho_c(alpha: C64, beta: C64, norm: f64) -> CMatrix {
        let a2 = alpha.norm_sqr();
        let b2 = beta.norm_sqr();
        CMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::from(2.0 * b2 / norm),
            C64::from((1.0 + a2) / norm),
        ]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::basis_index;

    fn p(omega0: f64, omega_c: f64, j: f64, j_c: f64) -> SystemParams {
        SystemParams::new(omega0, omega_c, j, j_c).unwrap()
    }

    #[test]
    fn decoupled_numeric_ground_state_is_all_ones() {
        let g = ground_state_numeric(&build_hamiltonian(&p(0.1, 5.0, 0.0, 0.0))).unwrap();
        assert!((g.amplitudes[basis_index(1, 1, 1)] - C64::from(1.0)).norm() < 1e-14);
        assert!(g.alpha.norm() < 1e-14 && g.beta.norm() < 1e-14);
        assert!((g.norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_probe_alpha_matches_two_level_block() {
        // Block on {|00>, |11>} of AB with C in |1>: [[w0, J], [J, -w0]].
        let (w0, j) = (0.1, 0.1);
        let g = ground_state_numeric(&build_hamiltonian(&p(w0, 5.0, j, 0.0))).unwrap();
        assert!(g.beta.norm() < 1e-12);
        let lambda = -(w0 * w0 + j * j).sqrt();
        // Eigenvector (u, v) with (w0 - λ) u + J v = 0; alpha = -u/v.
        let alpha = j / (w0 - lambda);
        assert!(
            (g.alpha.re - alpha).abs() < 1e-12,
            "{} vs {}",
            g.alpha.re,
            alpha
        );
    }

    #[test]
    fn degenerate_hamiltonian_is_rejected() {
        let h = HermitianMatrix::identity(8);
        assert!(matches!(
            ground_state_numeric(&h),
            Err(Error::DegenerateGround { .. })
        ));
    }

    #[test]
    fn vanishing_reference_amplitude_is_rejected() {
        let mut m = CMatrix::zeros(8, 8);
        for i in 0..8 {
            m[(i, i)] = C64::from(i as f64);
        }
        let h = HermitianMatrix::new(m).unwrap();
        assert!(matches!(
            ground_state_numeric(&h),
            Err(Error::RatioUndefined { .. })
        ));
    }

    #[test]
    fn analytic_beta_vanishes_with_probe() {
        let g = ground_state_analytic(&p(0.1, 5.0, 0.1, 1e-9)).unwrap();
        assert!(g.beta.norm() < 1e-8);
        let g0 = ground_state_analytic(&p(0.1, 5.0, 0.1, 0.0)).unwrap();
        assert_eq!(g0.beta.norm(), 0.0);
    }

    #[test]
    fn analytic_matches_numeric() {
        for (j, jc) in [(0.1, 0.5), (1.0, 2.0), (1.0, 1.0), (0.1, 0.01), (-0.4, 0.8)] {
            let params = p(0.1, 5.0, j, jc);
            let a = ground_state_analytic(&params).unwrap();
            let n = ground_state_numeric(&build_hamiltonian(&params)).unwrap();
            assert!(1.0 - a.fidelity(&n) < 1e-10, "J={j} JC={jc}");
            assert!((a.energy - n.energy).abs() < 1e-10);
            let t = a.t_root.unwrap();
            assert!((t.re - 2.0 * a.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn decoupled_limit_is_singular_and_falls_back() {
        let params = p(0.1, 5.0, 0.0, 0.0);
        assert!(matches!(
            ground_state_analytic(&params),
            Err(Error::AnalyticSingularity { .. })
        ));
        let (g, prov) = ground_state(&params).unwrap();
        assert_eq!(prov, Provenance::Numeric);
        assert!((g.amplitudes[7] - C64::from(1.0)).norm() < 1e-14);
    }

    #[test]
    fn ground_state_structure() {
        let g = ground_state_analytic(&p(0.1, 5.0, 0.1, 0.5)).unwrap();
        assert!((g.amplitudes.norm_squared() - 1.0).abs() < 1e-12);
        for idx in [0, 3, 5, 6] {
            assert!(g.amplitudes[idx].norm() < 1e-10);
        }
        let n = 1.0 + g.alpha.norm_sqr() + 2.0 * g.beta.norm_sqr();
        assert!((g.norm - n).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut psi = DVector::from_element(8, C64::from(0.0));
        psi[basis_index(1, 1, 1)] = C64::from(1.0);
        let rho = DensityMatrix::from_pure(&psi);
        let a = partial_trace(&rho, &[Site::A]).unwrap();
        assert_eq!(a.matrix()[(0, 0)], C64::from(0.0));
        assert_eq!(a.matrix()[(1, 1)], C64::from(1.0));
    }

    #[test]
    fn partial_trace_rejects_bad_subsets() {
        let rho = DensityMatrix::maximally_mixed(8);
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[Site::A, Site::B, Site::C]).is_err());
        let small = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&small, &[Site::A]).is_err());
    }

    #[test]
    fn reduced_states_match_templates() {
        let g = ground_state_analytic(&p(0.1, 5.0, 0.1, 0.5)).unwrap();
        let rho = g.density();
        let cases: [(&[Site], CMatrix); 4] = [
            (
                &[Site::A, Site::B],
                templates::rho_ab(g.alpha, g.beta, g.norm),
            ),
            (
                &[Site::A, Site::C],
                templates::rho_ac(g.alpha, g.beta, g.norm),
            ),
            (&[Site::A], templates::rho_a(g.alpha, g.beta, g.norm)),
            (&[Site::C], templates::rho_c(g.alpha, g.beta, g.norm)),
        ];
        for (keep, expected) in cases {
            let got = partial_trace(&rho, keep).unwrap();
            let diff = (got.matrix() - expected)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(diff <= 1e-10, "{keep:?}: {diff:e}");
        }
    }

    #[test]
    fn exchange_symmetry_of_bipartitions() {
        let g = ground_state_analytic(&p(0.1, 5.0, 1.0, 0.7)).unwrap();
        let rho = g.density();
        let ac = partial_trace(&rho, &[Site::A, Site::C]).unwrap();
        let bc = partial_trace(&rho, &[Site::B, Site::C]).unwrap();
        assert!((ac.matrix() - bc.matrix()).norm() < 1e-12);
    }

    #[test]
    fn linear_entropy_limits() {
        let mut psi = DVector::from_element(2, C64::from(0.0));
        psi[0] = C64::new(0.6, 0.0);
        psi[1] = C64::new(0.0, 0.8);
        assert!(linear_entropy(&DensityMatrix::from_pure(&psi)).abs() < 1e-15);
        assert!((linear_entropy(&DensityMatrix::maximally_mixed(2)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotDensity(_))));
        let neg = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::from(1.5),
                C64::from(0.0),
                C64::from(0.0),
                C64::from(-0.5),
            ],
        );
        assert!(matches!(DensityMatrix::new(neg), Err(Error::NotDensity(_))));
        assert!(DensityMatrix::new(CMatrix::identity(3, 3) / C64::from(3.0)).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(4, 4) / C64::from(4.0)).is_ok());
    }
}
