//! Two-qubit Bloch geometry: Fano decomposition, quantum obesity and the
//! quantum steering ellipsoid.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::model::{pauli, Axis, CMatrix, C64};
use crate::spectral::DensityMatrix;

/// Marginals with |y| at or above `1 − PURE_MARGINAL_TOL` are treated as pure.
pub const PURE_MARGINAL_TOL: f64 = 1e-9;
/// Roundoff allowance for negative ellipsoid-matrix eigenvalues.
pub const NEGATIVE_EIGEN_FLOOR: f64 = -1e-12;

/// ρ = ¼(I + x·σ⊗I + I⊗y·σ + Σ t_ij σ_i⊗σ_j).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoDecomposition {
    pub x: Vector3<f64>,
    pub y: Vector3<f64>,
    pub t: Matrix3<f64>,
}

fn pauli_pair(a: Option<Axis>, b: Option<Axis>) -> CMatrix {
    let factor = |axis: Option<Axis>| match axis {
        Some(ax) => pauli(ax).into_matrix(),
        None => CMatrix::identity(2, 2),
    };
    factor(a).kronecker(&factor(b))
}

fn expectation(rho: &CMatrix, op: &CMatrix) -> f64 {
    (rho * op).trace().re
}

pub fn fano(rho: &DensityMatrix) -> Result<FanoDecomposition> {
    if rho.dim() != 4 {
        return Err(Error::Dimension {
            expected: 4,
            rows: rho.dim(),
            cols: rho.dim(),
        });
    }
    let m = rho.matrix();
    let mut x = Vector3::zeros();
    let mut y = Vector3::zeros();
    let mut t = Matrix3::zeros();
    for (i, a) in Axis::ALL.into_iter().enumerate() {
        x[i] = expectation(m, &pauli_pair(Some(a), None));
        y[i] = expectation(m, &pauli_pair(None, Some(a)));
        for (j, b) in Axis::ALL.into_iter().enumerate() {
            t[(i, j)] = expectation(m, &pauli_pair(Some(a), Some(b)));
        }
    }
    Ok(FanoDecomposition { x, y, t })
}

impl FanoDecomposition {
    /// R = [[1, yᵀ], [x, T]], so that local rotations act as
    /// diag(1, O_x) R diag(1, O_yᵀ).
    pub fn r_matrix(&self) -> Matrix4<f64> {
        let mut r = Matrix4::zeros();
        r[(0, 0)] = 1.0;
        for i in 0..3 {
            r[(0, i + 1)] = self.y[i];
            r[(i + 1, 0)] = self.x[i];
            for j in 0..3 {
                r[(i + 1, j + 1)] = self.t[(i, j)];
            }
        }
        r
    }

    /// Rebuilds the 4×4 density matrix from the Pauli coefficients.
    pub fn reconstruct(&self) -> CMatrix {
        let mut m = CMatrix::identity(4, 4);
        for (i, a) in Axis::ALL.into_iter().enumerate() {
            m += pauli_pair(Some(a), None) * C64::from(self.x[i]);
            m += pauli_pair(None, Some(a)) * C64::from(self.y[i]);
            for (j, b) in Axis::ALL.into_iter().enumerate() {
                m += pauli_pair(Some(a), Some(b)) * C64::from(self.t[(i, j)]);
            }
        }
        m * C64::from(0.25)
    }

    /// Decomposition with the two parties exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y,
            y: self.x,
            t: self.t.transpose(),
        }
    }
}

/// Ω = |det R|^{1/4}.
pub fn obesity(f: &FanoDecomposition) -> f64 {
    f.r_matrix().determinant().abs().powf(0.25)
}

/// (4π/3) γ² Ω⁴, the ellipsoid volume written through the obesity.
pub fn volume_from_obesity(gamma: f64, omega: f64) -> f64 {
    4.0 * PI / 3.0 * gamma * gamma * omega.powi(4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringEllipsoid {
    pub center: Vector3<f64>,
    /// Semiaxes in descending order.
    pub semiaxes: [f64; 3],
    /// Columns are the axis directions matching `semiaxes`.
    pub orientation: Matrix3<f64>,
    pub gamma: f64,
    pub matrix: Matrix3<f64>,
    pub volume: f64,
    pub obesity: f64,
    /// The measured party's marginal is pure; geometry is not defined.
    pub degenerate: bool,
}

/// Ellipsoid of Bloch vectors of `steered` reachable by measuring the other party.
///
/// With x the steered and y the measured local vector,
/// `c = γ(x − T y)` and `Q = γ (T − x yᵀ)(I + γ y yᵀ)(T − x yᵀ)ᵀ`, γ = 1/(1 − |y|²).
pub fn ellipsoid(f: &FanoDecomposition, steered: Party) -> SteeringEllipsoid {
    let oriented = match steered {
        Party::First => *f,
        Party::Second => f.swapped(),
    };
    let FanoDecomposition { x, y, t } = oriented;
    let omega = obesity(f);
    let y_norm = y.norm();
    if y_norm >= 1.0 - PURE_MARGINAL_TOL {
        return SteeringEllipsoid {
            center: x,
            semiaxes: [0.0; 3],
            orientation: Matrix3::identity(),
            gamma: f64::INFINITY,
            matrix: Matrix3::zeros(),
            volume: 0.0,
            obesity: omega,
            degenerate: true,
        };
    }
    let gamma = 1.0 / (1.0 - y.norm_squared());
    let center = (x - t * y) * gamma;
    let m = t - x * y.transpose();
    let q = m * (Matrix3::identity() + y * y.transpose() * gamma) * m.transpose() * gamma;
    let q = (q + q.transpose()) * 0.5;

    let SymmetricEigen {
        eigenvalues,
        eigenvectors,
    } = q.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let mut semiaxes = [0.0; 3];
    let mut orientation = Matrix3::zeros();
    for (dst, &src) in order.iter().enumerate() {
        let qv = eigenvalues[src];
        debug_assert!(
            qv >= NEGATIVE_EIGEN_FLOOR * q.norm().max(1.0),
            "Q not PSD: {qv}"
        );
        semiaxes[dst] = qv.max(0.0).sqrt();
        orientation.set_column(dst, &eigenvectors.column(src));
    }
    let volume = 4.0 * PI / 3.0 * semiaxes.iter().product::<f64>();
    SteeringEllipsoid {
        center,
        semiaxes,
        orientation,
        gamma,
        matrix: q,
        volume,
        obesity: omega,
        degenerate: false,
    }
}

/// Indicator values written directly in terms of α, β and N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    pub omega_ab: f64,
    pub omega_ac: f64,
    /// `None` when |α|² + |β|² = 0.
    pub v_ab: Option<f64>,
    /// `None` when β = 0, where the expression diverges.
    pub v_ac: Option<f64>,
    pub y_ab_local: Vector3<f64>,
    pub y_c_local: Vector3<f64>,
}

/// Evaluates the six published closed forms.
///
/// `omega_*` and the local vectors agree with the generic pipeline. The two
/// volume expressions are reproduced as published and do not give the
/// ellipsoid volume V = (4π/3)γ²Ω⁴ of A steered by the other qubit:
/// `v_ab` equals γ_B²·V_AB and `v_ac` equals γ_C²·V_AC/|β|⁴. Use
/// [`ellipsoid`] when the geometric volume is needed.
pub fn closed_forms(alpha: C64, beta: C64, norm: f64) -> Result<ClosedForms> {
    let a = alpha.norm_sqr();
    let b = beta.norm_sqr();
    let expected = 1.0 + a + 2.0 * b;
    if !((norm - expected).abs() <= 1e-10 * expected) {
        return Err(Error::InvalidParams(format!(
            "normalization {norm} differs from 1 + |alpha|^2 + 2|beta|^2 = {expected}"
        )));
    }
    let n = norm;
    let omega_ab = 2.0 / n * (b * b - a).abs().sqrt();
    let omega_ac = 2.0 * b.sqrt() / n * (a - 1.0).abs().sqrt();
    let v_ab = {
        let den = (1.0 + b).powi(4) * (a + b).powi(4);
        (den > 0.0).then(|| PI * n.powi(4) / 12.0 * (b * b - a).powi(2) / den)
    };
    let v_ac = {
        let den = (1.0 + a).powi(4) * b.powi(2) * b.powi(2);
        (den > 0.0).then(|| PI * n.powi(4) / 192.0 * (1.0 - a).powi(2) / den)
    };
    Ok(ClosedForms {
        omega_ab,
        omega_ac,
        v_ab,
        v_ac,
        y_ab_local: Vector3::new(0.0, 0.0, (a - 1.0) / n),
        y_c_local: Vector3::new(0.0, 0.0, -(a - 2.0 * b + 1.0) / n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Site, SystemParams};
    use crate::spectral::{ground_state_analytic, partial_trace, templates};
    use nalgebra::DVector;

    fn bell_singlet() -> DensityMatrix {
        let s = 1.0 / 2.0_f64.sqrt();
        let psi = DVector::from_vec(vec![
            C64::from(0.0),
            C64::from(s),
            C64::from(-s),
            C64::from(0.0),
        ]);
        DensityMatrix::from_pure(&psi)
    }

    fn product_state() -> DensityMatrix {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::from(0.7),
                C64::new(0.1, 0.2),
                C64::new(0.1, -0.2),
                C64::from(0.3),
            ],
        );
        let b = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::from(0.4),
                C64::new(-0.2, 0.05),
                C64::new(-0.2, -0.05),
                C64::from(0.6),
            ],
        );
        DensityMatrix::new(a.kronecker(&b)).unwrap()
    }

    fn rho_ab(j: f64, jc: f64) -> (DensityMatrix, crate::spectral::GroundState) {
        let g = ground_state_analytic(&SystemParams::new(0.1, 5.0, j, jc).unwrap()).unwrap();
        (partial_trace(&g.density(), &[Site::A, Site::B]).unwrap(), g)
    }

    #[test]
    fn maximally_mixed_has_no_vectors() {
        let f = fano(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert!(f.x.norm() < 1e-15 && f.y.norm() < 1e-15 && f.t.norm() < 1e-15);
    }

    #[test]
    fn singlet_correlations() {
        let f = fano(&bell_singlet()).unwrap();
        assert!((f.t - Matrix3::from_diagonal_element(-1.0)).norm() < 1e-14);
        assert!(f.x.norm() < 1e-15 && f.y.norm() < 1e-15);
        let e = ellipsoid(&f, Party::First);
        for s in e.semiaxes {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!((e.volume - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((obesity(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_zero_obesity_and_volume() {
        let f = fano(&product_state()).unwrap();
        assert!(obesity(&f) < 1e-3, "{}", obesity(&f));
        assert!(f.r_matrix().determinant().abs() < 1e-15);
        let e = ellipsoid(&f, Party::First);
        assert!(e.volume < 1e-14);
    }

    #[test]
    fn local_vector_of_ab_partition() {
        let (rho, g) = rho_ab(0.1, 0.5);
        let f = fano(&rho).unwrap();
        let expected = (g.alpha.norm_sqr() - 1.0) / g.norm;
        assert!(f.y[0].abs() < 1e-12 && f.y[1].abs() < 1e-12);
        assert!((f.y[2] - expected).abs() < 1e-12);
        assert!((f.x - f.y).norm() < 1e-12);
    }

    #[test]
    fn obesity_matches_closed_forms() {
        for (j, jc) in [(0.1, 0.5), (1.0, 0.3), (1.0, 2.0)] {
            let (ab, g) = rho_ab(j, jc);
            let ac = partial_trace(&g.density(), &[Site::A, Site::C]).unwrap();
            let cf = closed_forms(g.alpha, g.beta, g.norm).unwrap();
            assert!((obesity(&fano(&ab).unwrap()) - cf.omega_ab).abs() < 1e-9);
            assert!((obesity(&fano(&ac).unwrap()) - cf.omega_ac).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_zeros_and_guards() {
        let cf = closed_forms(C64::from(0.4), C64::from(0.0), 1.16).unwrap();
        assert_eq!(cf.omega_ac, 0.0);
        assert!(cf.v_ac.is_none());
        // |beta|^4 = |alpha|^2
        let beta = 0.6_f64;
        let alpha = beta * beta;
        let n = 1.0 + alpha * alpha + 2.0 * beta * beta;
        let cf = closed_forms(C64::from(alpha), C64::from(beta), n).unwrap();
        assert!(cf.omega_ab.abs() < 1e-8);
        assert!(closed_forms(C64::from(0.4), C64::from(0.1), 3.0).is_err());
    }

    #[test]
    fn closed_form_volumes_differ_from_ellipsoid() {
        let (ab, g) = rho_ab(0.1, 0.5);
        let e = ellipsoid(&fano(&ab).unwrap(), Party::First);
        let cf = closed_forms(g.alpha, g.beta, g.norm).unwrap();
        let ratio = cf.v_ab.unwrap() / e.volume;
        assert!(
            (ratio / (e.gamma * e.gamma) - 1.0).abs() < 1e-8,
            "ratio {ratio}"
        );

        let ac = partial_trace(&g.density(), &[Site::A, Site::C]).unwrap();
        let e = ellipsoid(&fano(&ac).unwrap(), Party::First);
        let b2 = g.beta.norm_sqr();
        let ratio = cf.v_ac.unwrap() / e.volume;
        assert!(
            (ratio * b2 * b2 / (e.gamma * e.gamma) - 1.0).abs() < 1e-8,
            "ratio {ratio}"
        );
        let a = g.alpha.norm_sqr();
        let consistent = PI / 3.0 * (a - 1.0).powi(2) / (1.0 + a).powi(2);
        assert!((consistent / e.volume - 1.0).abs() < 1e-10);
    }

    #[test]
    fn volume_identities_hold() {
        let (ab, _) = rho_ab(1.0, 0.8);
        let f = fano(&ab).unwrap();
        for party in [Party::First, Party::Second] {
            let e = ellipsoid(&f, party);
            assert!(!e.degenerate);
            let via_obesity = volume_from_obesity(e.gamma, e.obesity);
            assert!((e.volume / via_obesity - 1.0).abs() < 1e-8);
            let det_q = e.matrix.determinant();
            assert!((4.0 * PI / 3.0 * det_q.sqrt() / e.volume - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn pure_marginal_is_flagged() {
        let g = ground_state_analytic(&SystemParams::new(0.1, 5.0, 0.1, 0.0).unwrap()).unwrap();
        let ac = partial_trace(&g.density(), &[Site::A, Site::C]).unwrap();
        let e = ellipsoid(&fano(&ac).unwrap(), Party::First);
        assert!(e.degenerate);
        assert_eq!(e.volume, 0.0);
        assert!(e.obesity < 1e-12);
    }

    #[test]
    fn template_reconstruction() {
        let g = ground_state_analytic(&SystemParams::new(0.1, 5.0, 1.0, 1.3).unwrap()).unwrap();
        let m = templates::rho_ac(g.alpha, g.beta, g.norm);
        let rho = DensityMatrix::new(m.clone()).unwrap();
        let back = fano(&rho).unwrap().reconstruct();
        assert!((back - m).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }
}
