//! Zero-temperature microscopic master equation and its steady state.
//!
//! Jump operators are the positive-frequency parts of σ_x^j in the energy
//! eigenbasis, `A_j(ω) = Σ_{ε_k − ε_i = ω} |ε_i⟩⟨ε_i| σ_x^j |ε_k⟩⟨ε_k|`, each
//! with Ohmic rate `μ_j ω`. Superoperators act on column-stacked density
//! matrices: `vec(ρ)[i + n·j] = ρ[i, j]`, so `vec(XρY) = (Yᵀ ⊗ X) vec(ρ)`.

use nalgebra::linalg::{Schur, SVD};

use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::model::{embedded_pauli, Axis, CMatrix, HermitianMatrix, Site, C64};
use crate::spectral::DensityMatrix;

/// Bohr frequencies closer than this fraction of the spectral range share a bin.
pub const BOHR_BIN_REL_TOL: f64 = 1e-9;
/// Jump operators with a smaller Frobenius norm are dropped.
const EMPTY_OPERATOR_TOL: f64 = 1e-12;
/// Singular values below this fraction of the largest span the null space.
pub const NULL_SPACE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub omega: f64,
    pub site: Site,
    pub rate: f64,
    pub operator: CMatrix,
}

/// Two Bohr frequency bins that are distinct but close to the bin tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct BinningWarning {
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct JumpOperatorSet {
    pub transitions: Vec<JumpOperator>,
    pub warnings: Vec<BinningWarning>,
    /// Bin tolerance actually used.
    pub tolerance: f64,
}

impl JumpOperatorSet {
    pub fn frequencies(&self, site: Site) -> Vec<f64> {
        self.transitions
            .iter()
            .filter(|t| t.site == site)
            .map(|t| t.omega)
            .collect()
    }
}

struct Bin {
    omega: f64,
    pairs: Vec<(usize, usize)>,
}

/// Emission-only jump operators for couplings `σ_x^j`, rates `mu[j]·ω`.
pub fn build_jump_operators(h: &HermitianMatrix, mu: [f64; 3]) -> Result<JumpOperatorSet> {
    if let Some(bad) = mu.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
        return Err(Error::InvalidParams(format!(
            "bath coupling mu must be >= 0, got {bad}"
        )));
    }
    let eig = eigh(h.matrix());
    let n = h.dim();
    let range = eig.values[n - 1] - eig.values[0];
    let tolerance = BOHR_BIN_REL_TOL * range.max(f64::MIN_POSITIVE);

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for k in 0..n {
            let omega = eig.values[k] - eig.values[i];
            if omega > tolerance {
                pairs.push((omega, i, k));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut bins: Vec<Bin> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (omega, i, k) in pairs {
        if omega - last <= tolerance {
            bins.last_mut().expect("bin exists").pairs.push((i, k));
        } else {
            bins.push(Bin {
                omega,
                pairs: vec![(i, k)],
            });
        }
        last = omega;
    }
    for bin in &mut bins {
        let sum: f64 = bin
            .pairs
            .iter()
            .map(|&(i, k)| eig.values[k] - eig.values[i])
            .sum();
        bin.omega = sum / bin.pairs.len() as f64;
    }

    let warnings = bins
        .windows(2)
        .filter(|w| w[1].omega - w[0].omega < 100.0 * tolerance)
        .map(|w| BinningWarning {
            lower: w[0].omega,
            upper: w[1].omega,
            tolerance,
        })
        .collect();

    let v = &eig.vectors;
    let v_adj = v.adjoint();
    let mut transitions = Vec::new();
    for site in Site::ALL {
        let x_energy = &v_adj * embedded_pauli(Axis::X, site) * v;
        for bin in &bins {
            let mut masked = CMatrix::zeros(n, n);
            for &(i, k) in &bin.pairs {
                masked[(i, k)] = x_energy[(i, k)];
            }
            if masked.norm() < EMPTY_OPERATOR_TOL {
                continue;
            }
            transitions.push(JumpOperator {
                omega: bin.omega,
                site,
                rate: mu[site.index()] * bin.omega,
                operator: v * masked * &v_adj,
            });
        }
    }
    Ok(JumpOperatorSet {
        transitions,
        warnings,
        tolerance,
    })
}

/// Generator of the master equation acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub matrix: CMatrix,
    pub dim: usize,
}

/// Matrix of `ρ ↦ XρY` in the column-stacking convention.
fn sandwich(x: &CMatrix, y: &CMatrix) -> CMatrix {
    y.transpose().kronecker(x)
}

pub fn build_liouvillian(h: &HermitianMatrix, jumps: &JumpOperatorSet) -> Result<Liouvillian> {
    let n = h.dim();
    let id = CMatrix::identity(n, n);
    let hm = h.matrix();
    let mut l = (sandwich(hm, &id) - sandwich(&id, hm)) * C64::new(0.0, -1.0);
    for jump in &jumps.transitions {
        if jump.operator.nrows() != n {
            return Err(Error::Dimension {
                expected: n,
                rows: jump.operator.nrows(),
                cols: jump.operator.ncols(),
            });
        }
        let a = &jump.operator;
        let a_adj = a.adjoint();
        let ada = &a_adj * a;
        let term =
            sandwich(a, &a_adj) - (sandwich(&ada, &id) + sandwich(&id, &ada)) * C64::from(0.5);
        l += term * C64::from(jump.rate);
    }
    Ok(Liouvillian { matrix: l, dim: n })
}

impl Liouvillian {
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let v = nalgebra::DVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        CMatrix::from_column_slice(self.dim, self.dim, out.as_slice())
    }

    /// Largest entry of `vec(I)† L`; zero for a trace-preserving generator.
    pub fn trace_residual(&self) -> f64 {
        let n = self.dim;
        (0..n * n)
            .map(|col| {
                (0..n)
                    .map(|i| self.matrix[(i + n * i, col)])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn spectrum(&self) -> Vec<C64> {
        let schur = Schur::new(self.matrix.clone());
        let (_, t) = schur.unpack();
        (0..t.nrows()).map(|i| t[(i, i)]).collect()
    }
}

/// Unit-trace null vector of the generator.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let svd = SVD::new(l.matrix.clone(), false, true);
    let sigma = &svd.singular_values;
    let max = sigma.max();
    let null: Vec<usize> = (0..sigma.len())
        .filter(|&k| sigma[k] <= NULL_SPACE_REL_TOL * max)
        .collect();
    if null.len() != 1 {
        return Err(Error::NullSpace {
            dimension: null.len(),
        });
    }
    let v_t = svd.v_t.expect("right singular vectors requested");
    let row = v_t.row(null[0]);
    let n = l.dim;
    let entries: Vec<C64> = row.iter().map(|z| z.conj()).collect();
    let raw = CMatrix::from_column_slice(n, n, &entries);
    let trace = raw.trace();
    if trace.norm() < 1e-300 {
        return Err(Error::NotDensity("null vector is traceless".into()));
    }
    let scaled = raw / trace;
    let herm = (&scaled + scaled.adjoint()) * C64::from(0.5);
    DensityMatrix::new(herm)
}
