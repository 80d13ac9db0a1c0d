//! System parameters, Pauli algebra and the three-qubit Hamiltonian.
//!
//! Basis convention: qubits are ordered A ⊗ B ⊗ C with A the most
//! significant bit, so |abc⟩ has index `4a + 2b + c`. σ_z = diag(+1, −1),
//! which makes |0⟩ the +1 (excited) eigenvector and |111⟩ the ground state
//! of the free Hamiltonian. ħ = 1 throughout.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Hermiticity tolerance used when wrapping matrices.
pub const HERMITIAN_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Splitting of the identical qubits A and B.
    pub omega0: f64,
    /// Splitting of qubit C.
    pub omega_c: f64,
    /// Signal coupling A–B.
    pub j: f64,
    /// Probe coupling A–C and B–C.
    pub j_c: f64,
}

impl SystemParams {
    pub fn new(omega0: f64, omega_c: f64, j: f64, j_c: f64) -> Result<Self> {
        let p = Self {
            omega0,
            omega_c,
            j,
            j_c,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega0", self.omega0),
            ("omega_c", self.omega_c),
            ("j", self.j),
            ("j_c", self.j_c),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.omega0 <= 0.0 {
            return Err(Error::InvalidParams("omega0 must be positive".into()));
        }
        if self.omega_c <= 0.0 {
            return Err(Error::InvalidParams("omega_c must be positive".into()));
        }
        Ok(())
    }

    /// Same parameters with the probe coupling replaced.
    pub fn with_jc(&self, j_c: f64) -> Self {
        Self { j_c, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    A,
    B,
    C,
}

impl Site {
    pub const ALL: [Site; 3] = [Site::A, Site::B, Site::C];

    /// Position in the tensor product, 0 being the most significant.
    pub fn index(self) -> usize {
        match self {
            Site::A => 0,
            Site::B => 1,
            Site::C => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Index of |abc⟩ in the computational basis.
pub fn basis_index(a: u8, b: u8, c: u8) -> usize {
    4 * a as usize + 2 * b as usize + c as usize
}

/// A square complex matrix that is Hermitian to within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let deviation = hermitian_deviation(&m);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(m))
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

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn pauli(axis: Axis) -> HermitianMatrix {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let m = match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
    };
    HermitianMatrix(m)
}

/// Kronecker product `a ⊗ b`; `a` indexes the more significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Places a single-qubit operator at `site` in the three-qubit space.
pub fn embed(op: &HermitianMatrix, site: Site) -> Result<HermitianMatrix> {
    if op.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            rows: op.dim(),
            cols: op.dim(),
        });
    }
    let id = CMatrix::identity(2, 2);
    let factors: [&CMatrix; 3] = match site {
        Site::A => [op.matrix(), &id, &id],
        Site::B => [&id, op.matrix(), &id],
        Site::C => [&id, &id, op.matrix()],
    };
    Ok(HermitianMatrix(kron(
        &kron(factors[0], factors[1]),
        factors[2],
    )))
}

pub fn embedded_pauli(axis: Axis, site: Site) -> CMatrix {
    embed(&pauli(axis), site)
        .expect("Pauli matrices are 2x2")
        .into_matrix()
}

/// σ_x^j σ_x^k on the three-qubit space.
pub fn xx_coupling(j: Site, k: Site) -> CMatrix {
    embedded_pauli(Axis::X, j) * embedded_pauli(Axis::X, k)
}

/// H = (ω₀/2)(σ_z^A + σ_z^B) + (ω_C/2)σ_z^C + J σ_x^A σ_x^B + J_C(σ_x^A σ_x^C + σ_x^B σ_x^C).
pub fn build_hamiltonian(p: &SystemParams) -> HermitianMatrix {
    let z = |s| embedded_pauli(Axis::Z, s);
    let free = (z(Site::A) + z(Site::B)) * C64::from(p.omega0 / 2.0)
        + z(Site::C) * C64::from(p.omega_c / 2.0);
    let interaction = xx_coupling(Site::A, Site::B) * C64::from(p.j)
        + (xx_coupling(Site::A, Site::C) + xx_coupling(Site::B, Site::C)) * C64::from(p.j_c);
    HermitianMatrix(free + interaction)
}
