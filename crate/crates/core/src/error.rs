use thiserror::Error;

use crate::model::Site;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),

    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Dimension {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("ground level is degenerate: gap {gap:e} below threshold {threshold:e}")]
    DegenerateGround { gap: f64, threshold: f64 },

    #[error("|111> amplitude {amplitude:e} too small to define alpha/beta ratios")]
    RatioUndefined { amplitude: f64 },

    #[error("analytic ground state is singular (denominator {denominator:e})")]
    AnalyticSingularity { denominator: f64 },

    #[error("no cube-root branch gives real alpha/beta (imaginary residue {imaginary:e})")]
    BranchSelection { imaginary: f64 },

    #[error("invalid partial trace: {0}")]
    InvalidSubsystem(String),

    #[error("Liouvillian null space has dimension {dimension}, expected 1")]
    NullSpace { dimension: usize },

    #[error("marginal of site {site:?} is pure (|y| = {norm}); local-vector Fisher information undefined")]
    DegenerateMarginal { site: Site, norm: f64 },

    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("invalid bracket ({lo}, {hi})")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("invalid circuit parameters: {0}")]
    InvalidCircuit(String),

    #[error("probe couplings differ: g_AC = {g_ac}, g_BC = {g_bc}")]
    AsymmetricProbe { g_ac: f64, g_bc: f64 },

    #[error("qubits A and B are not identical: omega_A = {omega_a}, omega_B = {omega_b}")]
    NonIdenticalQubits { omega_a: f64, omega_b: f64 },
}
