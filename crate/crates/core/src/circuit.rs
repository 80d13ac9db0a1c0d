//! Transmon and SQUID-coupler parameters mapped onto the three-qubit model.
//!
//! Circuit energies are given in GHz (E/h). Model parameters are produced by
//! multiplying by [`CircuitUnits::angular_per_ghz`], 2π by default, so that a
//! 5 GHz transmon appears as ω = 2π·5.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{embedded_pauli, Axis, HermitianMatrix, Site, SystemParams, C64};

/// Below this E_J/E_C the two-level truncation is rejected.
pub const MIN_EJ_EC_RATIO: f64 = 20.0;
/// Below this E_J/E_C a warning is attached to the mapping.
pub const WARN_EJ_EC_RATIO: f64 = 50.0;
/// Tolerance on ω_A = ω_B and g_AC = g_BC.
pub const SYMMETRY_TOL: f64 = 1e-9;

const PLANCK: f64 = 6.626_070_15e-34;
const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// (Φ₀/2π)² / (1 nH), expressed in GHz.
pub fn inductive_energy_per_inverse_nh() -> f64 {
    let hbar = PLANCK / (2.0 * PI);
    let reduced_flux_quantum = hbar / (2.0 * ELEMENTARY_CHARGE);
    reduced_flux_quantum.powi(2) / 1e-9 / PLANCK / 1e9
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transmon {
    /// Charging energy E_C in GHz.
    pub ec: f64,
    /// Josephson energy E_J in GHz.
    pub ej: f64,
}

impl Transmon {
    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.ec.is_finite() && self.ej.is_finite() && self.ec > 0.0 && self.ej > 0.0) {
            return Err(Error::InvalidCircuit(format!(
                "qubit {name}: energies must be positive (E_C = {}, E_J = {})",
                self.ec, self.ej
            )));
        }
        let ratio = self.ej / self.ec;
        if ratio < MIN_EJ_EC_RATIO {
            return Err(Error::InvalidCircuit(format!(
                "qubit {name}: E_J/E_C = {ratio} is below the transmon limit {MIN_EJ_EC_RATIO}"
            )));
        }
        Ok(())
    }

    /// Plasma frequency √(8 E_C E_J) in GHz.
    pub fn frequency_ghz(&self) -> f64 {
        (8.0 * self.ec * self.ej).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub a: Transmon,
    pub b: Transmon,
    pub c: Transmon,
}

impl TransmonParams {
    pub fn get(&self, site: Site) -> &Transmon {
        match site {
            Site::A => &self.a,
            Site::B => &self.b,
            Site::C => &self.c,
        }
    }
}

/// Zero-point fluctuations (φ_ZPF, n_ZPF) = ((2E_C/E_J)^{1/4}, (E_J/32E_C)^{1/4}).
pub fn zpf(t: &Transmon) -> Result<(f64, f64)> {
    if !(t.ec > 0.0 && t.ej > 0.0 && t.ec.is_finite() && t.ej.is_finite()) {
        return Err(Error::InvalidCircuit(format!(
            "energies must be positive (E_C = {}, E_J = {})",
            t.ec, t.ej
        )));
    }
    Ok((
        (2.0 * t.ec / t.ej).powf(0.25),
        (t.ej / (32.0 * t.ec)).powf(0.25),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplerParams {
    /// Minimum SQUID inductance L₀ in nH.
    pub l0_nh: f64,
    /// External fluxes in units of Φ₀.
    pub flux_ab: f64,
    pub flux_ac: f64,
    pub flux_bc: f64,
}

impl CouplerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l0_nh.is_finite() && self.l0_nh > 0.0) {
            return Err(Error::InvalidCircuit(format!(
                "L0 must be positive, got {} nH",
                self.l0_nh
            )));
        }
        for (name, flux) in [
            ("flux_ab", self.flux_ab),
            ("flux_ac", self.flux_ac),
            ("flux_bc", self.flux_bc),
        ] {
            if !flux.is_finite() {
                return Err(Error::InvalidCircuit(format!("{name} is not finite")));
            }
        }
        Ok(())
    }
}

/// |cos(πΦ)|, exactly zero at half-integer flux.
pub fn flux_factor(flux: f64) -> f64 {
    if (flux - 0.5).rem_euclid(1.0) == 0.0 {
        0.0
    } else {
        (PI * flux).cos().abs()
    }
}

/// E_L = (Φ₀/2π)² / L(Φ) in GHz with L(Φ) = L₀/|cos(πΦ)|.
pub fn inductive_energy_ghz(l0_nh: f64, flux: f64) -> f64 {
    inductive_energy_per_inverse_nh() / l0_nh * flux_factor(flux)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitUnits {
    /// Model units per GHz.
    pub angular_per_ghz: f64,
    /// Add Σ_k E_L^{(jk)}/2 to each qubit frequency.
    pub include_inductive_shift: bool,
}

impl Default for CircuitUnits {
    fn default() -> Self {
        Self {
            angular_per_ghz: 2.0 * PI,
            include_inductive_shift: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub transmons: TransmonParams,
    pub coupler: CouplerParams,
    #[serde(default)]
    pub units: CircuitUnits,
}

/// Per-qubit frequencies and pairwise couplings in model units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircuitSpectrum {
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_c: f64,
    pub g_ab: f64,
    pub g_ac: f64,
    pub g_bc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitMapping {
    pub spectrum: CircuitSpectrum,
    pub params: SystemParams,
    pub warnings: Vec<String>,
}

/// Frequencies and couplings before the symmetry checks.
pub fn circuit_spectrum(c: &CircuitParams) -> Result<(CircuitSpectrum, Vec<String>)> {
    let mut warnings = Vec::new();
    for site in Site::ALL {
        let t = c.transmons.get(site);
        t.validate(&format!("{site:?}"))?;
        let ratio = t.ej / t.ec;
        if ratio < WARN_EJ_EC_RATIO {
            warnings.push(format!(
                "qubit {site:?}: E_J/E_C = {ratio:.3} is below {WARN_EJ_EC_RATIO}; charge dispersion is not negligible"
            ));
        }
    }
    c.coupler.validate()?;
    let k = c.units.angular_per_ghz;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidCircuit(format!(
            "angular_per_ghz must be positive, got {k}"
        )));
    }

    let phi = |s: Site| zpf(c.transmons.get(s)).map(|z| z.0);
    let (pa, pb, pc) = (phi(Site::A)?, phi(Site::B)?, phi(Site::C)?);
    let el_ab = inductive_energy_ghz(c.coupler.l0_nh, c.coupler.flux_ab);
    let el_ac = inductive_energy_ghz(c.coupler.l0_nh, c.coupler.flux_ac);
    let el_bc = inductive_energy_ghz(c.coupler.l0_nh, c.coupler.flux_bc);

    let mut omega = [
        c.transmons.a.frequency_ghz(),
        c.transmons.b.frequency_ghz(),
        c.transmons.c.frequency_ghz(),
    ];
    if c.units.include_inductive_shift {
        omega[0] += (el_ab + el_ac) / 2.0;
        omega[1] += (el_ab + el_bc) / 2.0;
        omega[2] += (el_ac + el_bc) / 2.0;
    }
    Ok((
        CircuitSpectrum {
            omega_a: k * omega[0],
            omega_b: k * omega[1],
            omega_c: k * omega[2],
            g_ab: k * el_ab * pa * pb,
            g_ac: k * el_ac * pa * pc,
            g_bc: k * el_bc * pb * pc,
        },
        warnings,
    ))
}

/// Maps the circuit onto {ω₀, ω_C, J, J_C}. Requires identical A and B and a
/// symmetric probe.
pub fn effective_params(c: &CircuitParams) -> Result<CircuitMapping> {
    let (s, warnings) = circuit_spectrum(c)?;
    if (s.omega_a - s.omega_b).abs() > SYMMETRY_TOL {
        return Err(Error::NonIdenticalQubits {
            omega_a: s.omega_a,
            omega_b: s.omega_b,
        });
    }
    if (s.g_ac - s.g_bc).abs() > SYMMETRY_TOL {
        return Err(Error::AsymmetricProbe {
            g_ac: s.g_ac,
            g_bc: s.g_bc,
        });
    }
    let params = SystemParams::new(s.omega_a, s.omega_c, s.g_ab, s.g_ac)?;
    Ok(CircuitMapping {
        spectrum: s,
        params,
        warnings,
    })
}

/// Σ_j (ω_j/2) σ_z^j + Σ_{j<k} g_jk σ_x^j σ_x^k with independent ω and g.
pub fn effective_hamiltonian(s: &CircuitSpectrum) -> HermitianMatrix {
    let z = |site| embedded_pauli(Axis::Z, site);
    let xx = |a, b| embedded_pauli(Axis::X, a) * embedded_pauli(Axis::X, b);
    let m = z(Site::A) * C64::from(s.omega_a / 2.0)
        + z(Site::B) * C64::from(s.omega_b / 2.0)
        + z(Site::C) * C64::from(s.omega_c / 2.0)
        + xx(Site::A, Site::B) * C64::from(s.g_ab)
        + xx(Site::A, Site::C) * C64::from(s.g_ac)
        + xx(Site::B, Site::C) * C64::from(s.g_bc);
    HermitianMatrix::new_unchecked(m)
}
