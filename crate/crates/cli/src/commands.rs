use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crossover_core::circuit::{effective_params, CircuitMapping, CircuitParams};
use crossover_core::crossover::{
    detect_all, linear_grid, sweep, sweep_point, CriticalPoint, SweepRecord,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{write_critical, write_sweep};
use crate::verify::{self, VerifyReport};
use crate::CliError;

pub fn sweep_records(cfg: &RunConfig) -> Result<Vec<SweepRecord>, CliError> {
    let s = &cfg.sweep;
    let grid = linear_grid(s.jc_min, s.jc_max, s.points)?;
    Ok(sweep(&cfg.params, &grid, &cfg.numerics.sweep_settings())?)
}

pub fn critical_points(cfg: &RunConfig) -> Result<Vec<CriticalPoint>, CliError> {
    let s = &cfg.sweep;
    Ok(detect_all(
        &cfg.params,
        s.jc_min,
        s.jc_max,
        &cfg.numerics.scan_settings(),
    )?)
}

pub fn verify_report(cfg: &RunConfig, skip: &[String]) -> Result<VerifyReport, CliError> {
    verify::run(cfg, skip)
}

fn circuit_of(cfg: &RunConfig) -> Result<CircuitParams, CliError> {
    cfg.circuit.ok_or_else(|| {
        CliError::Config("the circuit command needs a \"circuit\" section in the config".into())
    })
}

pub fn circuit_mapping(cfg: &RunConfig) -> Result<CircuitMapping, CliError> {
    Ok(effective_params(&circuit_of(cfg)?)?)
}

/// One record per flux_AC = flux_BC value, each at the coupling that flux
/// produces.
pub fn circuit_sweep(cfg: &RunConfig) -> Result<Vec<SweepRecord>, CliError> {
    let circuit = circuit_of(cfg)?;
    let f = &cfg.circuit_sweep;
    let fluxes = linear_grid(f.flux_min, f.flux_max, f.points)?;
    let settings = cfg.numerics.sweep_settings();
    fluxes
        .par_iter()
        .map(|&flux| {
            let mut c = circuit;
            c.coupler.flux_ac = flux;
            c.coupler.flux_bc = flux;
            let m = effective_params(&c)?;
            Ok(sweep_point(&m.params, m.params.j_c, &settings)?)
        })
        .collect()
}

/// Runs `write` against the configured output file, or stdout.
pub fn with_output<F>(path: Option<&Path>, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> csv::Result<()>,
{
    let fail = |name: String, e: &dyn std::fmt::Display| CliError::Output {
        path: name,
        message: e.to_string(),
    };
    match path {
        Some(p) => {
            let name = p.display().to_string();
            let file = File::create(p).map_err(|e| fail(name.clone(), &e))?;
            let mut w = BufWriter::new(file);
            write(&mut w).map_err(|e| fail(name.clone(), &e))?;
            w.flush().map_err(|e| fail(name, &e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| fail("stdout".into(), &e))
        }
    }
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let records = sweep_records(cfg)?;
    with_output(cfg.output.as_deref(), |w| write_sweep(w, &records))
}

pub fn cmd_critical(cfg: &RunConfig) -> Result<(), CliError> {
    let points = critical_points(cfg)?;
    with_output(cfg.output.as_deref(), |w| write_critical(w, &points))
}

pub fn cmd_verify(cfg: &RunConfig, skip: &[String]) -> Result<(), CliError> {
    let report = verify_report(cfg, skip)?;
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

pub fn cmd_circuit(cfg: &RunConfig, chain_sweep: bool) -> Result<(), CliError> {
    let m = circuit_mapping(cfg)?;
    let p = m.params;
    let echo = format!(
        "omega0 = {}\nomega_c = {}\nj = {}\nj_c = {}",
        p.omega0, p.omega_c, p.j, p.j_c
    );
    // Keep stdout clean for CSV when the sweep is going there.
    if chain_sweep && cfg.output.is_none() {
        eprintln!("{echo}");
    } else {
        println!("{echo}");
    }
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
    if chain_sweep {
        let records = circuit_sweep(cfg)?;
        with_output(cfg.output.as_deref(), |w| write_sweep(w, &records))?;
    }
    Ok(())
}
