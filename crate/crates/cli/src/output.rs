use std::io::Write;

use crossover_core::crossover::{CriticalPoint, SweepRecord};

pub const SWEEP_COLUMNS: [&str; 25] = [
    "jc",
    "omega_ab",
    "omega_ac",
    "v_ab",
    "v_ac",
    "e_c_ab",
    "e_b_ac",
    "y_a",
    "y_c",
    "f_a",
    "f_c",
    "qfi",
    "p001",
    "p010",
    "p100",
    "p111",
    "p_sym_010_100_direct",
    "p_sym_010_100_paper",
    "p_001_111_direct",
    "p_001_111_paper",
    "p_010_001_direct",
    "p_010_001_paper",
    "degenerate_ab",
    "degenerate_ac",
    "provenance",
];

pub const CRITICAL_COLUMNS: [&str; 5] = ["kind", "jc_star", "lo", "hi", "residual"];

/// 17 significant digits, enough to round-trip an f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn sweep_row(r: &SweepRecord) -> Vec<String> {
    let s = &r.superposition;
    let floats = [
        r.jc,
        r.omega_ab,
        r.omega_ac,
        r.v_ab,
        r.v_ac,
        r.e_c_ab,
        r.e_b_ac,
        r.y_a,
        r.y_c,
        r.f_a,
        r.f_c,
        r.qfi,
        r.basis.p001,
        r.basis.p010,
        r.basis.p100,
        r.basis.p111,
        s.sym_010_100.direct,
        s.sym_010_100.paper_form,
        s.sym_001_111.direct,
        s.sym_001_111.paper_form,
        s.sym_010_001.direct,
        s.sym_010_001.paper_form,
    ];
    let mut row: Vec<String> = floats.iter().map(|&x| fmt_float(x)).collect();
    row.push(r.degenerate_ab.to_string());
    row.push(r.degenerate_ac.to_string());
    row.push(r.provenance.as_str().to_string());
    row
}

pub fn write_sweep<W: Write>(out: W, records: &[SweepRecord]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in records {
        w.write_record(sweep_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_critical<W: Write>(out: W, points: &[CriticalPoint]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(CRITICAL_COLUMNS)?;
    for c in points {
        w.write_record([
            c.kind.as_str().to_string(),
            fmt_float(c.jc_star),
            fmt_float(c.bracket.0),
            fmt_float(c.bracket.1),
            fmt_float(c.residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}
