//! CSV writers for the library's table outputs. Comma-separated, '.' decimal
//! point, lowercase headers, LF line endings; floats print in shortest
//! round-trip form so identical runs produce byte-identical files.

use std::io::{self, Write};

use crate::dgp::SamplePath;
use crate::domain::DomainSet;
use crate::estimators::EstimateSheet;
use crate::experiments::{OrderTable, RateTable};
use crate::grid::EvalGrid;

/// Path CSV: `t,x,u,y` with `t = 1..n`.
pub fn write_path_csv(w: &mut impl Write, path: &SamplePath) -> io::Result<()> {
    w.write_all(b"t,x,u,y\n")?;
    for t in 0..path.n {
        writeln!(w, "{},{},{},{}", t + 1, path.x[t], path.u[t], path.y[t])?;
    }
    Ok(())
}

/// Signal CSV: `a,l_n` with `a = x / d_n`.
pub fn write_signal_csv(
    w: &mut impl Write,
    grid: &EvalGrid,
    values: &[f64],
    d_n: f64,
) -> io::Result<()> {
    w.write_all(b"a,l_n\n")?;
    for (x0, v) in grid.points().iter().zip(values) {
        writeln!(w, "{},{}", x0 / d_n, v)?;
    }
    Ok(())
}

/// Domain CSV: one `l,r` row per interval.
pub fn write_domain_csv(w: &mut impl Write, domain: &DomainSet) -> io::Result<()> {
    w.write_all(b"l,r\n")?;
    for (l, r) in domain.intervals() {
        writeln!(w, "{l},{r}")?;
    }
    Ok(())
}

/// Estimate sheet CSV: `x,m_hat,denom,slope,degenerate`; undefined entries
/// are left empty.
pub fn write_sheet_csv(w: &mut impl Write, sheet: &EstimateSheet) -> io::Result<()> {
    w.write_all(b"x,m_hat,denom,slope,degenerate\n")?;
    for (i, &x0) in sheet.grid.points().iter().enumerate() {
        let m = sheet.m_hat[i].map_or(String::new(), |v| v.to_string());
        let s = sheet.slope[i].map_or(String::new(), |v| v.to_string());
        writeln!(
            w,
            "{},{},{},{},{}",
            x0, m, sheet.denom[i], s, sheet.degenerate[i] as u8
        )?;
    }
    Ok(())
}

/// Rate table CSV:
/// `n,rep,h,sup_err,coverage,domain_measure,degenerate_count,error`.
pub fn write_rate_csv(w: &mut impl Write, table: &RateTable) -> io::Result<()> {
    w.write_all(b"n,rep,h,sup_err,coverage,domain_measure,degenerate_count,error\n")?;
    for r in &table.rows {
        let sup = r.sup_err.map_or(String::new(), |v| v.to_string());
        let err = r.error.as_deref().unwrap_or("");
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.rep,
            r.h,
            sup,
            r.coverage,
            r.domain_measure,
            r.degenerate_count,
            err.replace(',', ";")
        )?;
    }
    Ok(())
}

/// Order table CSV: `n,rep,h,covariance_sup,zero_energy_sup`.
pub fn write_order_csv(w: &mut impl Write, table: &OrderTable) -> io::Result<()> {
    w.write_all(b"n,rep,h,covariance_sup,zero_energy_sup\n")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.n, r.rep, r.h, r.covariance_sup, r.zero_energy_sup
        )?;
    }
    Ok(())
}
