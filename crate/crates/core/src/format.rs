//! CSV emission for the bound table, golden values and simulation
//! trajectories. Lines beginning with `#` are provenance comments; readers
//! should treat `#` as the comment character.

use std::io::Write;

use crate::bellman::BellmanProfile;
use crate::bounds::{BoundTableRow, TABLE_COLUMNS};
use crate::error::Result;
use crate::sim::SimResult;

/// Formats `v` with `digits` significant digits in the style of C's `%g`.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn comment_lines<W: Write>(out: &mut W, header: &[String]) -> std::io::Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// `p,z_pprime,tau_p,tau_upper,bound_chain,bound_thm,legacy_sqrt,legacy_1575`
/// with 12 significant digits.
pub fn write_bounds_csv<W: Write>(out: W, header: &[String], rows: &[BoundTableRow]) -> Result<()> {
    let mut out = out;
    comment_lines(&mut out, header).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_COLUMNS).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.values().iter().map(|&v| fmt_sig(v, 12))).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub const GOLDEN_COLUMNS: [&str; 5] = ["p", "z_p", "c_p", "a_p", "c_theorem"];

/// Golden values `(p, z_p, c_p, a_p, C_theorem)` in shortest round-trip form.
pub fn write_goldens_csv<W: Write>(out: W, header: &[String], profiles: &[BellmanProfile]) -> Result<()> {
    let mut out = out;
    comment_lines(&mut out, header).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GOLDEN_COLUMNS).map_err(csv_err)?;
    for prof in profiles {
        let c = &prof.constants;
        w.write_record([c.p, c.z_p, c.c_p, prof.a_p, c.c_theorem].iter().map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub const TRAJECTORY_COLUMNS: [&str; 3] = ["checkpoint_time", "mean_U", "se"];

pub fn write_trajectory_csv<W: Write>(out: W, header: &[String], result: &SimResult) -> Result<()> {
    let mut out = out;
    comment_lines(&mut out, header).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_COLUMNS).map_err(csv_err)?;
    for point in &result.u_trajectory {
        w.write_record([point.time, point.mean_u, point.se].iter().map(|&v| fmt_sig(v, 12)))
            .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

fn io_err(e: std::io::Error) -> crate::Error {
    crate::Error::Output(e.to_string())
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Output(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(1.0, 12), "1");
        assert_eq!(fmt_sig(std::f64::consts::SQRT_2, 12), "1.41421356237");
        assert_eq!(fmt_sig(1395.98444931218, 12), "1395.98444931");
        assert_eq!(fmt_sig(1.5e-7, 12), "1.5e-7");
        assert_eq!(fmt_sig(123456789012345.0, 12), "1.23456789012e14");
        assert_eq!(fmt_sig(-0.25, 12), "-0.25");
    }
}
