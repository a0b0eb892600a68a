//! CSV time series and JSON reports.
//!
//! Floats are written as `{:.16e}`: 17 significant digits, enough to
//! round-trip an `f64`, in a layout that does not depend on the value.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use solitonflow_core::integrate::{Trajectory, XySample, ZSample};
use solitonflow_core::model::{XyState, ZState};

/// Header of a `t`-system CSV for `r` factors.
pub fn z_header(r: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=r).map(|i| format!("g_{i}")));
    h.extend((1..=r).map(|i| format!("gdot_{i}")));
    h.extend(["u", "udot", "xi", "trL", "Rbar", "Lcal", "H"].map(String::from));
    h.extend((1..=r).map(|i| format!("Xtilde_{i}")));
    h.extend((1..=r).map(|i| format!("Ytilde_{i}")));
    h.push("res2".into());
    h
}

/// Header of a phase-space CSV for `r` factors.
pub fn xy_header(r: usize) -> Vec<String> {
    let mut h = vec!["s".to_string()];
    h.extend((1..=r).map(|i| format!("X_{i}")));
    h.extend((1..=r).map(|i| format!("Y_{i}")));
    h.extend(["Lcal", "H", "G"].map(String::from));
    h
}

fn write_row(w: &mut impl Write, row: &[f64]) -> io::Result<()> {
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{v:.16e}")?;
    }
    w.write_all(b"\n")
}

pub fn write_z_csv(w: &mut impl Write, traj: &Trajectory<ZSample>, r: usize) -> io::Result<()> {
    writeln!(w, "{}", z_header(r).join(","))?;
    let mut row = Vec::with_capacity(4 * r + 9);
    for (k, (v, m)) in traj.states().zip(traj.monitors()).enumerate() {
        let z = ZState::from_slice(traj.time(k), v);
        let sc = &m.scalars;
        row.clear();
        row.push(z.t);
        row.extend(&z.g);
        row.extend(&z.gdot);
        row.extend([z.u, z.udot, sc.xi, sc.tr_l, sc.rbar]);
        row.push(sc.lcal.unwrap_or(f64::NAN));
        row.push(sc.h.unwrap_or(f64::NAN));
        row.extend((0..r).map(|i| z.gdot[i] / (sc.xi * z.g[i])));
        row.extend((0..r).map(|i| 1.0 / (sc.xi * z.g[i])));
        row.push(m.residuals.res2);
        write_row(w, &row)?;
    }
    Ok(())
}

pub fn write_xy_csv(w: &mut impl Write, traj: &Trajectory<XySample>, r: usize) -> io::Result<()> {
    writeln!(w, "{}", xy_header(r).join(","))?;
    let mut row = Vec::with_capacity(2 * r + 4);
    for (k, (v, m)) in traj.states().zip(traj.monitors()).enumerate() {
        let xy = XyState::from_slice(traj.time(k), v);
        row.clear();
        row.push(xy.s);
        row.extend(&xy.x);
        row.extend(&xy.y);
        row.extend([m.lcal, m.h, m.g]);
        write_row(w, &row)?;
    }
    Ok(())
}

/// Writes through a buffered file, creating parent directories.
pub fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()
}

/// Pretty JSON; non-finite floats become `null`.
pub fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_header_layout() {
        let h = z_header(2).join(",");
        assert_eq!(
            h,
            "t,g_1,g_2,gdot_1,gdot_2,u,udot,xi,trL,Rbar,Lcal,H,Xtilde_1,Xtilde_2,Ytilde_1,Ytilde_2,res2"
        );
        assert_eq!(z_header(3).len(), 4 * 3 + 9);
    }

    #[test]
    fn floats_have_seventeen_significant_digits() {
        let mut buf = vec![];
        write_row(&mut buf, &[0.1, -2.5e-300, 1.0 / 3.0]).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(line, "1.0000000000000001e-1,-2.5000000000000000e-300,3.3333333333333331e-1\n");
        for field in line.trim().split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), field);
        }
    }
}
