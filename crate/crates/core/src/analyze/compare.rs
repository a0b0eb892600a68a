use serde::Serialize;

use super::reconstruct::arclength;
use super::stats::interpolate_uniform;
use crate::error::{Error, Result};
use crate::integrate::{Trajectory, ZSample};
use crate::model::{xy_from_z, Orbit, WarpedProductSpec, ZState};

/// Deviation between a `t`-system run and a phase-space run from the same
/// seed, measured in phase-space coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    /// Max deviation per phase-space coordinate, in the layout of the
    /// phase-space run.
    pub per_coordinate: Vec<f64>,
    pub max_deviation: f64,
    pub worst_t: f64,
    pub samples: usize,
    /// `(t, max-norm deviation)` at every compared sample.
    pub pointwise: Vec<(f64, f64)>,
}

/// Maps each `t`-sample with `t` in `t_range` to phase space, locates it
/// at `s = int xi dt` (computed exactly as `ln(v/v_0) - (u - u_0)`) on the
/// phase-space run, whose first sample must be the image of the first
/// `t`-sample, and compares against the linearly interpolated state.
pub fn oracle_compare<M>(
    z_traj: &Trajectory<ZSample>,
    xy_traj: &Trajectory<M>,
    spec: &WarpedProductSpec,
    t_range: (f64, f64),
) -> Result<OracleReport> {
    let r = spec.r();
    let subsystem = match xy_traj.dim() {
        d if d == 2 * r => false,
        d if d == 2 * r - 1 => true,
        d => {
            return Err(Error::Dimension {
                expected: 2 * r,
                got: d,
            })
        }
    };
    let columns: Vec<Vec<f64>> = (0..xy_traj.dim()).map(|i| xy_traj.component(i)).collect();
    let reference = ZState::from_slice(z_traj.start(), z_traj.state(0));
    let mut out = OracleReport {
        per_coordinate: vec![0.0; xy_traj.dim()],
        max_deviation: 0.0,
        worst_t: f64::NAN,
        samples: 0,
        pointwise: vec![],
    };
    for (k, v) in z_traj.states().enumerate() {
        let t = z_traj.time(k);
        if t < t_range.0 || t > t_range.1 {
            continue;
        }
        let z = ZState::from_slice(t, v);
        let s = xy_traj.start() + arclength(&z, &reference, spec);
        let xy = xy_from_z(&z, spec.d())?;
        let mapped = if subsystem { xy.subsystem_vec() } else { xy.to_vec() };
        let mut dev: f64 = 0.0;
        for (i, col) in columns.iter().enumerate() {
            let other = interpolate_uniform(col, xy_traj.start(), xy_traj.step(), s).ok_or_else(|| {
                Error::Coverage(format!("phase-space run does not reach s = {s} (t = {t})"))
            })?;
            let d = (mapped[i] - other).abs();
            out.per_coordinate[i] = out.per_coordinate[i].max(d);
            dev = dev.max(d);
        }
        if !(dev <= out.max_deviation) {
            out.max_deviation = dev;
            out.worst_t = t;
        }
        out.pointwise.push((t, dev));
        out.samples += 1;
    }
    if out.samples == 0 {
        return Err(Error::TooFewSamples(0));
    }
    Ok(out)
}
