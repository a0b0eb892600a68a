use super::claims::{ClaimFlag, Relation};
use super::critical::{f_hat_minimum, point_e};
use super::monotonicity::SLACK;
use super::reconstruct::xy_states;
use super::stats::{mean, tail_start};
use crate::error::Result;
use crate::integrate::Trajectory;
use crate::model::{f_hat, lyapunov, script_h, Orbit, WarpedProductSpec};

/// Tolerance on constraint drift, distance to `E` and the tail of `F_hat`.
pub const CONVERGENCE_TOL: f64 = 1e-3;

/// Flags for a Ricci-flat phase-space run:
///
/// * constraint drift `max |L|` and `max |H - 1|`, plus the largest
///   per-step projection correction when a projection was used,
/// * `F_hat` non-increasing between samples (slack 1e-10),
/// * max-norm distance to `E` at the last sample, over `X` and
///   `Y_2..Y_r` (`Y_1` is not a coordinate of `E`),
/// * tail mean of `F_hat` against its minimum value.
pub fn ricci_flat_convergence<M>(
    traj: &Trajectory<M>,
    spec: &WarpedProductSpec,
    tail_fraction: f64,
) -> Result<Vec<ClaimFlag>> {
    // None of the flags depends on Y_1, so any value fills it in.
    let states = xy_states(traj, spec.r(), if traj.dim() % 2 == 1 { Some(1.0) } else { None })?;
    let e = point_e(spec)?;
    let l: Vec<(f64, f64)> = states.iter().map(|xy| (xy.s, lyapunov(xy, spec).abs())).collect();
    let h: Vec<(f64, f64)> = states
        .iter()
        .map(|xy| (xy.s, (script_h(xy, spec.d()) - 1.0).abs()))
        .collect();
    let fh = states
        .iter()
        .map(|xy| f_hat(xy, spec))
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<(f64, f64)> = fh
        .windows(2)
        .zip(&states[1..])
        .map(|(w, xy)| (xy.s, w[1] - w[0]))
        .collect();
    let last = states.last().expect("trajectories hold the seed");
    let dist = (0..spec.r())
        .map(|i| (last.x[i] - e.x[i]).abs())
        .chain((1..spec.r()).map(|i| (last.y[i] - e.y[i]).abs()))
        .fold(0.0f64, f64::max);
    let k0 = tail_start(fh.len(), tail_fraction);
    let mut flags = vec![
        ClaimFlag::series("|L| drift", l, Relation::Lt, CONVERGENCE_TOL),
        ClaimFlag::series("|H - 1| drift", h, Relation::Lt, CONVERGENCE_TOL),
    ];
    if traj.max_projection() > 0.0 {
        flags.push(ClaimFlag::scalar(
            "per-step projection correction",
            traj.max_projection(),
            Relation::Lt,
            CONVERGENCE_TOL,
        ));
    }
    flags.push(ClaimFlag::series("F_hat non-increasing", steps, Relation::Le, SLACK));
    let mut d = ClaimFlag::scalar("distance to E at end", dist, Relation::Lt, CONVERGENCE_TOL);
    d.worst_t = Some(last.s);
    flags.push(d);
    flags.push(ClaimFlag::near(
        "F_hat tail - minimum",
        mean(&fh[k0..]),
        f_hat_minimum(spec),
        CONVERGENCE_TOL,
    ));
    Ok(flags)
}
