use super::claims::{ClaimFlag, Relation};
use crate::error::{Error, Result};
use crate::integrate::{Trajectory, ZSample};
use crate::model::{f0_and_calf, Orbit, SolitonParams, ZState};

/// Samples `0..SKIP` (the seed and the first ten steps after it) are left
/// out of every check, where the series truncation dominates.
pub const SKIP: usize = 11;
/// Allowed increase of a non-strictly monotone quantity between samples.
pub const SLACK: f64 = 1e-10;

/// Checks the monotonicity and bound claims for steady solitons along a
/// `t`-system run:
///
/// * `u' < 0` and `u'' < 0` (central differences of `u'`),
/// * `tr L` strictly decreasing with `0 < tr L <= n/t`,
/// * `xi` strictly decreasing,
/// * `Rbar` strictly decreasing with
///   `-u' tr L < Rbar < 2 sqrt(-C) n/t + n^2/t^2`,
/// * `F` strictly decreasing and `F_0` non-increasing.
///
/// Strict claims fail on any difference `>= 0`, non-strict ones on an
/// increase above [`SLACK`].
pub fn monotonicity_monitors<O: Orbit + ?Sized>(
    traj: &Trajectory<ZSample>,
    orbit: &O,
    p: &SolitonParams,
) -> Result<Vec<ClaimFlag>> {
    if !(p.c < 0.0 && p.epsilon == 0.0) {
        return Err(Error::InvalidParams(
            "monotonicity claims are stated for steady solitons with C < 0".into(),
        ));
    }
    if traj.len() < SKIP + 2 {
        return Err(Error::TooFewSamples(traj.len()));
    }
    let n = orbit.n() as f64;
    let h = traj.step();
    let times = traj.times();
    let mon = traj.monitors();
    let udot = traj.component(traj.dim() - 1);
    let tr_l: Vec<f64> = mon.iter().map(|m| m.scalars.tr_l).collect();
    let xi: Vec<f64> = mon.iter().map(|m| m.scalars.xi).collect();
    let rbar: Vec<f64> = mon.iter().map(|m| m.scalars.rbar).collect();
    let (f0, calf): (Vec<f64>, Vec<f64>) = traj
        .states()
        .enumerate()
        .map(|(k, v)| f0_and_calf(&ZState::from_slice(times[k], v), orbit))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();

    let len = traj.len();
    let points = |x: &[f64]| -> Vec<(f64, f64)> { (SKIP..len).map(|k| (times[k], x[k])).collect() };
    let steps = |x: &[f64]| -> Vec<(f64, f64)> {
        (SKIP..len - 1).map(|k| (times[k + 1], x[k + 1] - x[k])).collect()
    };
    let uddot: Vec<(f64, f64)> = (SKIP..len - 1)
        .map(|k| (times[k], (udot[k + 1] - udot[k - 1]) / (2.0 * h)))
        .collect();
    let sqrt_mc = (-p.c).sqrt();
    let lower: Vec<f64> = (0..len).map(|k| rbar[k] + udot[k] * tr_l[k]).collect();
    let upper: Vec<f64> = (0..len)
        .map(|k| {
            let t = times[k];
            2.0 * sqrt_mc * n / t + n * n / (t * t) - rbar[k]
        })
        .collect();
    let t_tr_l: Vec<f64> = (0..len).map(|k| times[k] * tr_l[k] - n).collect();

    Ok(vec![
        ClaimFlag::series("udot < 0", points(&udot), Relation::Lt, 0.0),
        ClaimFlag::series("uddot < 0", uddot, Relation::Lt, 0.0),
        ClaimFlag::series("trL strictly decreasing", steps(&tr_l), Relation::Lt, 0.0),
        ClaimFlag::series("trL > 0", points(&tr_l), Relation::Gt, 0.0),
        ClaimFlag::series("t trL - n <= 0", points(&t_tr_l), Relation::Le, SLACK),
        ClaimFlag::series("xi strictly decreasing", steps(&xi), Relation::Lt, 0.0),
        ClaimFlag::series("Rbar strictly decreasing", steps(&rbar), Relation::Lt, 0.0),
        ClaimFlag::series("Rbar + udot trL > 0", points(&lower), Relation::Gt, 0.0),
        ClaimFlag::series(
            "2 sqrt(-C) n/t + n^2/t^2 - Rbar > 0",
            points(&upper),
            Relation::Gt,
            0.0,
        ),
        ClaimFlag::series("F strictly decreasing", steps(&calf), Relation::Lt, 0.0),
        ClaimFlag::series("F0 non-increasing", steps(&f0), Relation::Le, SLACK),
    ])
}
