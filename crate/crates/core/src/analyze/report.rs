use serde::Serialize;

use super::claims::{ClaimFlag, Relation};
use super::monotonicity::{monotonicity_monitors, SKIP};
use super::stats::{coefficient_of_variation, least_squares, mean, power_law_exponent, tail_start};
use crate::error::Result;
use crate::integrate::{Termination, Trajectory, ZSample};
use crate::model::{Mode, Orbit, SolitonParams, ZState};

pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;

/// Tail statistics of the normalized coordinates
/// `Xtilde_i = X_i / sqrt(d_i) = g_i'/(xi g_i)` and
/// `Ytilde_i = Y_i / sqrt(d_i) = 1/(xi g_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XyLimits {
    pub xtilde: Vec<f64>,
    pub xtilde_max_abs: Vec<f64>,
    pub ytilde: Vec<f64>,
    pub ytilde_max_abs: Vec<f64>,
    pub ytilde_cv: Vec<f64>,
    /// `X_i / Y_i^2`, whose limit is `lambda_i / sqrt(d_i)`.
    pub x_over_y2: Vec<f64>,
    pub xtilde_ratio: f64,
    pub ytilde_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub label: String,
    pub mode: Mode,
    pub termination: Termination,
    pub samples: usize,
    pub tail_window: Option<[f64; 2]>,
    pub udot_limit: Option<f64>,
    pub xi_limit: Option<f64>,
    pub g1_limit: Option<f64>,
    /// `g_i^2 sqrt(-C) / (2 lambda_i t)`, `None` where it is undefined.
    pub growth_ratios: Vec<Option<f64>>,
    pub xy_limits: Option<XyLimits>,
    /// Log-log slopes of `g_i^2` against `t` (Ricci-flat runs).
    pub power_exponents: Option<Vec<f64>>,
    /// `|g_1(end) - g_1(tail start)| / g_1(end)`.
    pub g1_tail_change: Option<f64>,
    pub lcal_limit: Option<f64>,
    pub claim_flags: Vec<ClaimFlag>,
}

impl DiagnosticsReport {
    pub fn all_passed(&self) -> bool {
        self.claim_flags.iter().all(|f| f.passed)
    }

    pub fn flag(&self, name: &str) -> Option<&ClaimFlag> {
        self.claim_flags.iter().find(|f| f.name == name)
    }
}

/// Tail fits over the final `tail_fraction` of the samples of a `t`-system
/// run: least-squares slope of `u` for `u'`, means for the other limits.
///
/// Soliton runs also carry the monotonicity flags, `X_i/Y_i^2` against
/// `lambda_i/sqrt(d_i)` (5%) where the Einstein constants are known and
/// `|L + 1| < 0.05`. Ricci-flat runs carry `g_i^2` exponents in
/// `(1.8, 2.2)` for the non-collapsing factors and a flat `g_1` (1%).
/// A run that stopped early, or whose tail holds fewer than two samples,
/// gets no fits and no flags.
pub fn asymptotic_report<O: Orbit + ?Sized>(
    traj: &Trajectory<ZSample>,
    orbit: &O,
    p: &SolitonParams,
    mode: Mode,
    tail_fraction: f64,
) -> Result<DiagnosticsReport> {
    let r = orbit.r();
    let mut report = DiagnosticsReport {
        label: traj.label().to_string(),
        mode,
        termination: traj.termination(),
        samples: traj.len(),
        tail_window: None,
        udot_limit: None,
        xi_limit: None,
        g1_limit: None,
        growth_ratios: vec![None; r],
        xy_limits: None,
        power_exponents: None,
        g1_tail_change: None,
        lcal_limit: None,
        claim_flags: vec![],
    };
    if !traj.termination().is_complete() || traj.len() < 3 {
        return Ok(report);
    }
    let dims = orbit.dims();
    let k0 = tail_start(traj.len(), tail_fraction);
    if traj.len() - k0 < 2 {
        return Ok(report);
    }
    let times = traj.times();
    let t = &times[k0..];
    report.tail_window = Some([t[0], t[t.len() - 1]]);
    let tail: Vec<ZState> = (k0..traj.len())
        .map(|k| ZState::from_slice(times[k], traj.state(k)))
        .collect();
    let u: Vec<f64> = tail.iter().map(|z| z.u).collect();
    report.udot_limit = Some(least_squares(t, &u)?.1);
    let xi: Vec<f64> = traj.monitors()[k0..].iter().map(|m| m.scalars.xi).collect();
    report.xi_limit = Some(mean(&xi));
    let g = |i: usize| -> Vec<f64> { tail.iter().map(|z| z.g[i]).collect() };
    report.g1_limit = Some(mean(&g(0)));
    let g1 = g(0);
    report.g1_tail_change = Some((g1[g1.len() - 1] - g1[0]).abs() / g1[g1.len() - 1].abs());

    let xt = |i: usize| -> Vec<f64> { tail.iter().zip(&xi).map(|(z, x)| z.gdot[i] / (x * z.g[i])).collect() };
    let yt = |i: usize| -> Vec<f64> { tail.iter().zip(&xi).map(|(z, x)| 1.0 / (x * z.g[i])).collect() };
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut lim = XyLimits {
        xtilde: vec![],
        xtilde_max_abs: vec![],
        ytilde: vec![],
        ytilde_max_abs: vec![],
        ytilde_cv: vec![],
        x_over_y2: vec![],
        xtilde_ratio: f64::NAN,
        ytilde_ratio: f64::NAN,
    };
    for i in 0..r {
        let (x, y) = (xt(i), yt(i));
        let sd = (dims[i] as f64).sqrt();
        lim.xtilde.push(mean(&x));
        lim.xtilde_max_abs.push(max_abs(&x));
        lim.ytilde.push(mean(&y));
        lim.ytilde_max_abs.push(max_abs(&y));
        lim.ytilde_cv.push(coefficient_of_variation(&y));
        let q: Vec<f64> = x.iter().zip(&y).map(|(x, y)| sd * x / (sd * y * sd * y)).collect();
        lim.x_over_y2.push(mean(&q));
    }
    if r >= 2 {
        let ratio = |a: Vec<f64>, b: Vec<f64>| mean(&a.iter().zip(&b).map(|(a, b)| a / b).collect::<Vec<_>>());
        lim.xtilde_ratio = ratio(xt(0), xt(1));
        lim.ytilde_ratio = ratio(yt(0), yt(1));
    }

    match mode {
        Mode::Soliton => {
            if traj.len() >= SKIP + 2 {
                report.claim_flags = monotonicity_monitors(traj, orbit, p)?;
            } else {
                // Too coarse a decimation; say so instead of dropping the claims.
                report.claim_flags.push(ClaimFlag::scalar(
                    "stored samples for monotonicity checks",
                    traj.len() as f64,
                    Relation::Ge,
                    (SKIP + 2) as f64,
                ));
            }
            let lcal: Vec<f64> = xi.iter().map(|x| p.c / (x * x)).collect();
            let lm = mean(&lcal);
            report.lcal_limit = Some(lm);
            report.claim_flags.push(ClaimFlag::near("|Lcal + 1| tail", lm, -1.0, 0.05));
            if let Some(lambda) = orbit.einstein_constants() {
                for i in 0..r {
                    if lambda[i] > 0.0 {
                        let g2: Vec<f64> = g(i).iter().zip(t).map(|(g, t)| g * g * (-p.c).sqrt() / (2.0 * lambda[i] * t)).collect();
                        report.growth_ratios[i] = Some(mean(&g2));
                        let target = lambda[i] / (dims[i] as f64).sqrt();
                        report.claim_flags.push(ClaimFlag::scalar(
                            format!("X_{0}/Y_{0}^2 relative error to lambda/sqrt(d)", i + 1),
                            (lim.x_over_y2[i] - target).abs() / target,
                            Relation::Le,
                            0.05,
                        ));
                    }
                }
            }
        }
        Mode::RicciFlat => {
            let exps = (0..r).map(|i| {
                let g2: Vec<f64> = g(i).iter().map(|g| g * g).collect();
                power_law_exponent(t, &g2)
            });
            let exps = exps.collect::<Result<Vec<_>>>()?;
            for (i, e) in exps.iter().enumerate().skip(1) {
                for f in ClaimFlag::interval(&format!("g_{}^2 exponent", i + 1), *e, 1.8, 2.2) {
                    report.claim_flags.push(f);
                }
            }
            report.power_exponents = Some(exps);
            report.claim_flags.push(ClaimFlag::scalar(
                "g_1 tail relative change",
                report.g1_tail_change.unwrap_or(f64::NAN),
                Relation::Lt,
                1e-2,
            ));
        }
    }
    report.xy_limits = Some(lim);
    Ok(report)
}
