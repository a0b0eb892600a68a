use serde::Serialize;

use super::stats::{locate_uniform, power_law_exponent, tail_start};
use crate::error::{Error, Result};
use crate::integrate::{quadrature, Trajectory, ZSample};
use crate::model::{lyapunov, relative_volume, script_g, script_h, Orbit, WarpedProductSpec, XyState, ZState};
use crate::systems::recover_y1;

/// Metric data recovered from a phase-space run, on the run's uniform
/// `s` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSeries {
    pub s_start: f64,
    pub s_step: f64,
    pub t: Vec<f64>,
    /// `g[k][i]` is the warp `g_i` at sample `k`.
    pub g: Vec<Vec<f64>>,
    pub u: Vec<f64>,
}

impl MetricSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn s(&self, k: usize) -> f64 {
        self.s_start + k as f64 * self.s_step
    }

    pub fn warp(&self, i: usize) -> Vec<f64> {
        self.g.iter().map(|g| g[i]).collect()
    }

    /// Linear interpolation of `(t, g, u)` at parameter `s`.
    pub fn at(&self, s: f64) -> Option<(f64, Vec<f64>, f64)> {
        let (k, w) = locate_uniform(self.len(), self.s_start, self.s_step, s)?;
        let lerp = |a: f64, b: f64| a + w * (b - a);
        let g = self.g[k].iter().zip(&self.g[k + 1]).map(|(a, b)| lerp(*a, *b)).collect();
        Some((lerp(self.t[k], self.t[k + 1]), g, lerp(self.u[k], self.u[k + 1])))
    }

    /// Log-log exponents of `g_i^2` against `t` over the final `fraction`
    /// of samples, and the relative change of `g_1` over the same window.
    pub fn tail_growth(&self, fraction: f64) -> Result<(Vec<f64>, f64)> {
        let k0 = tail_start(self.len(), fraction);
        let t = &self.t[k0..];
        let r = self.g.first().map_or(0, Vec::len);
        let exponents = (0..r)
            .map(|i| {
                let g2: Vec<f64> = self.g[k0..].iter().map(|g| g[i] * g[i]).collect();
                power_law_exponent(t, &g2)
            })
            .collect::<Result<Vec<_>>>()?;
        let g1 = self.warp(0);
        let last = g1[g1.len() - 1];
        Ok((exponents, (last - g1[k0]).abs() / last.abs()))
    }
}

/// Full phase-space states of a trajectory stored in either the full or
/// the subsystem layout. `Y_1` is recovered by quadrature when `y1_at_s0`
/// is given, otherwise read from the states (full layout only).
pub fn xy_states<M>(traj: &Trajectory<M>, r: usize, y1_at_s0: Option<f64>) -> Result<Vec<XyState>> {
    let full = traj.dim() == 2 * r;
    if !full && traj.dim() != 2 * r - 1 {
        return Err(Error::Dimension {
            expected: 2 * r,
            got: traj.dim(),
        });
    }
    let y1 = match (y1_at_s0, full) {
        (Some(y), _) => Some(recover_y1(traj, y)?),
        (None, true) => None,
        (None, false) => {
            return Err(Error::InvalidSeed(
                "Y_1(s_0) is needed to rebuild subsystem states".into(),
            ))
        }
    };
    Ok(traj
        .states()
        .enumerate()
        .map(|(k, v)| {
            let s = traj.time(k);
            let mut xy = if full {
                XyState::from_slice(s, v)
            } else {
                XyState::from_subsystem(s, v, 0.0)
            };
            if let Some(y1) = &y1 {
                xy.y[0] = y1[k];
            }
            xy
        })
        .collect())
}

fn warps(xy: &XyState, dims: &[usize], scale: f64) -> Result<Vec<f64>> {
    xy.y
        .iter()
        .zip(dims)
        .enumerate()
        .map(|(i, (&y, &d))| {
            if y > 0.0 {
                Ok((d as f64).sqrt() / y * scale)
            } else {
                Err(Error::Domain {
                    function: "reconstruct",
                    reason: format!("Y_{} = {y} is not positive", i + 1),
                })
            }
        })
        .collect()
}

/// Soliton metric from a phase-space run: `dt = sqrt(L/C) ds`,
/// `g_i = (sqrt(d_i)/Y_i) sqrt(L/C)` and `du = (H - 1) ds`, anchored at
/// `(t, u)` of the first sample.
pub fn reconstruct_soliton_metric<M>(
    traj: &Trajectory<M>,
    spec: &WarpedProductSpec,
    c: f64,
    y1_at_s0: Option<f64>,
    t_at_s0: f64,
    u_at_s0: f64,
) -> Result<MetricSeries> {
    if !(c < 0.0) {
        return Err(Error::InvalidParams(format!("soliton reconstruction needs C < 0, got {c}")));
    }
    let states = xy_states(traj, spec.r(), y1_at_s0)?;
    let mut inv_xi = Vec::with_capacity(states.len());
    let mut du = Vec::with_capacity(states.len());
    let mut g = Vec::with_capacity(states.len());
    for xy in &states {
        let l = lyapunov(xy, spec);
        if !(l < 0.0) {
            return Err(Error::Domain {
                function: "reconstruct_soliton_metric",
                reason: format!("L = {l} is not negative at s = {}", xy.s),
            });
        }
        let w = (l / c).sqrt();
        inv_xi.push(w);
        du.push(script_h(xy, spec.d()) - 1.0);
        g.push(warps(xy, spec.d(), w)?);
    }
    let t = quadrature(&inv_xi, traj.step())?;
    let u = quadrature(&du, traj.step())?;
    Ok(MetricSeries {
        s_start: traj.start(),
        s_step: traj.step(),
        t: t.into_iter().map(|v| t_at_s0 + v).collect(),
        g,
        u: u.into_iter().map(|v| u_at_s0 + v).collect(),
    })
}

/// Ricci-flat metric from a phase-space run on `{L = 0, H = 1}`:
/// `1/xi = exp(int G ds) / xi_0`, `dt = ds / xi` and
/// `g_i = (sqrt(d_i)/Y_i) / xi`. The potential stays at `u_at_s0`.
/// Fails if `|L|` or `|H - 1|` exceeds `tol` at any sample.
pub fn reconstruct_ricci_flat_metric<M>(
    traj: &Trajectory<M>,
    spec: &WarpedProductSpec,
    xi_at_s0: f64,
    y1_at_s0: Option<f64>,
    t_at_s0: f64,
    u_at_s0: f64,
    tol: f64,
) -> Result<MetricSeries> {
    if !(xi_at_s0 > 0.0) {
        return Err(Error::NonpositiveXi(xi_at_s0));
    }
    let states = xy_states(traj, spec.r(), y1_at_s0)?;
    let mut drift: f64 = 0.0;
    let mut gs = Vec::with_capacity(states.len());
    for xy in &states {
        drift = drift
            .max(lyapunov(xy, spec).abs())
            .max((script_h(xy, spec.d()) - 1.0).abs());
        gs.push(script_g(xy));
    }
    if !(drift <= tol) {
        return Err(Error::ConstraintDrift(format!(
            "max(|L|, |H - 1|) = {drift:e} exceeds {tol:e}"
        )));
    }
    let inv_xi: Vec<f64> = quadrature(&gs, traj.step())?
        .into_iter()
        .map(|i| i.exp() / xi_at_s0)
        .collect();
    let t = quadrature(&inv_xi, traj.step())?;
    let g = states
        .iter()
        .zip(&inv_xi)
        .map(|(xy, &w)| warps(xy, spec.d(), w))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricSeries {
        s_start: traj.start(),
        s_step: traj.step(),
        t: t.into_iter().map(|v| t_at_s0 + v).collect(),
        g,
        u: vec![u_at_s0; states.len()],
    })
}

/// Arclength `s(t) - s(t_0) = ln(v/v_0) - (u - u_0)` of a `t`-system state
/// relative to a reference state, the exact integral of `xi dt`.
pub fn arclength<O: Orbit + ?Sized>(z: &ZState, reference: &ZState, orbit: &O) -> f64 {
    let dims = orbit.dims();
    (relative_volume(z, dims) / relative_volume(reference, dims)).ln() - (z.u - reference.u)
}

/// Largest relative deviation of a reconstructed metric from a direct
/// `t`-system run over `t_range`, as `(t, g, u)` maxima. Relative
/// deviations of `u` are taken against `max(|u|, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTrip {
    pub t: f64,
    pub g: f64,
    pub u: f64,
    pub samples: usize,
}

impl RoundTrip {
    pub fn max(&self) -> f64 {
        self.t.max(self.g).max(self.u)
    }
}

pub fn round_trip<O: Orbit + ?Sized>(
    z_traj: &Trajectory<ZSample>,
    orbit: &O,
    series: &MetricSeries,
    s_offset: f64,
    t_range: (f64, f64),
) -> Result<RoundTrip> {
    let r = orbit.r();
    let reference = ZState::from_slice(z_traj.start(), z_traj.state(0));
    let mut out = RoundTrip {
        t: 0.0,
        g: 0.0,
        u: 0.0,
        samples: 0,
    };
    for (k, v) in z_traj.states().enumerate() {
        let t = z_traj.time(k);
        if t < t_range.0 || t > t_range.1 {
            continue;
        }
        let z = ZState::from_slice(t, v);
        let s = s_offset + arclength(&z, &reference, orbit);
        let (rt, rg, ru) = series.at(s).ok_or_else(|| {
            Error::Coverage(format!("reconstruction does not reach s = {s} (t = {t})"))
        })?;
        out.t = out.t.max((rt - t).abs() / t);
        for i in 0..r {
            out.g = out.g.max((rg[i] - z.g[i]).abs() / z.g[i]);
        }
        out.u = out.u.max((ru - z.u).abs() / z.u.abs().max(1.0));
        out.samples += 1;
    }
    if out.samples == 0 {
        return Err(Error::TooFewSamples(0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, IntegratorConfig, NoMonitor};
    use crate::systems::FnField;
    use approx::assert_abs_diff_eq;

    fn spec123() -> WarpedProductSpec {
        WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).unwrap()
    }

    fn constant_run(v: Vec<f64>, s_max: f64) -> Trajectory<()> {
        let dim = v.len();
        let f = FnField::new(dim, "constant", |_, _, dy: &mut [f64]| dy.fill(0.0));
        integrate(&f, &NoMonitor, 0.0, &v, &IntegratorConfig::new(0.01, s_max)).unwrap()
    }

    #[test]
    fn unit_sample_gives_unit_warps() {
        // lambda_2 is negligible, so L = -1 at X = 0, Y_i = sqrt(d_i).
        let spec = WarpedProductSpec::new(vec![1, 2], vec![0.0, 1e-300]).unwrap();
        let c = -4.0;
        let xy = XyState::new(vec![0.0; 2], vec![1.0, 2f64.sqrt()]);
        assert_abs_diff_eq!(lyapunov(&xy, &spec), -1.0, epsilon = 1e-15);
        let tr = constant_run(xy.to_vec(), 1.0);
        let m = reconstruct_soliton_metric(&tr, &spec, c, None, 2.0, 0.0).unwrap();
        for g in &m.g[0] {
            assert_abs_diff_eq!(*g, 1.0 / (-c).sqrt(), epsilon = 1e-15);
        }
        // H = 0 here, so u decreases at unit rate in s.
        assert_abs_diff_eq!(*m.u.last().unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(*m.t.last().unwrap(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn potential_is_stationary_where_h_is_one() {
        let spec = WarpedProductSpec::new(vec![1, 2], vec![0.0, 1.0]).unwrap();
        let x2 = 1.0 / 2f64.sqrt();
        let xy = XyState::new(vec![0.0, x2], vec![0.5, 0.5]);
        assert_abs_diff_eq!(script_h(&xy, spec.d()), 1.0, epsilon = 1e-15);
        let tr = constant_run(xy.to_vec(), 1.0);
        let m = reconstruct_soliton_metric(&tr, &spec, -1.0, None, 1.0, 0.3).unwrap();
        assert!(m.u.iter().all(|u| (u - 0.3).abs() < 1e-15));
    }

    #[test]
    fn soliton_reconstruction_needs_negative_l() {
        let spec = WarpedProductSpec::new(vec![1, 2], vec![0.0, 1.0]).unwrap();
        let tr = constant_run(vec![1.0, 0.0, 1.0, 0.0], 0.1);
        assert!(reconstruct_soliton_metric(&tr, &spec, -1.0, None, 1.0, 0.0).is_err());
        assert!(reconstruct_soliton_metric(&tr, &spec, 1.0, None, 1.0, 0.0).is_err());
    }

    #[test]
    fn constant_g_segment_grows_exponentially() {
        let spec = spec123();
        let e = crate::analyze::point_e(&spec).unwrap();
        let mut v = e.to_vec();
        v[3] = 0.7;
        let tr = constant_run(v, 2.0);
        let m = reconstruct_ricci_flat_metric(&tr, &spec, 2.0, None, 0.5, 0.0, 1e-12).unwrap();
        let g = script_g(&e);
        for k in (0..m.len()).step_by(20) {
            let s = m.s(k);
            let exact = 0.5 + ((g * s).exp() - 1.0) / (2.0 * g);
            assert!((m.t[k] - exact).abs() < 1e-5 * exact, "{} vs {exact}", m.t[k]);
        }
        let xi_end = 2.0 * (-g * 2.0f64).exp();
        assert!((m.g.last().unwrap()[0] - 1.0 / (0.7 * xi_end)).abs() < 1e-5);
    }

    #[test]
    fn ricci_flat_reconstruction_checks_drift() {
        let spec = spec123();
        let mut v = crate::analyze::point_e(&spec).unwrap().to_vec();
        v[1] *= 1.01;
        let tr = constant_run(v, 0.1);
        let err = reconstruct_ricci_flat_metric(&tr, &spec, 1.0, None, 1.0, 0.0, 1e-6).unwrap_err();
        assert!(matches!(err, Error::ConstraintDrift(_)));
    }

    #[test]
    fn subsystem_layout_needs_y1() {
        let tr = constant_run(vec![0.1; 5], 0.1);
        assert!(xy_states(&tr, 3, None).is_err());
        let st = xy_states(&tr, 3, Some(0.5)).unwrap();
        assert_eq!(st[0].y[0], 0.5);
        assert!(xy_states(&tr, 4, None).is_err());
    }

    #[test]
    fn series_interpolation_and_growth() {
        let n = 101;
        let s_step = 0.1;
        let t: Vec<f64> = (0..n).map(|k| (0.2 * k as f64 * s_step).exp()).collect();
        let g = t.iter().map(|t| vec![1.5, 3.0 * t, 0.5 * t.powf(1.1)]).collect();
        let m = MetricSeries {
            s_start: 0.0,
            s_step,
            t: t.clone(),
            g,
            u: vec![0.0; n],
        };
        let (ex, flat) = m.tail_growth(0.2).unwrap();
        assert_abs_diff_eq!(ex[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ex[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ex[2], 2.2, epsilon = 1e-12);
        assert_eq!(flat, 0.0);
        let (tt, gg, _) = m.at(0.15).unwrap();
        assert_abs_diff_eq!(tt, 0.5 * (t[1] + t[2]), epsilon = 1e-15);
        assert_eq!(gg[0], 1.5);
        assert!(m.at(10.5).is_none());
    }

    #[test]
    fn arclength_of_reference_is_zero() {
        let spec = spec123();
        let z = ZState {
            t: 1.0,
            g: vec![1.0, 2.0, 3.0],
            gdot: vec![0.5, 0.1, 0.2],
            u: -0.4,
            udot: -0.3,
        };
        assert_eq!(arclength(&z, &z, &spec), 0.0);
        let mut w = z.clone();
        w.g[1] *= std::f64::consts::E;
        w.u -= 1.0;
        assert_abs_diff_eq!(arclength(&w, &z, &spec), 3.0, epsilon = 1e-14);
    }
}
