//! Fixed-step classical Runge-Kutta integration on a uniform grid, with a
//! per-step monitor and stop conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    conservation_residual, lyapunov, scalars_from_z, script_g, script_h, GeometryScalars, Orbit,
    Residuals, SolitonParams, WarpedProductSpec, XyState, ZState,
};
use crate::systems::VectorField;

pub const DEFAULT_STEP: f64 = 0.001;
pub const DEFAULT_RESIDUAL_ABORT: f64 = 1e-3;

/// Scratch space for [`rk4_step`].
#[derive(Debug, Clone)]
pub struct Rk4Workspace {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
        }
    }
}

/// The increment `y_{k+1} - y_k` of one classical RK4 step from `(t, y)`
/// with step `h`, written to `delta`. A failing stage evaluation is
/// reported as [`Error::Stage`].
pub fn rk4_increment<F: VectorField + ?Sized>(
    f: &F,
    t: f64,
    y: &[f64],
    h: f64,
    ws: &mut Rk4Workspace,
    delta: &mut [f64],
) -> Result<()> {
    let n = y.len();
    if ws.tmp.len() != n {
        *ws = Rk4Workspace::new(n);
    }
    let stage = |stage: usize| move |e: Error| Error::Stage {
        stage,
        source: Box::new(e),
    };
    let [k1, k2, k3, k4] = &mut ws.k;
    let tmp = &mut ws.tmp;
    f.eval(t, y, k1).map_err(stage(1))?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f.eval(t + 0.5 * h, tmp, k2).map_err(stage(2))?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f.eval(t + 0.5 * h, tmp, k3).map_err(stage(3))?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f.eval(t + h, tmp, k4).map_err(stage(4))?;
    for i in 0..n {
        delta[i] = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}

/// One classical RK4 step, written to `out`.
pub fn rk4_step<F: VectorField + ?Sized>(
    f: &F,
    t: f64,
    y: &[f64],
    h: f64,
    ws: &mut Rk4Workspace,
    out: &mut [f64],
) -> Result<()> {
    rk4_increment(f, t, y, h, ws, out)?;
    for (o, y) in out.iter_mut().zip(y) {
        *o += y;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub h: f64,
    pub t_max: f64,
    /// Runs stop once the monitored residual exceeds this in absolute value.
    pub residual_abort: f64,
    /// Keep every `decimate`-th step.
    pub decimate: usize,
}

impl IntegratorConfig {
    pub fn new(h: f64, t_max: f64) -> Self {
        Self {
            h,
            t_max,
            residual_abort: DEFAULT_RESIDUAL_ABORT,
            decimate: 1,
        }
    }

    pub fn with_decimate(mut self, k: usize) -> Self {
        self.decimate = k;
        self
    }

    /// Number of steps from `start` to `t_max`.
    pub fn steps_from(&self, start: f64) -> Result<usize> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidConfig(format!("step h must be positive, got {}", self.h)));
        }
        if !(self.t_max > start) {
            return Err(Error::InvalidConfig(format!(
                "t_max = {} must exceed the start time {start}",
                self.t_max
            )));
        }
        if self.decimate == 0 {
            return Err(Error::InvalidConfig("decimate must be at least 1".into()));
        }
        if !(self.residual_abort > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "residual_abort must be positive, got {}",
                self.residual_abort
            )));
        }
        let exact = (self.t_max - start) / self.h;
        let steps = exact.round();
        if (exact - steps).abs() > 1e-6 * steps.max(1.0) || steps < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "(t_max - start)/h = {exact} is not a whole number of steps"
            )));
        }
        Ok(steps as usize)
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    ReachedTMax,
    NonpositiveWarp { t: f64, index: usize },
    NonFinite { t: f64 },
    ResidualBlowup { t: f64, residual: f64 },
}

impl Termination {
    pub fn is_complete(&self) -> bool {
        matches!(self, Termination::ReachedTMax)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Termination::ReachedTMax => "reached-t_max",
            Termination::NonpositiveWarp { .. } => "nonpositive-warp",
            Termination::NonFinite { .. } => "nonfinite",
            Termination::ResidualBlowup { .. } => "residual-blowup",
        }
    }
}

/// Per-step observations attached to each stored sample.
pub trait Monitor: Sync {
    type Sample: Clone + Send;

    fn sample(&self, t: f64, y: &[f64]) -> Result<Self::Sample>;

    /// Quantity compared against `residual_abort`, if any.
    fn residual(&self, _sample: &Self::Sample) -> Option<f64> {
        None
    }
}

/// Records nothing.
pub struct NoMonitor;

impl Monitor for NoMonitor {
    type Sample = ();

    fn sample(&self, _t: f64, _y: &[f64]) -> Result<()> {
        Ok(())
    }
}

/// Scalars and conservation residuals of a `t`-system sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZSample {
    pub scalars: GeometryScalars,
    pub residuals: Residuals,
}

pub struct ZMonitor<'a, O: ?Sized> {
    orbit: &'a O,
    params: SolitonParams,
}

impl<'a, O: Orbit + ?Sized> ZMonitor<'a, O> {
    pub fn new(orbit: &'a O, params: SolitonParams) -> Self {
        Self { orbit, params }
    }
}

impl<O: Orbit + ?Sized> Monitor for ZMonitor<'_, O> {
    type Sample = ZSample;

    fn sample(&self, t: f64, y: &[f64]) -> Result<ZSample> {
        let z = ZState::from_slice(t, y);
        Ok(ZSample {
            scalars: scalars_from_z(&z, self.orbit, &self.params)?,
            residuals: conservation_residual(&z, self.orbit, &self.params)?,
        })
    }

    fn residual(&self, s: &ZSample) -> Option<f64> {
        Some(s.residuals.res2)
    }
}

/// Lyapunov quantities of a phase-space sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XySample {
    pub lcal: f64,
    pub h: f64,
    pub g: f64,
}

pub struct XyMonitor<'a> {
    spec: &'a WarpedProductSpec,
    subsystem: bool,
}

impl<'a> XyMonitor<'a> {
    pub fn full(spec: &'a WarpedProductSpec) -> Self {
        Self {
            spec,
            subsystem: false,
        }
    }

    /// For states of the subsystem without `Y_1`.
    pub fn subsystem(spec: &'a WarpedProductSpec) -> Self {
        Self {
            spec,
            subsystem: true,
        }
    }
}

impl Monitor for XyMonitor<'_> {
    type Sample = XySample;

    fn sample(&self, s: f64, v: &[f64]) -> Result<XySample> {
        let xy = if self.subsystem {
            XyState::from_subsystem(s, v, 0.0)
        } else {
            XyState::from_slice(s, v)
        };
        Ok(XySample {
            lcal: lyapunov(&xy, self.spec),
            h: script_h(&xy, self.spec.d()),
            g: script_g(&xy),
        })
    }
}

/// A run on a uniform grid: samples at `start + k * step`, where
/// `step = h * decimate`, plus the last state reached.
#[derive(Debug, Clone)]
pub struct Trajectory<M> {
    label: String,
    start: f64,
    step: f64,
    dim: usize,
    data: Vec<f64>,
    monitors: Vec<M>,
    termination: Termination,
    steps_taken: usize,
    final_time: f64,
    final_state: Vec<f64>,
    max_projection: f64,
}

impl<M> Trajectory<M> {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.monitors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monitors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Spacing of stored samples.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// Component `i` of every stored sample.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states().map(|v| v[i]).collect()
    }

    pub fn monitors(&self) -> &[M] {
        &self.monitors
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// Time and state of the last accepted step, stored or not.
    pub fn final_state(&self) -> (f64, &[f64]) {
        (self.final_time, &self.final_state)
    }

    /// Largest correction applied by a projection, 0 without one.
    pub fn max_projection(&self) -> f64 {
        self.max_projection
    }

    /// Index of the last stored sample with time at most `t`.
    pub fn index_at(&self, t: f64) -> usize {
        let k = ((t - self.start) / self.step + 1e-9).floor();
        (k.max(0.0) as usize).min(self.len().saturating_sub(1))
    }
}

fn stop_reason(e: &Error, t: f64) -> Option<Termination> {
    match e.root() {
        Error::NonpositiveWarp { index, .. } => Some(Termination::NonpositiveWarp { t, index: *index }),
        Error::Domain { .. } => Some(Termination::NonFinite { t }),
        _ => None,
    }
}

type Projection<'p> = &'p dyn Fn(&mut [f64]) -> Result<f64>;

fn run<F, Mo>(
    f: &F,
    monitor: &Mo,
    start: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    project: Option<Projection<'_>>,
) -> Result<Trajectory<Mo::Sample>>
where
    F: VectorField + ?Sized,
    Mo: Monitor + ?Sized,
{
    let dim = f.dim();
    if y0.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: y0.len(),
        });
    }
    if !y0.iter().all(|v| v.is_finite()) || !start.is_finite() {
        return Err(Error::InvalidSeed("initial state has non-finite entries".into()));
    }
    let steps = cfg.steps_from(start)?;
    let keep = steps / cfg.decimate + 1;
    let mut traj = Trajectory {
        label: f.label().to_string(),
        start,
        step: cfg.h * cfg.decimate as f64,
        dim,
        data: Vec::with_capacity(keep * dim),
        monitors: Vec::with_capacity(keep),
        termination: Termination::ReachedTMax,
        steps_taken: 0,
        final_time: start,
        final_state: y0.to_vec(),
        max_projection: 0.0,
    };
    let first = monitor.sample(start, y0)?;
    traj.data.extend_from_slice(y0);
    traj.monitors.push(first);

    let mut ws = Rk4Workspace::new(dim);
    let mut y = y0.to_vec();
    let mut next = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    // Kahan compensation of the increments; keeps the rounding of the
    // accumulated state below the truncation error of small steps.
    let mut comp = vec![0.0; dim];
    let mut comp_next = vec![0.0; dim];
    for k in 0..steps {
        let t = start + k as f64 * cfg.h;
        let t_next = start + (k + 1) as f64 * cfg.h;
        if let Err(e) = rk4_increment(f, t, &y, cfg.h, &mut ws, &mut delta) {
            traj.termination = stop_reason(&e, t).ok_or(e)?;
            break;
        }
        for i in 0..dim {
            let inc = delta[i] - comp[i];
            next[i] = y[i] + inc;
            comp_next[i] = (next[i] - y[i]) - inc;
        }
        if !next.iter().all(|v| v.is_finite()) {
            traj.termination = Termination::NonFinite { t: t_next };
            break;
        }
        if let Some(project) = project {
            let c = project(&mut next)?;
            traj.max_projection = traj.max_projection.max(c);
            comp_next.fill(0.0);
        }
        let sample = match monitor.sample(t_next, &next) {
            Ok(s) => s,
            Err(e) => {
                traj.termination = stop_reason(&e, t_next).ok_or(e)?;
                break;
            }
        };
        if let Some(res) = monitor.residual(&sample) {
            if !(res.abs() <= cfg.residual_abort) {
                traj.termination = Termination::ResidualBlowup {
                    t: t_next,
                    residual: res,
                };
                break;
            }
        }
        std::mem::swap(&mut y, &mut next);
        std::mem::swap(&mut comp, &mut comp_next);
        traj.steps_taken = k + 1;
        traj.final_time = t_next;
        if (k + 1) % cfg.decimate == 0 {
            traj.data.extend_from_slice(&y);
            traj.monitors.push(sample);
        }
    }
    traj.final_state = y;
    Ok(traj)
}

/// Integrates `f` from `(start, y0)` to `cfg.t_max`, stopping early on a
/// collapsed warp, a non-finite state or a residual above
/// `cfg.residual_abort`. Stops are recorded, not raised.
pub fn integrate<F, Mo>(
    f: &F,
    monitor: &Mo,
    start: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<Mo::Sample>>
where
    F: VectorField + ?Sized,
    Mo: Monitor + ?Sized,
{
    run(f, monitor, start, y0, cfg, None)
}

/// As [`integrate`], applying `project` to the state after every step.
/// `project` returns the size of the correction it made.
pub fn integrate_with_projection<F, Mo>(
    f: &F,
    monitor: &Mo,
    start: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    project: &dyn Fn(&mut [f64]) -> Result<f64>,
) -> Result<Trajectory<Mo::Sample>>
where
    F: VectorField + ?Sized,
    Mo: Monitor + ?Sized,
{
    run(f, monitor, start, y0, cfg, Some(project))
}

/// Cumulative composite trapezoid rule on a uniform grid with spacing `h`.
/// The first entry is 0.
pub fn quadrature(values: &[f64], h: f64) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::TooFewSamples(values.len()));
    }
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::FnField;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rk4_zero_field() {
        let f = FnField::new(3, "zero", |_, _, dy: &mut [f64]| dy.fill(0.0));
        let mut ws = Rk4Workspace::new(3);
        let y = [1.0, -2.0, 3.5];
        let mut out = [0.0; 3];
        rk4_step(&f, 0.0, &y, 0.1, &mut ws, &mut out).unwrap();
        assert_eq!(out, y);
    }

    #[test]
    fn rk4_decay_polynomial() {
        let f = FnField::new(1, "decay", |_, y: &[f64], dy: &mut [f64]| dy[0] = -y[0]);
        let mut ws = Rk4Workspace::new(1);
        let mut out = [0.0];
        let h: f64 = 0.1;
        rk4_step(&f, 0.0, &[1.0], h, &mut ws, &mut out).unwrap();
        let poly = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert_abs_diff_eq!(out[0], poly, epsilon = 1e-15);
        assert_abs_diff_eq!(out[0], 0.9048375, epsilon = 1e-7);
    }

    #[test]
    fn rk4_reports_failing_stage() {
        struct Fails;
        impl VectorField for Fails {
            fn dim(&self) -> usize {
                1
            }
            fn label(&self) -> &str {
                "fails"
            }
            fn eval(&self, t: f64, _y: &[f64], dy: &mut [f64]) -> Result<()> {
                if t > 0.0 {
                    return Err(Error::NonpositiveWarp { index: 1, value: 0.0 });
                }
                dy[0] = 1.0;
                Ok(())
            }
        }
        let mut out = [0.0];
        let err = rk4_step(&Fails, 0.0, &[1.0], 0.1, &mut Rk4Workspace::new(1), &mut out).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: 2, .. }));
    }

    #[test]
    fn config_step_count() {
        assert_eq!(IntegratorConfig::new(0.001, 10.0).steps_from(0.001).unwrap(), 9999);
        assert_eq!(IntegratorConfig::new(0.001, 500.0).steps_from(0.001).unwrap(), 499_999);
        assert!(IntegratorConfig::new(0.0, 1.0).steps_from(0.0).is_err());
        assert!(IntegratorConfig::new(0.1, 1.0).steps_from(2.0).is_err());
        assert!(IntegratorConfig::new(0.3, 1.0).steps_from(0.0).is_err());
        assert!(IntegratorConfig::new(0.1, 1.0).with_decimate(0).steps_from(0.0).is_err());
    }

    #[test]
    fn grid_and_decimation() {
        let f = FnField::new(1, "one", |_, _, dy: &mut [f64]| dy[0] = 1.0);
        let cfg = IntegratorConfig::new(0.01, 1.0).with_decimate(10);
        let tr = integrate(&f, &NoMonitor, 0.0, &[0.0], &cfg).unwrap();
        assert_eq!(tr.len(), 11);
        assert_eq!(tr.steps_taken(), 100);
        assert!(tr.termination().is_complete());
        for k in 0..tr.len() {
            assert_abs_diff_eq!(tr.state(k)[0], tr.time(k), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(tr.final_state().0, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_state_is_bit_stable() {
        let f = FnField::new(2, "zero", |_, _, dy: &mut [f64]| dy.fill(0.0));
        let y0 = [0.1234567890123, -9.87654321e-5];
        let cfg = IntegratorConfig {
            decimate: 1000,
            ..IntegratorConfig::new(1e-6, 1.0)
        };
        let tr = integrate(&f, &NoMonitor, 0.0, &y0, &cfg).unwrap();
        assert_eq!(tr.steps_taken(), 1_000_000);
        assert_eq!(tr.final_state().1, &y0);
    }

    #[test]
    fn nonfinite_state_stops() {
        let f = FnField::new(1, "blowup", |_, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0]);
        let tr = integrate(&f, &NoMonitor, 0.0, &[1.0], &IntegratorConfig::new(0.01, 5.0)).unwrap();
        assert!(matches!(tr.termination(), Termination::NonFinite { .. }));
        assert!(tr.final_state().1[0].is_finite());
    }

    #[test]
    fn projection_is_applied_and_recorded() {
        let f = FnField::new(2, "rotation", |_, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[1];
            dy[1] = y[0];
        });
        let project = |v: &mut [f64]| {
            let norm = v[0].hypot(v[1]);
            v[0] /= norm;
            v[1] /= norm;
            Ok((norm - 1.0).abs())
        };
        let cfg = IntegratorConfig::new(0.1, 100.0);
        let tr = integrate_with_projection(&f, &NoMonitor, 0.0, &[1.0, 0.0], &cfg, &project).unwrap();
        let (_, y) = tr.final_state();
        assert_abs_diff_eq!(y[0].hypot(y[1]), 1.0, epsilon = 1e-15);
        assert!(tr.max_projection() > 0.0 && tr.max_projection() < 1e-6);
    }

    #[test]
    fn quadrature_rules() {
        let q = quadrature(&[1.0; 11], 0.1).unwrap();
        assert_eq!(q.len(), 11);
        assert_abs_diff_eq!(q[10], 1.0, epsilon = 1e-15);
        let h = std::f64::consts::PI / 1000.0;
        let s: Vec<f64> = (0..=1000).map(|k| (k as f64 * h).sin()).collect();
        assert!((quadrature(&s, h).unwrap()[1000] - 2.0).abs() < 1e-5);
        let ramp: Vec<f64> = (0..=20).map(|k| 3.0 * k as f64 * 0.05 - 1.0).collect();
        let q = quadrature(&ramp, 0.05).unwrap();
        for (k, v) in q.iter().enumerate() {
            let x = k as f64 * 0.05;
            assert_abs_diff_eq!(*v, 1.5 * x * x - x, epsilon = 1e-14);
        }
        assert_eq!(quadrature(&[1.0], 0.1), Err(Error::TooFewSamples(1)));
    }
}
