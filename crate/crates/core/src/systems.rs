//! Vector fields of the soliton equations.
//!
//! * [`ZField`]: the second-order equations in `t` for any orbit with a
//!   diagonal Ricci endomorphism (multiply warped products and the
//!   two-summands orbits);
//! * [`XyField`] and [`XySubsystemField`]: the autonomous polynomial system
//!   in `(X, Y)` for multiply warped products.

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::linalg::DenseMatrix;
use crate::model::{Orbit, SolitonParams, TwoSummandsSpec, WarpedProductSpec, ZState};

/// Warping functions at or below this value make the `t`-system singular.
pub const MIN_WARP: f64 = 1e-12;

/// A deterministic, side-effect free right-hand side `y' = f(t, y)`.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    fn label(&self) -> &str;

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

/// Wraps a closure as a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    label: String,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, label: impl Into<String>, f: F) -> Self {
        Self {
            dim,
            label: label.into(),
            f,
        }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        (self.f)(t, y, dy);
        Ok(())
    }
}

/// `u''` from the conservation law `u'' + xi u' - epsilon u = C`.
#[inline]
pub fn uddot(u: f64, udot: f64, tr_l: f64, p: &SolitonParams) -> f64 {
    p.c + p.epsilon * u + udot * udot - tr_l * udot
}

/// The `t`-system on the interleaved layout `(g_1, g_1', ..., u, u')`:
///
/// ```text
/// g_i'' = r_i g_i - (tr L - g_i'/g_i - u') g_i' + (epsilon/2) g_i
/// u''   = C + epsilon u + u'^2 - u' tr L
/// ```
///
/// where `r_i` are the Ricci eigenvalues of the orbit.
pub struct ZField<'a, O: ?Sized> {
    orbit: &'a O,
    params: SolitonParams,
    label: &'static str,
}

impl<'a> ZField<'a, WarpedProductSpec> {
    pub fn warped(spec: &'a WarpedProductSpec, params: SolitonParams) -> Self {
        Self::new(spec, params, "warped-z")
    }
}

impl<'a> ZField<'a, TwoSummandsSpec> {
    pub fn two_summands(spec: &'a TwoSummandsSpec, params: SolitonParams) -> Self {
        Self::new(spec, params, "two-summands-z")
    }
}

impl<'a, O: Orbit + ?Sized> ZField<'a, O> {
    pub fn new(orbit: &'a O, params: SolitonParams, label: &'static str) -> Self {
        Self {
            orbit,
            params,
            label,
        }
    }

    pub fn orbit(&self) -> &O {
        self.orbit
    }

    pub fn params(&self) -> &SolitonParams {
        &self.params
    }

    /// Evaluates the field on a [`ZState`], returning the derivative in the
    /// same shape.
    pub fn rhs(&self, z: &ZState) -> Result<ZState> {
        let y = z.to_vec();
        let mut dy = vec![0.0; y.len()];
        self.eval(z.t, &y, &mut dy)?;
        Ok(ZState::from_slice(z.t, &dy))
    }
}

impl<O: Orbit + ?Sized> VectorField for ZField<'_, O> {
    fn dim(&self) -> usize {
        2 * self.orbit.r() + 2
    }

    fn label(&self) -> &str {
        self.label
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let r = self.orbit.r();
        if y.len() != 2 * r + 2 {
            return Err(Error::Dimension {
                expected: 2 * r + 2,
                got: y.len(),
            });
        }
        let dims = self.orbit.dims();
        let mut g = [0.0; 16];
        let g = if r <= 16 { &mut g[..r] } else { unreachable!("more than 16 summands") };
        let mut tr_l = 0.0;
        for i in 0..r {
            let gi = y[2 * i];
            if !(gi > MIN_WARP) {
                return Err(Error::NonpositiveWarp {
                    index: i + 1,
                    value: gi,
                });
            }
            g[i] = gi;
            tr_l += dims[i] as f64 * y[2 * i + 1] / gi;
        }
        let (u, udot) = (y[2 * r], y[2 * r + 1]);
        let half_eps = 0.5 * self.params.epsilon;
        for i in 0..r {
            let (gi, gdi) = (g[i], y[2 * i + 1]);
            let ri = self.orbit.ricci(g, i);
            dy[2 * i] = gdi;
            dy[2 * i + 1] = ri * gi - (tr_l - gdi / gi - udot) * gdi + half_eps * gi;
        }
        dy[2 * r] = udot;
        dy[2 * r + 1] = uddot(u, udot, tr_l, &self.params);
        Ok(())
    }
}

/// Ambient scalar curvature from its defining expression
/// `-2 tr L' - tr L^2 - (tr L)^2 + S`, with `L'` taken from the flow.
///
/// Differs from the Hamilton form `-C - u'^2` exactly by the conservation
/// residual `res2`.
pub fn rbar_direct<O: Orbit + ?Sized>(z: &ZState, orbit: &O, p: &SolitonParams) -> Result<f64> {
    let field = ZField::new(orbit, *p, "z");
    let dz = field.rhs(z)?;
    let dims = orbit.dims();
    let mut tr_ldot = 0.0;
    for (i, &d) in dims.iter().enumerate() {
        let l = z.gdot[i] / z.g[i];
        tr_ldot += d as f64 * (dz.gdot[i] / z.g[i] - l * l);
    }
    let tr_l = z.tr_l(dims);
    Ok(-2.0 * tr_ldot - crate::model::tr_l2(z, dims) - tr_l * tr_l + orbit.scalar_curvature(&z.g))
}

/// The polynomial system
///
/// ```text
/// X_i' = X_i (G - 1) + lambda_i Y_i^2 / sqrt(d_i)
/// Y_i' = Y_i (G - X_i / sqrt(d_i))
/// ```
///
/// on the layout `(X_1..X_r, Y_1..Y_r)`.
pub struct XyField<'a> {
    spec: &'a WarpedProductSpec,
    sqrt_d: Vec<f64>,
}

impl<'a> XyField<'a> {
    pub fn new(spec: &'a WarpedProductSpec) -> Self {
        Self {
            spec,
            sqrt_d: spec.d().iter().map(|&d| (d as f64).sqrt()).collect(),
        }
    }

    pub fn spec(&self) -> &WarpedProductSpec {
        self.spec
    }

    /// Analytic Jacobian at the flat state `v = (X, Y)`.
    pub fn jacobian(&self, v: &[f64]) -> DenseMatrix {
        let r = self.spec.r();
        let (x, y) = v.split_at(r);
        let lambda = self.spec.lambda();
        let g: f64 = x.iter().map(|x| x * x).sum();
        let mut j = DenseMatrix::zeros(2 * r);
        for i in 0..r {
            for k in 0..r {
                let delta = if i == k { 1.0 } else { 0.0 };
                j.set(i, k, delta * (g - 1.0) + 2.0 * x[i] * x[k]);
                j.set(r + i, k, y[i] * (2.0 * x[k] - delta / self.sqrt_d[i]));
            }
            j.set(i, r + i, 2.0 * lambda[i] * y[i] / self.sqrt_d[i]);
            j.set(r + i, r + i, g - x[i] / self.sqrt_d[i]);
        }
        j
    }
}

impl VectorField for XyField<'_> {
    fn dim(&self) -> usize {
        2 * self.spec.r()
    }

    fn label(&self) -> &str {
        "xy-full"
    }

    fn eval(&self, _s: f64, v: &[f64], dv: &mut [f64]) -> Result<()> {
        let r = self.spec.r();
        if v.len() != 2 * r {
            return Err(Error::Dimension {
                expected: 2 * r,
                got: v.len(),
            });
        }
        let (x, y) = v.split_at(r);
        let g: f64 = x.iter().map(|x| x * x).sum();
        let lambda = self.spec.lambda();
        for i in 0..r {
            dv[i] = x[i] * (g - 1.0) + lambda[i] * y[i] * y[i] / self.sqrt_d[i];
            dv[r + i] = y[i] * (g - x[i] / self.sqrt_d[i]);
        }
        Ok(())
    }
}

/// The system without the `Y_1` equation, on `(X_1..X_r, Y_2..Y_r)`.
/// Requires `lambda_1 = 0` so that `Y_1` does not feed back.
pub struct XySubsystemField<'a> {
    full: XyField<'a>,
}

impl<'a> XySubsystemField<'a> {
    pub fn new(spec: &'a WarpedProductSpec) -> Result<Self> {
        if spec.lambda()[0] != 0.0 {
            return Err(Error::InvalidSpec(
                "the subsystem drops Y_1, which needs lambda_1 = 0".into(),
            ));
        }
        Ok(Self {
            full: XyField::new(spec),
        })
    }
}

impl VectorField for XySubsystemField<'_> {
    fn dim(&self) -> usize {
        2 * self.full.spec.r() - 1
    }

    fn label(&self) -> &str {
        "xy-subsystem"
    }

    fn eval(&self, s: f64, v: &[f64], dv: &mut [f64]) -> Result<()> {
        let r = self.full.spec.r();
        if v.len() != 2 * r - 1 {
            return Err(Error::Dimension {
                expected: 2 * r - 1,
                got: v.len(),
            });
        }
        // Y_1 only enters its own equation; any placeholder works.
        let mut full = Vec::with_capacity(2 * r);
        full.extend_from_slice(&v[..r]);
        full.push(0.0);
        full.extend_from_slice(&v[r..]);
        let mut dfull = vec![0.0; 2 * r];
        self.full.eval(s, &full, &mut dfull)?;
        dv[..r].copy_from_slice(&dfull[..r]);
        dv[r..].copy_from_slice(&dfull[r + 1..]);
        Ok(())
    }
}

/// Rescales a full-layout phase state onto the Ricci-flat locus
/// `{L = 0, H = 1}`: `X` by `1/H`, then the `Y_i` with `lambda_i > 0` by a
/// common factor. Returns the max-norm size of the correction.
pub fn project_ricci_flat(spec: &WarpedProductSpec, v: &mut [f64]) -> Result<f64> {
    let r = spec.r();
    if v.len() != 2 * r {
        return Err(Error::Dimension {
            expected: 2 * r,
            got: v.len(),
        });
    }
    let before = v.to_vec();
    let (x, y) = v.split_at_mut(r);
    let h: f64 = x
        .iter()
        .zip(spec.d())
        .map(|(x, &d)| (d as f64).sqrt() * x)
        .sum();
    if !(h > 0.0) {
        return Err(Error::ConstraintDrift(format!("H = {h} cannot be rescaled to 1")));
    }
    x.iter_mut().for_each(|x| *x /= h);
    let g: f64 = x.iter().map(|x| x * x).sum();
    let ly: f64 = y
        .iter()
        .zip(spec.lambda())
        .map(|(y, l)| l * y * y)
        .sum();
    if !(g < 1.0 && ly > 0.0) {
        return Err(Error::ConstraintDrift(format!(
            "L = 0 is out of reach by rescaling Y (G = {g}, sum lambda Y^2 = {ly})"
        )));
    }
    let kappa = ((1.0 - g) / ly).sqrt();
    for (y, &l) in y.iter_mut().zip(spec.lambda()) {
        if l > 0.0 {
            *y *= kappa;
        }
    }
    Ok(before
        .iter()
        .zip(v.iter())
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// Analytic Jacobian of [`XyField`] at a phase state.
pub fn xy_jacobian(xy: &crate::model::XyState, spec: &WarpedProductSpec) -> DenseMatrix {
    XyField::new(spec).jacobian(&xy.to_vec())
}

/// Recovers `Y_1(s) = Y_1(s_0) exp(int_{s_0}^s (G - X_1))` along a subsystem
/// (or full-system) trajectory, integrating with the composite trapezoid
/// rule on the trajectory grid.
pub fn recover_y1<M>(traj: &Trajectory<M>, y1_at_s0: f64) -> Result<Vec<f64>> {
    if !(y1_at_s0 > 0.0) {
        return Err(Error::Domain {
            function: "recover_y1",
            reason: format!("Y_1(s_0) = {y1_at_s0} must be positive"),
        });
    }
    let r = traj.dim().div_ceil(2);
    let integrand: Vec<f64> = traj
        .states()
        .map(|v| {
            let x = &v[..r];
            x.iter().map(|x| x * x).sum::<f64>() - x[0]
        })
        .collect();
    let cumulative = crate::integrate::quadrature(&integrand, traj.step())?;
    Ok(cumulative.into_iter().map(|c| y1_at_s0 * c.exp()).collect())
}
