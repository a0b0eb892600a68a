//! Orbit data, phase-space states and the pointwise geometric scalars
//! (mean curvature, scalar curvatures, Lyapunov quantities) evaluated on them.
//!
//! Two coordinate systems are used throughout:
//!
//! * [`ZState`]: the second-order metric coordinates `(g_i, g_i', u, u')` in
//!   the arclength parameter `t`;
//! * [`XyState`]: the autonomous phase coordinates
//!   `X_i = sqrt(d_i) g_i' / (xi g_i)`, `Y_i = sqrt(d_i) / (xi g_i)` in the
//!   parameter `s` with `ds = xi dt`, where `xi = tr L - u'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hypersurface data needed by the cohomogeneity-one equations: the summand
/// dimensions and the diagonal of the Ricci endomorphism as a function of
/// the warping functions.
pub trait Orbit: Send + Sync {
    fn dims(&self) -> &[usize];

    /// Entry `i` of the (diagonal) Ricci endomorphism of the metric with
    /// warping functions `g`.
    fn ricci(&self, g: &[f64], i: usize) -> f64;

    fn r(&self) -> usize {
        self.dims().len()
    }

    /// Einstein constants of the factors, for multiply warped products.
    fn einstein_constants(&self) -> Option<&[f64]> {
        None
    }

    fn n(&self) -> usize {
        self.dims().iter().sum()
    }

    /// Scalar curvature `S = sum_i d_i r_i` of the hypersurface.
    fn scalar_curvature(&self, g: &[f64]) -> f64 {
        self.dims()
            .iter()
            .enumerate()
            .map(|(i, &d)| d as f64 * self.ricci(g, i))
            .sum()
    }
}

/// A multiply warped product `dt^2 + sum_i g_i(t)^2 h_i` over Einstein
/// manifolds `(M_i, h_i)` of dimension `d_i` and Einstein constant `lambda_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarpedProductSpec {
    d: Vec<usize>,
    lambda: Vec<f64>,
}

impl WarpedProductSpec {
    pub fn new(d: Vec<usize>, lambda: Vec<f64>) -> Result<Self> {
        if d.len() != lambda.len() {
            return Err(Error::InvalidSpec(format!(
                "{} dimensions but {} Einstein constants",
                d.len(),
                lambda.len()
            )));
        }
        if d.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least two factors, got {}",
                d.len()
            )));
        }
        if let Some(i) = d.iter().position(|&di| di == 0) {
            return Err(Error::InvalidSpec(format!("d_{} must be positive", i + 1)));
        }
        let n: usize = d.iter().sum();
        if n < 3 {
            return Err(Error::InvalidSpec(format!("total dimension n = {n} < 3")));
        }
        for (i, (&di, &li)) in d.iter().zip(&lambda).enumerate() {
            if !li.is_finite() || li < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "lambda_{} = {li} must be finite and nonnegative",
                    i + 1
                )));
            }
            if (li == 0.0) != (di == 1) {
                return Err(Error::InvalidSpec(format!(
                    "lambda_{} = {li} with d_{} = {di}: only circle factors are flat",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(Self { d, lambda })
    }

    pub fn d(&self) -> &[usize] {
        &self.d
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Checks the shape used for the soliton and Ricci-flat constructions:
    /// a collapsing circle first, every other factor of dimension > 1.
    pub fn check_circle_first(&self) -> Result<()> {
        if self.d[0] != 1 {
            return Err(Error::InvalidSpec(format!(
                "the collapsing factor must be a circle (d_1 = 1), got d_1 = {}",
                self.d[0]
            )));
        }
        if let Some(i) = self.d.iter().skip(1).position(|&di| di == 1) {
            return Err(Error::InvalidSpec(format!(
                "only the first factor may be a circle, but d_{} = 1",
                i + 2
            )));
        }
        Ok(())
    }
}

impl Orbit for WarpedProductSpec {
    fn dims(&self) -> &[usize] {
        &self.d
    }

    fn einstein_constants(&self) -> Option<&[f64]> {
        Some(&self.lambda)
    }

    fn ricci(&self, g: &[f64], i: usize) -> f64 {
        if self.lambda[i] == 0.0 {
            0.0
        } else {
            self.lambda[i] / (g[i] * g[i])
        }
    }
}

/// A principal orbit `G/K` whose isotropy representation has two
/// inequivalent irreducible summands, the first tangent to a sphere `H/K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoSummandsSpec {
    dims: [usize; 2],
    a1: f64,
    a2: f64,
    a3: f64,
}

impl TwoSummandsSpec {
    /// `A_1` is fixed to `d1 (d1 - 1)` by the normalisation of the
    /// background metric on the sphere.
    pub fn new(d1: usize, d2: usize, a2: f64, a3: f64) -> Result<Self> {
        if d1 == 0 {
            return Err(Error::InvalidSpec("d1 must be positive".into()));
        }
        if d2 < 2 {
            return Err(Error::InvalidSpec(format!("d2 = {d2} must be at least 2")));
        }
        if !(a2.is_finite() && a2 > 0.0) {
            return Err(Error::InvalidSpec(format!("A2 = {a2} must be positive")));
        }
        if !(a3.is_finite() && a3 > 0.0) {
            return Err(Error::InvalidSpec(format!("A3 = {a3} must be positive")));
        }
        Ok(Self {
            dims: [d1, d2],
            a1: (d1 * (d1 - 1)) as f64,
            a2,
            a3,
        })
    }

    /// Like [`TwoSummandsSpec::new`] but allows `A3 = 0`, the decoupled
    /// (warped product) limit.
    pub fn decoupled(d1: usize, d2: usize, a2: f64) -> Result<Self> {
        let mut spec = Self::new(d1, d2, a2, 1.0)?;
        spec.a3 = 0.0;
        Ok(spec)
    }

    /// `Sp(m+1) / Sp(m) x U(1)` over `HP^m`.
    pub fn example2(m: usize) -> Result<Self> {
        let mf = m as f64;
        Self::new(2, 4 * m, 2.0 * mf * (mf + 2.0), mf / 2.0)
    }

    /// `Sp(m+1) x Sp(1) / Sp(m) x Delta Sp(1)` over `HP^m`.
    pub fn example3(m: usize) -> Result<Self> {
        let mf = m as f64;
        Self::new(3, 4 * m, 4.0 * mf * (mf + 2.0), 3.0 * mf / 4.0)
    }

    pub fn d1(&self) -> usize {
        self.dims[0]
    }

    pub fn d2(&self) -> usize {
        self.dims[1]
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn a3(&self) -> f64 {
        self.a3
    }
}

impl Orbit for TwoSummandsSpec {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn ricci(&self, g: &[f64], i: usize) -> f64 {
        let (r1, r2) = two_summands_ricci_unchecked(g[0], g[1], self);
        if i == 0 {
            r1
        } else {
            r2
        }
    }
}

/// Which family of solutions a run belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Nontrivial steady soliton, `C < 0`.
    Soliton,
    /// Trivial soliton with constant potential, `C = 0`.
    RicciFlat,
}

/// The soliton constant `epsilon` and the conservation constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonParams {
    pub epsilon: f64,
    pub c: f64,
}

impl SolitonParams {
    pub fn steady(c: f64) -> Self {
        Self { epsilon: 0.0, c }
    }

    pub fn ricci_flat() -> Self {
        Self::steady(0.0)
    }

    pub fn check(&self, mode: Mode) -> Result<()> {
        if self.epsilon != 0.0 {
            return Err(Error::InvalidParams(format!(
                "only steady solitons are supported (epsilon = 0), got epsilon = {}",
                self.epsilon
            )));
        }
        match mode {
            Mode::Soliton if !(self.c < 0.0) => Err(Error::InvalidParams(format!(
                "soliton mode requires C < 0, got C = {}",
                self.c
            ))),
            Mode::RicciFlat if self.c != 0.0 => Err(Error::InvalidParams(format!(
                "Ricci-flat mode requires C = 0, got C = {}",
                self.c
            ))),
            _ => Ok(()),
        }
    }
}

/// Metric coordinates at arclength `t`.
///
/// The flat layout used by the integrator is the interleaved
/// `(g_1, g_1', ..., g_r, g_r', u, u')`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZState {
    pub t: f64,
    pub g: Vec<f64>,
    pub gdot: Vec<f64>,
    pub u: f64,
    pub udot: f64,
}

impl ZState {
    pub fn r(&self) -> usize {
        self.g.len()
    }

    pub fn from_slice(t: f64, y: &[f64]) -> Self {
        let r = (y.len() - 2) / 2;
        Self {
            t,
            g: (0..r).map(|i| y[2 * i]).collect(),
            gdot: (0..r).map(|i| y[2 * i + 1]).collect(),
            u: y[2 * r],
            udot: y[2 * r + 1],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.r() + 2);
        for (g, gd) in self.g.iter().zip(&self.gdot) {
            y.push(*g);
            y.push(*gd);
        }
        y.push(self.u);
        y.push(self.udot);
        y
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.g.iter().position(|&g| !(g > 0.0)) {
            return Err(Error::NonpositiveWarp {
                index: i + 1,
                value: self.g[i],
            });
        }
        let finite = self.g.iter().chain(&self.gdot).all(|v| v.is_finite())
            && self.u.is_finite()
            && self.udot.is_finite()
            && self.t.is_finite();
        if !finite {
            return Err(Error::Domain {
                function: "ZState",
                reason: "non-finite entry".into(),
            });
        }
        Ok(())
    }

    /// Mean curvature `tr L = sum_i d_i g_i'/g_i`.
    pub fn tr_l(&self, dims: &[usize]) -> f64 {
        dims.iter()
            .zip(self.g.iter().zip(&self.gdot))
            .map(|(&d, (g, gd))| d as f64 * gd / g)
            .sum()
    }

    /// Generalized mean curvature `xi = tr L - u'`.
    pub fn xi(&self, dims: &[usize]) -> f64 {
        self.tr_l(dims) - self.udot
    }
}

/// Phase coordinates at parameter `s`. Flat layout `(X_1..X_r, Y_1..Y_r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XyState {
    pub s: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl XyState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { s: 0.0, x, y }
    }

    pub fn r(&self) -> usize {
        self.x.len()
    }

    pub fn from_slice(s: f64, v: &[f64]) -> Self {
        let r = v.len() / 2;
        Self {
            s,
            x: v[..r].to_vec(),
            y: v[r..].to_vec(),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    /// Coordinates of the subsystem obtained by dropping `Y_1`.
    pub fn subsystem_vec(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y[1..]).copied().collect()
    }

    pub fn from_subsystem(s: f64, v: &[f64], y1: f64) -> Self {
        let r = v.len().div_ceil(2);
        let mut y = Vec::with_capacity(r);
        y.push(y1);
        y.extend_from_slice(&v[r..]);
        Self {
            s,
            x: v[..r].to_vec(),
            y,
        }
    }
}

/// Pointwise geometric scalars of a [`ZState`].
///
/// `h`, `g` and `lcal` are `None` where `xi = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryScalars {
    pub tr_l: f64,
    pub tr_l2: f64,
    pub s: f64,
    pub xi: f64,
    pub rbar: f64,
    pub h: Option<f64>,
    pub g: Option<f64>,
    pub lcal: Option<f64>,
    pub relvol: f64,
}

/// `tr(L^2) = sum_i d_i (g_i'/g_i)^2`.
pub fn tr_l2(z: &ZState, dims: &[usize]) -> f64 {
    dims.iter()
        .zip(z.g.iter().zip(&z.gdot))
        .map(|(&d, (g, gd))| {
            let l = gd / g;
            d as f64 * l * l
        })
        .sum()
}

/// Relative volume `v = prod_i g_i^{d_i}`.
pub fn relative_volume(z: &ZState, dims: &[usize]) -> f64 {
    dims.iter()
        .zip(&z.g)
        .map(|(&d, g)| g.powi(d as i32))
        .product()
}

fn check_z<O: Orbit + ?Sized>(z: &ZState, orbit: &O) -> Result<()> {
    if z.r() != orbit.r() || z.gdot.len() != orbit.r() {
        return Err(Error::Dimension {
            expected: orbit.r(),
            got: z.r(),
        });
    }
    z.validate()
}

pub fn scalars_from_z<O: Orbit + ?Sized>(
    z: &ZState,
    orbit: &O,
    p: &SolitonParams,
) -> Result<GeometryScalars> {
    check_z(z, orbit)?;
    let dims = orbit.dims();
    let n = orbit.n() as f64;
    let tr_l = z.tr_l(dims);
    let tr_l2 = tr_l2(z, dims);
    let xi = tr_l - z.udot;
    let defined = |v: f64| if xi != 0.0 { Some(v) } else { None };
    Ok(GeometryScalars {
        tr_l,
        tr_l2,
        s: orbit.scalar_curvature(&z.g),
        xi,
        rbar: -p.c - z.udot * z.udot - p.epsilon * z.u - p.epsilon * (n + 1.0) / 2.0,
        h: defined(tr_l / xi),
        g: defined(tr_l2 / (xi * xi)),
        lcal: defined(p.c / (xi * xi)),
        relvol: relative_volume(z, dims),
    })
}

pub fn xy_from_z(z: &ZState, dims: &[usize]) -> Result<XyState> {
    if z.r() != dims.len() {
        return Err(Error::Dimension {
            expected: dims.len(),
            got: z.r(),
        });
    }
    let xi = z.xi(dims);
    if !(xi > 0.0) {
        return Err(Error::NonpositiveXi(xi));
    }
    let mut x = Vec::with_capacity(z.r());
    let mut y = Vec::with_capacity(z.r());
    for (i, &d) in dims.iter().enumerate() {
        let k = (d as f64).sqrt() / xi;
        x.push(k * z.gdot[i] / z.g[i]);
        y.push(k / z.g[i]);
    }
    Ok(XyState { s: 0.0, x, y })
}

/// `L = sum_i (X_i^2 + lambda_i Y_i^2) - 1`, which equals `C / xi^2` on
/// solutions.
pub fn lyapunov(xy: &XyState, spec: &WarpedProductSpec) -> f64 {
    xy.x.iter()
        .zip(&xy.y)
        .zip(spec.lambda())
        .map(|((x, y), l)| x * x + l * y * y)
        .sum::<f64>()
        - 1.0
}

/// `H = sum_i sqrt(d_i) X_i = tr L / xi`.
pub fn script_h(xy: &XyState, dims: &[usize]) -> f64 {
    xy.x.iter()
        .zip(dims)
        .map(|(x, &d)| (d as f64).sqrt() * x)
        .sum()
}

/// `G = sum_i X_i^2`.
pub fn script_g(xy: &XyState) -> f64 {
    xy.x.iter().map(|x| x * x).sum()
}

/// Returns `(F_0, F)` with `F_0 = v^{2/n} (S + tr (L^0)^2)` built on the
/// trace-free part of the shape operator, and `F = v^{2/n} (S + tr L^2)`.
pub fn f0_and_calf<O: Orbit + ?Sized>(z: &ZState, orbit: &O) -> Result<(f64, f64)> {
    check_z(z, orbit)?;
    let dims = orbit.dims();
    let n = orbit.n() as f64;
    let tr_l = z.tr_l(dims);
    let tr_l2 = tr_l2(z, dims);
    let s = orbit.scalar_curvature(&z.g);
    let scale = relative_volume(z, dims).powf(2.0 / n);
    let trace_free = tr_l2 - tr_l * tr_l / n;
    Ok((scale * (s + trace_free), scale * (s + tr_l2)))
}

fn f_hat_denominator(xy: &XyState, spec: &WarpedProductSpec) -> Result<f64> {
    let n = spec.n() as f64;
    let mut den = 1.0;
    for i in 1..spec.r() {
        let y = xy.y[i];
        if !(y > 0.0) {
            return Err(Error::Domain {
                function: "f_hat",
                reason: format!("Y_{} = {y} must be positive", i + 1),
            });
        }
        den *= (spec.lambda()[i].sqrt() * y).powf(2.0 * spec.d()[i] as f64 / (n - 1.0));
    }
    Ok(den)
}

/// Modified Lyapunov function on the Ricci-flat locus,
/// `(1 - (1 - X_1)^2 / (n-1)) / prod_{i>=2} (sqrt(lambda_i) Y_i)^{2 d_i/(n-1)}`.
///
/// Depends on `X_1` and `Y_2..Y_r` only, so it stays well defined slightly
/// off the constraint locus.
pub fn f_hat(xy: &XyState, spec: &WarpedProductSpec) -> Result<f64> {
    let n = spec.n() as f64;
    let x1 = xy.x[0];
    if !((x1 - 1.0).abs() < std::f64::consts::SQRT_2) {
        return Err(Error::Domain {
            function: "f_hat",
            reason: format!("|X_1 - 1| = {} is not below sqrt(2)", (x1 - 1.0).abs()),
        });
    }
    let num = 1.0 - (1.0 - x1).powi(2) / (n - 1.0);
    Ok(num / f_hat_denominator(xy, spec)?)
}

/// The second closed form of [`f_hat`], which agrees with the first one on
/// `{L = 0, H = 1}`.
pub fn f_hat_locus_form(xy: &XyState, spec: &WarpedProductSpec) -> Result<f64> {
    let n = spec.n() as f64;
    let h = script_h(xy, spec.d());
    let num = lyapunov(xy, spec) + 1.0 - (h - xy.x[0]).powi(2) / (n - 1.0);
    Ok(num / f_hat_denominator(xy, spec)?)
}

/// `F = prod_j Y_j^{-2 d_j / n}`.
pub fn f_bohm(xy: &XyState, dims: &[usize]) -> Result<f64> {
    let n: usize = dims.iter().sum();
    let mut f = 1.0;
    for (i, (&y, &d)) in xy.y.iter().zip(dims).enumerate() {
        if !(y > 0.0) {
            return Err(Error::Domain {
                function: "f_bohm",
                reason: format!("Y_{} = {y} must be positive", i + 1),
            });
        }
        f *= y.powf(-2.0 * d as f64 / n as f64);
    }
    Ok(f)
}

/// Critical point of [`f_bohm`] on the Ricci-flat locus when every factor
/// has positive Einstein constant: `X_i = sqrt(d_i)/n`,
/// `Y_i = sqrt((n-1)/lambda_i) X_i`.
pub fn bohm_cone_point(spec: &WarpedProductSpec) -> Result<XyState> {
    if spec.lambda().iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidSpec(
            "the cone point needs every Einstein constant positive".into(),
        ));
    }
    let n = spec.n() as f64;
    let x: Vec<f64> = spec.d().iter().map(|&d| (d as f64).sqrt() / n).collect();
    let y = x
        .iter()
        .zip(spec.lambda())
        .map(|(x, l)| ((n - 1.0) / l).sqrt() * x)
        .collect();
    Ok(XyState::new(x, y))
}

fn two_summands_ricci_unchecked(g1: f64, g2: f64, spec: &TwoSummandsSpec) -> (f64, f64) {
    let (d1, d2) = (spec.d1() as f64, spec.d2() as f64);
    let g2sq = g2 * g2;
    let mixed = g1 * g1 / (g2sq * g2sq);
    let r1 = if spec.a1 == 0.0 {
        spec.a3 / d1 * mixed
    } else {
        spec.a1 / (d1 * g1 * g1) + spec.a3 / d1 * mixed
    };
    let r2 = spec.a2 / (d2 * g2sq) - 2.0 * spec.a3 / d2 * mixed;
    (r1, r2)
}

/// Ricci components `(r_1, r_2)` of the two-summands metric.
pub fn two_summands_ricci(g1: f64, g2: f64, spec: &TwoSummandsSpec) -> Result<(f64, f64)> {
    if !(g1 > 0.0) {
        return Err(Error::NonpositiveWarp { index: 1, value: g1 });
    }
    if !(g2 > 0.0) {
        return Err(Error::NonpositiveWarp { index: 2, value: g2 });
    }
    Ok(two_summands_ricci_unchecked(g1, g2, spec))
}

/// Conservation-law residuals of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    /// `u'' + xi u' - epsilon u - C` with `u''` taken from the flow; zero up
    /// to rounding.
    pub res1: f64,
    /// `S + tr L^2 - xi^2 - epsilon u + (n-1) epsilon / 2 - C`, the first
    /// integral that the flow does not enforce.
    pub res2: f64,
}

pub fn conservation_residual<O: Orbit + ?Sized>(
    z: &ZState,
    orbit: &O,
    p: &SolitonParams,
) -> Result<Residuals> {
    check_z(z, orbit)?;
    let dims = orbit.dims();
    let n = orbit.n() as f64;
    let tr_l = z.tr_l(dims);
    let xi = tr_l - z.udot;
    let uddot = crate::systems::uddot(z.u, z.udot, tr_l, p);
    let res1 = uddot + xi * z.udot - p.epsilon * z.u - p.c;
    let res2 = orbit.scalar_curvature(&z.g) + tr_l2(z, dims) - xi * xi - p.epsilon * z.u
        + 0.5 * (n - 1.0) * p.epsilon
        - p.c;
    Ok(Residuals { res1, res2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec12() -> WarpedProductSpec {
        WarpedProductSpec::new(vec![1, 2], vec![0.0, 1.0]).unwrap()
    }

    fn spec123() -> WarpedProductSpec {
        WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).unwrap()
    }

    fn z(g: &[f64], gdot: &[f64], udot: f64) -> ZState {
        ZState {
            t: 1.0,
            g: g.to_vec(),
            gdot: gdot.to_vec(),
            u: 0.0,
            udot,
        }
    }

    #[test]
    fn spec_validation() {
        assert!(WarpedProductSpec::new(vec![1], vec![0.0]).is_err());
        assert!(WarpedProductSpec::new(vec![1, 1], vec![0.0, 0.0]).is_err());
        assert!(WarpedProductSpec::new(vec![1, 2], vec![0.0, 0.0]).is_err());
        assert!(WarpedProductSpec::new(vec![1, 2], vec![1.0, 1.0]).is_err());
        assert!(WarpedProductSpec::new(vec![1, 2], vec![0.0, -1.0]).is_err());
        assert!(WarpedProductSpec::new(vec![1, 2], vec![0.0]).is_err());
        assert!(WarpedProductSpec::new(vec![2, 3], vec![1.0, 2.0]).is_ok());
        assert!(spec123().check_circle_first().is_ok());
        let bohm = WarpedProductSpec::new(vec![2, 3], vec![1.0, 2.0]).unwrap();
        assert!(bohm.check_circle_first().is_err());
    }

    #[test]
    fn two_summands_validation() {
        let s = TwoSummandsSpec::example2(1).unwrap();
        assert_eq!((s.d1(), s.d2(), s.a1(), s.a2(), s.a3()), (2, 4, 2.0, 6.0, 0.5));
        let s = TwoSummandsSpec::example3(2).unwrap();
        assert_eq!((s.d1(), s.d2(), s.a1(), s.a2(), s.a3()), (3, 8, 6.0, 32.0, 1.5));
        assert!(TwoSummandsSpec::new(2, 1, 1.0, 1.0).is_err());
        assert!(TwoSummandsSpec::new(2, 4, 0.0, 1.0).is_err());
        assert!(TwoSummandsSpec::new(2, 4, 1.0, 0.0).is_err());
    }

    #[test]
    fn params_by_mode() {
        assert!(SolitonParams::steady(-1.0).check(Mode::Soliton).is_ok());
        assert!(SolitonParams::steady(1.0).check(Mode::Soliton).is_err());
        assert!(SolitonParams::steady(0.0).check(Mode::Soliton).is_err());
        assert!(SolitonParams::ricci_flat().check(Mode::RicciFlat).is_ok());
        assert!(SolitonParams::steady(-1.0).check(Mode::RicciFlat).is_err());
        let p = SolitonParams { epsilon: 1.0, c: -1.0 };
        assert!(p.check(Mode::Soliton).is_err());
    }

    #[test]
    fn scalars_at_rest() {
        let s = scalars_from_z(&z(&[1.0, 1.0], &[0.0, 0.0], 0.0), &spec12(), &SolitonParams::steady(-1.0))
            .unwrap();
        assert_eq!(s.tr_l, 0.0);
        assert_eq!(s.xi, 0.0);
        assert_eq!(s.s, 2.0);
        assert_eq!(s.tr_l2, 0.0);
        assert_eq!(s.rbar, 1.0);
        assert_eq!(s.lcal, None);
        assert_eq!(s.h, None);
    }

    #[test]
    fn scalars_by_substitution() {
        let s = scalars_from_z(
            &z(&[1.0, 2.0], &[0.5, 0.25], -0.1),
            &spec12(),
            &SolitonParams::steady(-1.0),
        )
        .unwrap();
        // tr L = 0.5/1 + 2 * 0.25/2; S = 2 * 1/4; tr L^2 = 0.25 + 2 * 0.125^2
        assert_abs_diff_eq!(s.tr_l, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(s.xi, 0.85, epsilon = 1e-15);
        assert_abs_diff_eq!(s.s, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.tr_l2, 0.28125, epsilon = 1e-15);
        assert_abs_diff_eq!(s.rbar, 1.0 - 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(s.lcal.unwrap() * s.xi * s.xi, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.relvol, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn xi_limit_value() {
        let s = scalars_from_z(&z(&[1.0, 1.0], &[0.0, 0.0], -1.0), &spec12(), &SolitonParams::steady(-1.0))
            .unwrap();
        assert_eq!(s.tr_l, 0.0);
        assert_eq!(s.xi, 1.0);
        assert_eq!(s.xi, (1.0f64).sqrt());
    }

    #[test]
    fn xy_map_unit_state() {
        let xy = xy_from_z(&z(&[1.0, 1.0], &[1.0, 0.0], 0.0), &[1, 2]).unwrap();
        assert_eq!(xy.x, vec![1.0, 0.0]);
        assert_abs_diff_eq!(xy.y[0], 1.0);
        assert_abs_diff_eq!(xy.y[1], 2f64.sqrt(), epsilon = 1e-15);
        assert!(xy_from_z(&z(&[1.0, 1.0], &[0.0, 0.0], 0.0), &[1, 2]).is_err());
        assert!(xy_from_z(&z(&[1.0, 1.0], &[-1.0, 0.0], 0.0), &[1, 2]).is_err());
    }

    #[test]
    fn uniform_expansion_has_unit_h() {
        let zz = z(&[2.0, 0.5, 3.0], &[0.6, 0.15, 0.9], 0.0);
        let xy = xy_from_z(&zz, &[1, 2, 3]).unwrap();
        assert_abs_diff_eq!(script_h(&xy, &[1, 2, 3]), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn lyapunov_at_stationary_points() {
        let spec = spec123();
        let p0 = XyState::new(vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]);
        assert_eq!(lyapunov(&p0, &spec), 0.0);
        assert_eq!(script_h(&p0, spec.d()), 1.0);
        assert_eq!(script_g(&p0), 1.0);
        let origin = XyState::new(vec![0.0; 3], vec![0.0; 3]);
        assert_eq!(lyapunov(&origin, &spec), -1.0);
        assert_eq!(script_h(&origin, spec.d()), 0.0);
        assert_eq!(script_g(&origin), 0.0);
        // subset A = {2, 3}: rho = 1/5
        let rho: f64 = 0.2;
        let x = vec![0.0, 2f64.sqrt() * rho, 3f64.sqrt() * rho];
        let y = vec![
            0.0,
            (2.0 * rho * (1.0 - rho)).sqrt(),
            (3.0 * rho * (1.0 - rho)).sqrt(),
        ];
        let e = XyState::new(x, y);
        assert_abs_diff_eq!(lyapunov(&e, &spec), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(script_h(&e, spec.d()), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(script_g(&e), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn f0_and_f_special_cases() {
        let spec = spec12();
        let at_rest = z(&[1.0, 2.0], &[0.0, 0.0], 0.0);
        let (f0, f) = f0_and_calf(&at_rest, &spec).unwrap();
        let expected = 4f64.powf(2.0 / 3.0) * 0.5;
        assert_abs_diff_eq!(f0, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(f, expected, epsilon = 1e-14);

        let c = 0.3;
        let umbilic = z(&[1.0, 2.0], &[c, 2.0 * c], 0.0);
        let (f0, f) = f0_and_calf(&umbilic, &spec).unwrap();
        assert_abs_diff_eq!(f0, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(f, expected + 4f64.powf(2.0 / 3.0) * 3.0 * c * c, epsilon = 1e-14);

        // v = 4, S = 0.5, tr L = 0.75, tr L^2 = 0.28125, n = 3
        let (f0, f) = f0_and_calf(&z(&[1.0, 2.0], &[0.5, 0.25], -0.1), &spec).unwrap();
        let scale = 4f64.powf(2.0 / 3.0);
        assert_abs_diff_eq!(f0, scale * (0.5 + 0.28125 - 0.75 * 0.75 / 3.0), epsilon = 1e-14);
        assert_abs_diff_eq!(f, scale * (0.5 + 0.28125), epsilon = 1e-14);
    }

    #[test]
    fn f_hat_minimum_value() {
        let spec = spec123();
        let e = XyState::new(
            vec![0.0, 2f64.sqrt() / 5.0, 3f64.sqrt() / 5.0],
            vec![0.0, 2.0 * 2f64.sqrt() / 5.0, 2.0 * 3f64.sqrt() / 5.0],
        );
        let closed = 5.0 * 2f64.powf(-2.0 / 5.0) * 3f64.powf(-3.0 / 5.0);
        assert_abs_diff_eq!(f_hat(&e, &spec).unwrap(), closed, epsilon = 1e-13);
        assert_abs_diff_eq!(closed, 1.96013, epsilon = 1e-5);
        assert_abs_diff_eq!(f_hat_locus_form(&e, &spec).unwrap(), closed, epsilon = 1e-13);
    }

    #[test]
    fn f_hat_on_x1_equal_one() {
        let spec = spec123();
        let xy = XyState::new(vec![1.0, 0.3, 0.1], vec![5.0, 0.4, 0.7]);
        let expected = 0.4f64.powf(-4.0 / 5.0) * 0.7f64.powf(-6.0 / 5.0);
        assert_abs_diff_eq!(f_hat(&xy, &spec).unwrap(), expected, epsilon = 1e-13);
    }

    #[test]
    fn f_hat_domain() {
        let spec = spec123();
        let bad_y = XyState::new(vec![0.5, 0.3, 0.1], vec![1.0, 0.0, 0.7]);
        assert!(f_hat(&bad_y, &spec).is_err());
        let bad_x = XyState::new(vec![-0.5, 0.3, 0.1], vec![1.0, 0.4, 0.7]);
        assert!(f_hat(&bad_x, &spec).is_err());
    }

    #[test]
    fn f_bohm_values() {
        let ones = XyState::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        assert_eq!(f_bohm(&ones, &[2, 3]).unwrap(), 1.0);
        let xy = XyState::new(vec![0.0, 0.0], vec![2.0, 1.0]);
        assert_abs_diff_eq!(f_bohm(&xy, &[2, 3]).unwrap(), 2f64.powf(-0.8), epsilon = 1e-15);
        assert_abs_diff_eq!(2f64.powf(-0.8), 0.5743, epsilon = 1e-4);
        assert!(f_bohm(&XyState::new(vec![0.0, 0.0], vec![1.0, 0.0]), &[2, 3]).is_err());
    }

    #[test]
    fn bohm_cone_point_on_locus() {
        let spec = WarpedProductSpec::new(vec![2, 3, 4], vec![1.0, 2.0, 3.0]).unwrap();
        let p = bohm_cone_point(&spec).unwrap();
        assert_abs_diff_eq!(lyapunov(&p, &spec), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(script_h(&p, spec.d()), 1.0, epsilon = 1e-15);
        assert!(bohm_cone_point(&spec123()).is_err());
    }

    #[test]
    fn two_summands_ricci_values() {
        let ex2 = TwoSummandsSpec::example2(1).unwrap();
        let (r1, r2) = two_summands_ricci(1.0, 1.0, &ex2).unwrap();
        assert_abs_diff_eq!(r1, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r2, 1.25, epsilon = 1e-15);
        let ex3 = TwoSummandsSpec::example3(1).unwrap();
        let (r1, r2) = two_summands_ricci(1.0, 1.0, &ex3).unwrap();
        assert_abs_diff_eq!(r1, 2.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r2, 2.625, epsilon = 1e-15);
        let (_, r2) = two_summands_ricci(1e-9, 3.0, &ex2).unwrap();
        assert_abs_diff_eq!(r2, 6.0 / (4.0 * 9.0), epsilon = 1e-12);
        assert!(two_summands_ricci(0.0, 1.0, &ex2).is_err());
        assert!(two_summands_ricci(1.0, -1.0, &ex2).is_err());
    }

    #[test]
    fn cylinder_residual() {
        let spec = spec12();
        let p = SolitonParams::steady(-1.0);
        let res = conservation_residual(&z(&[1.0, 2.0], &[0.0, 0.0], 0.0), &spec, &p).unwrap();
        assert_eq!(res.res2, 0.5 + 1.0);
        assert_eq!(res.res1, 0.0);
        let p = SolitonParams::steady(0.5);
        let res = conservation_residual(&z(&[1.0, 2.0], &[0.0, 0.0], 0.0), &spec, &p).unwrap();
        assert_eq!(res.res2, 0.0);
    }

    #[test]
    fn invalid_state_rejected() {
        let spec = spec12();
        let p = SolitonParams::steady(-1.0);
        assert!(scalars_from_z(&z(&[0.0, 1.0], &[1.0, 0.0], 0.0), &spec, &p).is_err());
        assert!(scalars_from_z(&z(&[1.0, f64::NAN], &[1.0, 0.0], 0.0), &spec, &p).is_err());
        assert!(scalars_from_z(&z(&[1.0], &[1.0], 0.0), &spec, &p).is_err());
    }

    #[test]
    fn z_layout_roundtrip() {
        let zz = z(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], 8.0);
        let v = zz.to_vec();
        assert_eq!(v, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0, 0.0, 8.0]);
        assert_eq!(ZState::from_slice(1.0, &v), zz);
        let xy = XyState::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]);
        let sub = xy.subsystem_vec();
        assert_eq!(sub, vec![1.0, 2.0, 3.0, 5.0, 6.0]);
        assert_eq!(XyState::from_subsystem(0.0, &sub, 4.0), xy);
    }
}
