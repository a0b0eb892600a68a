//! Initial states near the singular orbit.
//!
//! The equations are singular at `t = 0`, where the first factor collapses.
//! Smoothness there fixes the Taylor data up to second order:
//! `g_1 = t + O(t^3)`, `g_i = l_i + a_i t^2 / 2 + O(t^4)` and
//! `u = u_0 + b t^2 / 2 + O(t^4)`, with `a_i = l_i (r_i(0) + epsilon/2) / (d_1 + 1)`
//! and `b = (C + epsilon u_0) / (d_1 + 1)`. The seeds below evaluate this
//! truncated series at a small `t_0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{tr_l2, xy_from_z, Mode, Orbit, SolitonParams, TwoSummandsSpec, WarpedProductSpec, XyState, ZState};

pub const DEFAULT_T0: f64 = 0.001;
pub const MAX_T0: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedConfig {
    pub t0: f64,
    /// Radii of the non-collapsing factors, `l_2, ..., l_r`.
    pub l: Vec<f64>,
    pub u0: f64,
    pub mode: Mode,
    /// Replace one series value by a root of the first integral
    /// `S + tr L^2 - xi^2 = C`: `u'` in soliton mode, `g_1'` in Ricci-flat
    /// mode (where `u'` vanishes). The change is of the order of the
    /// truncation error and removes the `O(t0^2)` residual.
    #[serde(default)]
    pub enforce_first_integral: bool,
}

impl SeedConfig {
    pub fn soliton(l: Vec<f64>) -> Self {
        Self {
            t0: DEFAULT_T0,
            l,
            u0: 0.0,
            mode: Mode::Soliton,
            enforce_first_integral: false,
        }
    }

    pub fn ricci_flat(l: Vec<f64>) -> Self {
        Self {
            mode: Mode::RicciFlat,
            ..Self::soliton(l)
        }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn constrained(mut self) -> Self {
        self.enforce_first_integral = true;
        self
    }

    pub fn validate(&self, r: usize) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0 <= MAX_T0) {
            return Err(Error::InvalidSeed(format!(
                "t0 must lie in (0, {MAX_T0}], got {}",
                self.t0
            )));
        }
        if self.l.len() != r - 1 {
            return Err(Error::InvalidSeed(format!(
                "expected {} radii for the non-collapsing factors, got {}",
                r - 1,
                self.l.len()
            )));
        }
        if let Some(l) = self.l.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidSeed(format!("radii must be positive, got {l}")));
        }
        if !self.u0.is_finite() {
            return Err(Error::InvalidSeed("u0 must be finite".into()));
        }
        Ok(())
    }
}

/// Second-order coefficients `(a_2, ..., a_r)` and `b` of the series.
pub fn series_coefficients<O: Orbit + ?Sized>(
    orbit: &O,
    p: &SolitonParams,
    cfg: &SeedConfig,
) -> (Vec<f64>, f64) {
    let d1 = orbit.dims()[0] as f64;
    let mut g0 = Vec::with_capacity(orbit.r());
    g0.push(0.0);
    g0.extend_from_slice(&cfg.l);
    let a = (1..orbit.r())
        .map(|i| g0[i] * (orbit.ricci(&g0, i) + 0.5 * p.epsilon) / (d1 + 1.0))
        .collect();
    let b = match cfg.mode {
        Mode::Soliton => (p.c + p.epsilon * cfg.u0) / (d1 + 1.0),
        Mode::RicciFlat => 0.0,
    };
    (a, b)
}

fn series_state<O: Orbit + ?Sized>(orbit: &O, p: &SolitonParams, cfg: &SeedConfig) -> Result<ZState> {
    let (a, b) = series_coefficients(orbit, p, cfg);
    let t0 = cfg.t0;
    let mut g = vec![t0];
    let mut gdot = vec![1.0];
    for (l, a) in cfg.l.iter().zip(&a) {
        g.push(l + 0.5 * a * t0 * t0);
        gdot.push(a * t0);
    }
    let mut z = ZState {
        t: t0,
        g,
        gdot,
        u: cfg.u0 + 0.5 * b * t0 * t0,
        udot: b * t0,
    };
    if cfg.enforce_first_integral {
        enforce(orbit, p, cfg.mode, &mut z)?;
    }
    Ok(z)
}

fn enforce<O: Orbit + ?Sized>(orbit: &O, p: &SolitonParams, mode: Mode, z: &mut ZState) -> Result<()> {
    match mode {
        Mode::Soliton => enforce_with_udot(orbit, p, z),
        Mode::RicciFlat => enforce_with_gdot1(orbit, p, z),
    }
}

/// `S - epsilon u + (n-1) epsilon / 2 - C`, the part of the first integral
/// that does not involve derivatives.
fn potential_part<O: Orbit + ?Sized>(orbit: &O, p: &SolitonParams, z: &ZState) -> f64 {
    let n = orbit.n() as f64;
    orbit.scalar_curvature(&z.g) - p.epsilon * z.u + 0.5 * (n - 1.0) * p.epsilon - p.c
}

fn enforce_with_udot<O: Orbit + ?Sized>(orbit: &O, p: &SolitonParams, z: &mut ZState) -> Result<()> {
    let dims = orbit.dims();
    let xi_sq = potential_part(orbit, p, z) + tr_l2(z, dims);
    if !(xi_sq > 0.0) {
        return Err(Error::InvalidSeed(format!(
            "first integral has no positive root xi at t0 = {}",
            z.t
        )));
    }
    z.udot = z.tr_l(dims) - xi_sq.sqrt();
    Ok(())
}

/// With `u'` pinned (it vanishes for Ricci-flat seeds), solves the first
/// integral for `x = g_1'/g_1`. Writing `xi = d_1 x + a` and
/// `tr L^2 = d_1 x^2 + b`, it reads
/// `(d_1 - d_1^2) x^2 - 2 d_1 a x + (K + b - a^2) = 0`; the root nearest
/// the series value is taken.
fn enforce_with_gdot1<O: Orbit + ?Sized>(orbit: &O, p: &SolitonParams, z: &mut ZState) -> Result<()> {
    let dims = orbit.dims();
    let d1 = dims[0] as f64;
    let x0 = z.gdot[0] / z.g[0];
    let a = z.tr_l(dims) - d1 * x0 - z.udot;
    let b = tr_l2(z, dims) - d1 * x0 * x0;
    let (qa, qb, qc) = (d1 - d1 * d1, -2.0 * d1 * a, potential_part(orbit, p, z) + b - a * a);
    let x = if qa == 0.0 {
        -qc / qb
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if !(disc >= 0.0) {
            return Err(Error::InvalidSeed(format!(
                "first integral has no real root g_1'/g_1 at t0 = {}",
                z.t
            )));
        }
        let q = -0.5 * (qb + qb.signum() * disc.sqrt());
        let (r1, r2) = (q / qa, qc / q);
        if (r1 - x0).abs() < (r2 - x0).abs() {
            r1
        } else {
            r2
        }
    };
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidSeed(format!(
            "first integral gives g_1'/g_1 = {x} at t0 = {}",
            z.t
        )));
    }
    z.gdot[0] = x * z.g[0];
    Ok(())
}

/// Series seed for a multiply warped product whose first factor is a
/// collapsing circle.
pub fn soliton_seed(spec: &WarpedProductSpec, p: &SolitonParams, cfg: &SeedConfig) -> Result<ZState> {
    spec.check_circle_first()?;
    p.check(cfg.mode)?;
    cfg.validate(spec.r())?;
    series_state(spec, p, cfg)
}

/// Series seed for a two-summands orbit; `cfg.l` holds the single radius
/// `h_bar` of the second summand.
///
/// Unlike the circle case, `g_1 = t + c t^3` carries its cubic term: for
/// `d_1 > 1` it enters the first integral at order one. Matching the `t`
/// terms of the `g_1` equation gives `c = (b - d_2 a_2 / h_bar) / (6 d_1)`.
pub fn two_summands_seed(spec: &TwoSummandsSpec, p: &SolitonParams, cfg: &SeedConfig) -> Result<ZState> {
    p.check(cfg.mode)?;
    cfg.validate(2)?;
    let unconstrained = SeedConfig {
        enforce_first_integral: false,
        ..cfg.clone()
    };
    let mut z = series_state(spec, p, &unconstrained)?;
    let c = cubic_coefficient(spec, p, cfg);
    let t0 = cfg.t0;
    z.g[0] += c * t0.powi(3);
    z.gdot[0] += 3.0 * c * t0 * t0;
    if cfg.enforce_first_integral {
        enforce(spec, p, cfg.mode, &mut z)?;
    }
    Ok(z)
}

/// The coefficient `c` of `g_1 = t + c t^3` for a two-summands orbit.
pub fn cubic_coefficient(spec: &TwoSummandsSpec, p: &SolitonParams, cfg: &SeedConfig) -> f64 {
    let (a, b) = series_coefficients(spec, p, cfg);
    let (d1, d2) = (spec.d1() as f64, spec.d2() as f64);
    (b - d2 * a[0] / cfg.l[0]) / (6.0 * d1)
}

/// The warped-product seed mapped to phase coordinates, at `s = 0`.
pub fn xy_seed(spec: &WarpedProductSpec, p: &SolitonParams, cfg: &SeedConfig) -> Result<XyState> {
    let z = soliton_seed(spec, p, cfg)?;
    xy_from_z(&z, spec.d())
}
