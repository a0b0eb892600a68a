use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{lyapunov, Orbit, WarpedProductSpec, XyState};
use crate::systems::{VectorField, XyField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationaryKind {
    /// `X = Y = 0`.
    Origin,
    /// `Y = 0`, `sum X_i^2 = 1`: a sphere of stationary points.
    SphereLocus,
    /// `X_i = sqrt(d_i) rho`, `Y_i^2 = (d_i/lambda_i) rho (1 - rho)` on a
    /// subset `A` of the factors `2..r`, zero elsewhere.
    SubsetType,
    /// `X = 0`, `Y_i = 0` for `i >= 2`, `Y_1` free.
    Y1Line,
    /// `X_1 = 1`, all other coordinates 0, `Y_1` free; contains `P_0`.
    X1Line,
}

impl StationaryKind {
    /// Value of the Lyapunov function on this kind of point.
    pub fn lyapunov_value(self) -> f64 {
        match self {
            StationaryKind::Origin | StationaryKind::Y1Line => -1.0,
            _ => 0.0,
        }
    }

    pub fn is_family(self) -> bool {
        matches!(
            self,
            StationaryKind::SphereLocus | StationaryKind::Y1Line | StationaryKind::X1Line
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub kind: StationaryKind,
    /// The point itself, or a canonical sample of a family.
    pub point: XyState,
    /// Factor indices (1-based) of a subset-type point.
    pub subset: Vec<usize>,
    /// Free parameters of a family, in words.
    pub family: Option<String>,
}

impl StationaryPoint {
    pub fn lyapunov(&self, spec: &WarpedProductSpec) -> f64 {
        lyapunov(&self.point, spec)
    }

    /// Max norm of the vector field at the point.
    pub fn residual(&self, spec: &WarpedProductSpec) -> f64 {
        let f = XyField::new(spec);
        let v = self.point.to_vec();
        let mut dv = vec![0.0; v.len()];
        f.eval(0.0, &v, &mut dv).expect("dimensions match the spec");
        dv.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn check_hypotheses(spec: &WarpedProductSpec) -> Result<()> {
    spec.check_circle_first()?;
    if spec.lambda()[1..].iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidSpec(
            "stationary points are classified for lambda_i > 0, i >= 2".into(),
        ));
    }
    Ok(())
}

/// The subset-type point for `subset` (0-based indices into the factors,
/// all at least 1).
pub fn subset_point(spec: &WarpedProductSpec, subset: &[usize]) -> XyState {
    let r = spec.r();
    let rho = 1.0 / subset.iter().map(|&j| spec.d()[j] as f64).sum::<f64>();
    let mut x = vec![0.0; r];
    let mut y = vec![0.0; r];
    for &j in subset {
        let d = spec.d()[j] as f64;
        x[j] = d.sqrt() * rho;
        y[j] = (d / spec.lambda()[j] * rho * (1.0 - rho)).sqrt();
    }
    XyState::new(x, y)
}

/// All stationary points of the phase-space system for a circle-first
/// spec, families represented by samples:
/// the origin, axis samples `+e_i` of the sphere locus, the
/// `2^{r-1} - 1` subset-type points, and the two line families.
pub fn critical_points(spec: &WarpedProductSpec) -> Result<Vec<StationaryPoint>> {
    check_hypotheses(spec)?;
    let r = spec.r();
    let zeros = || vec![0.0; r];
    let mut out = vec![StationaryPoint {
        kind: StationaryKind::Origin,
        point: XyState::new(zeros(), zeros()),
        subset: vec![],
        family: None,
    }];
    for i in 0..r {
        let mut x = zeros();
        x[i] = 1.0;
        out.push(StationaryPoint {
            kind: StationaryKind::SphereLocus,
            point: XyState::new(x, zeros()),
            subset: vec![],
            family: Some("Y = 0, sum X_i^2 = 1".into()),
        });
    }
    for mask in 1u32..(1 << (r - 1)) {
        let subset: Vec<usize> = (1..r).filter(|j| mask & (1 << (j - 1)) != 0).collect();
        out.push(StationaryPoint {
            kind: StationaryKind::SubsetType,
            point: subset_point(spec, &subset),
            subset: subset.iter().map(|j| j + 1).collect(),
            family: None,
        });
    }
    let mut y = zeros();
    y[0] = 1.0;
    out.push(StationaryPoint {
        kind: StationaryKind::Y1Line,
        point: XyState::new(zeros(), y.clone()),
        subset: vec![],
        family: Some("X = 0, Y_i = 0 for i >= 2, Y_1 free".into()),
    });
    let mut x = zeros();
    x[0] = 1.0;
    out.push(StationaryPoint {
        kind: StationaryKind::X1Line,
        point: XyState::new(x, y),
        subset: vec![],
        family: Some("X_1 = 1, X_i = Y_i = 0 for i >= 2, Y_1 free".into()),
    });
    Ok(out)
}

/// The point `E` on the Ricci-flat locus: `X_1 = 0`, `X_i = sqrt(d_i)/(n-1)`,
/// `Y_i = sqrt((n-2)/lambda_i) X_i` for `i >= 2`, and `Y_1 = 0`.
pub fn point_e(spec: &WarpedProductSpec) -> Result<XyState> {
    if spec.lambda()[1..].iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidSpec("E needs lambda_i > 0 for i >= 2".into()));
    }
    let n = spec.n() as f64;
    let r = spec.r();
    let mut x = vec![0.0; r];
    let mut y = vec![0.0; r];
    for i in 1..r {
        x[i] = (spec.d()[i] as f64).sqrt() / (n - 1.0);
        y[i] = ((n - 2.0) / spec.lambda()[i]).sqrt() * x[i];
    }
    Ok(XyState::new(x, y))
}

/// `(n-1) prod_{i>=2} d_i^{-d_i/(n-1)}`, the minimum of the modified
/// Lyapunov function, attained at `E`.
pub fn f_hat_minimum(spec: &WarpedProductSpec) -> f64 {
    let n = spec.n() as f64;
    spec.d()[1..]
        .iter()
        .map(|&d| (d as f64).powf(-(d as f64) / (n - 1.0)))
        .product::<f64>()
        * (n - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{f_hat, script_g, script_h};
    use approx::assert_abs_diff_eq;

    fn spec123() -> WarpedProductSpec {
        WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn enumeration_for_three_factors() {
        let spec = spec123();
        let pts = critical_points(&spec).unwrap();
        let count = |k| pts.iter().filter(|p| p.kind == k).count();
        assert_eq!(count(StationaryKind::Origin), 1);
        assert_eq!(count(StationaryKind::SubsetType), 3);
        assert_eq!(count(StationaryKind::Y1Line), 1);
        assert_eq!(count(StationaryKind::X1Line), 1);
        assert_eq!(count(StationaryKind::SphereLocus), 3);
        for p in &pts {
            assert!(p.residual(&spec) < 1e-12, "{p:?}");
            assert_abs_diff_eq!(p.lyapunov(&spec), p.kind.lyapunov_value(), epsilon = 1e-14);
        }
    }

    #[test]
    fn subset_coordinates() {
        let spec = spec123();
        let pts = critical_points(&spec).unwrap();
        let find = |s: &[usize]| pts.iter().find(|p| p.subset == s).unwrap().point.clone();
        let both = find(&[2, 3]);
        assert_abs_diff_eq!(both.x[1], 2f64.sqrt() / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(both.x[2], 3f64.sqrt() / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(both.y[1] * both.y[1], 8.0 / 25.0, epsilon = 1e-15);
        assert_abs_diff_eq!(both.y[2] * both.y[2], 12.0 / 25.0, epsilon = 1e-15);
        let two = find(&[2]);
        assert_abs_diff_eq!(two.x[1], 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(two.y[1] * two.y[1], 0.5, epsilon = 1e-15);
        assert_eq!([two.x[0], two.x[2], two.y[0], two.y[2]], [0.0; 4]);
    }

    #[test]
    fn two_factors_have_one_subset_point() {
        let spec = WarpedProductSpec::new(vec![1, 2], vec![0.0, 1.0]).unwrap();
        let pts = critical_points(&spec).unwrap();
        assert_eq!(pts.iter().filter(|p| p.kind == StationaryKind::SubsetType).count(), 1);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let spec = WarpedProductSpec::new(vec![2, 3], vec![1.0, 2.0]).unwrap();
        assert!(critical_points(&spec).is_err());
    }

    #[test]
    fn point_e_properties() {
        let spec = spec123();
        let e = point_e(&spec).unwrap();
        assert_abs_diff_eq!(e.y[1], 2.0 * 2f64.sqrt() / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.y[2], 2.0 * 3f64.sqrt() / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(script_h(&e, spec.d()), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(script_g(&e), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(lyapunov(&e, &spec), 0.0, epsilon = 1e-15);
        let all = subset_point(&spec, &[1, 2]);
        for (a, b) in e.to_vec().iter().zip(all.to_vec()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let expected = 5.0 * 2f64.powf(-0.4) * 3f64.powf(-0.6);
        assert_abs_diff_eq!(f_hat_minimum(&spec), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(f_hat(&e, &spec).unwrap(), expected, epsilon = 1e-12);
    }
}
