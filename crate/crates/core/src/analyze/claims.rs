use serde::Serialize;

/// How a measured quantity is compared against its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    pub fn holds(self, x: f64, bound: f64) -> bool {
        match self {
            Relation::Lt => x < bound,
            Relation::Le => x <= bound,
            Relation::Gt => x > bound,
            Relation::Ge => x >= bound,
        }
    }

    fn upper(self) -> bool {
        matches!(self, Relation::Lt | Relation::Le)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }
}

/// Outcome of one monitored claim. `value` is the worst measured value,
/// `tolerance` the bound it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimFlag {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub checked: usize,
    pub violations: usize,
    pub worst_t: Option<f64>,
}

impl ClaimFlag {
    /// A single measured value against a bound. NaN never passes.
    pub fn scalar(name: impl Into<String>, value: f64, relation: Relation, tolerance: f64) -> Self {
        let passed = relation.holds(value, tolerance);
        Self {
            name: name.into(),
            passed,
            value,
            relation,
            tolerance,
            checked: 1,
            violations: usize::from(!passed),
            worst_t: None,
        }
    }

    /// Every `(t, x)` must satisfy `x relation tolerance`.
    pub fn series(
        name: impl Into<String>,
        samples: impl IntoIterator<Item = (f64, f64)>,
        relation: Relation,
        tolerance: f64,
    ) -> Self {
        let mut checked = 0;
        let mut violations = 0;
        let mut worst: Option<(f64, f64)> = None;
        for (t, x) in samples {
            checked += 1;
            if !relation.holds(x, tolerance) {
                violations += 1;
            }
            let worse = match worst {
                None => true,
                Some((_, w)) => x.is_nan() || if relation.upper() { x > w } else { x < w },
            };
            if worse && !worst.is_some_and(|(_, w)| w.is_nan()) {
                worst = Some((t, x));
            }
        }
        Self {
            name: name.into(),
            passed: checked > 0 && violations == 0,
            value: worst.map_or(f64::NAN, |w| w.1),
            relation,
            tolerance,
            checked,
            violations,
            worst_t: worst.map(|w| w.0),
        }
    }

    /// `|value - target| <= tol`.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self::scalar(name, (value - target).abs(), Relation::Le, tol)
    }

    /// `lo <= value <= hi` as two flags.
    pub fn interval(name: &str, value: f64, lo: f64, hi: f64) -> [Self; 2] {
        [
            Self::scalar(format!("{name} >= {lo}"), value, Relation::Ge, lo),
            Self::scalar(format!("{name} <= {hi}"), value, Relation::Le, hi),
        ]
    }

    /// Combines flags of the same claim over several runs. The worst
    /// value and its time come from the worst run.
    pub fn merge(name: impl Into<String>, flags: &[ClaimFlag]) -> Self {
        let Some(first) = flags.first() else {
            return Self::series(name, [], Relation::Le, 0.0);
        };
        let relation = first.relation;
        let worst = flags
            .iter()
            .reduce(|w, f| {
                let worse = f.value.is_nan()
                    || (!w.value.is_nan() && if relation.upper() { f.value > w.value } else { f.value < w.value });
                if worse {
                    f
                } else {
                    w
                }
            })
            .expect("nonempty");
        Self {
            name: name.into(),
            passed: flags.iter().all(|f| f.passed),
            value: worst.value,
            relation,
            tolerance: first.tolerance,
            checked: flags.iter().map(|f| f.checked).sum(),
            violations: flags.iter().map(|f| f.violations).sum(),
            worst_t: worst.worst_t,
        }
    }

    /// Signed distance of the worst value from the bound, positive on the
    /// passing side. NaN for a NaN value.
    pub fn margin(&self) -> f64 {
        if self.relation.upper() {
            self.tolerance - self.value
        } else {
            self.value - self.tolerance
        }
    }

    pub fn summary(&self) -> String {
        let mut line = format!(
            "{} [{}]: worst {:.6e} {} {:.3e}",
            self.name,
            if self.passed { "pass" } else { "FAIL" },
            self.value,
            self.relation.symbol(),
            self.tolerance
        );
        if self.checked > 1 {
            line.push_str(&format!(", {}/{} violations", self.violations, self.checked));
        }
        if let Some(t) = self.worst_t {
            line.push_str(&format!(", at {t:.6}"));
        }
        line
    }
}
