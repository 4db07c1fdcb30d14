use std::fmt::Write;

/// One quantitative comparison inside a criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    /// Allowed |value − target|; NaN for one-sided or boolean checks.
    pub tolerance: f64,
    pub passed: bool,
    /// Timing checks are left out of the deterministic record.
    pub wall_clock: bool,
}

impl Check {
    /// |value − target| ≤ tol.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target,
            tolerance: tol,
            passed: (value - target).abs() <= tol,
            wall_clock: false,
        }
    }

    /// |value/target − 1| ≤ rel.
    pub fn relative(name: impl Into<String>, value: f64, target: f64, rel: f64) -> Self {
        let tol = rel * target.abs();
        Self::within(name, value, target, tol)
    }

    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: limit,
            tolerance: f64::NAN,
            passed: value < limit,
            wall_clock: false,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: limit,
            tolerance: f64::NAN,
            passed: value > limit,
            wall_clock: false,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            target: 1.0,
            tolerance: f64::NAN,
            passed: ok,
            wall_clock: false,
        }
    }

    /// Elapsed seconds below `limit`.
    pub fn timing(name: impl Into<String>, seconds: f64, limit: f64) -> Self {
        Self {
            wall_clock: true,
            ..Self::below(name, seconds, limit)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Wall-clock time; not part of the deterministic record.
    pub seconds: f64,
}

impl CriterionReport {
    pub fn new(id: u8, title: &str) -> Self {
        Self {
            id,
            title: title.to_string(),
            checks: Vec::new(),
            notes: Vec::new(),
            seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Single summary line.
    pub fn line(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let mut s = format!(
            "criterion {:>2} {} {} ({:.1} s)",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.seconds
        );
        if !failed.is_empty() {
            let _ = write!(s, " failing: {}", failed.join(", "));
        }
        s
    }

    /// Summary line followed by every check and note.
    pub fn detail(&self) -> String {
        let mut s = self.line();
        self.write_checks(&mut s, true);
        s
    }

    /// Same as [`detail`](Self::detail) without anything that depends on
    /// the wall clock; identical across runs with the same seed.
    pub fn record(&self) -> String {
        let mut s = format!("criterion {:>2} {}", self.id, self.title);
        self.write_checks(&mut s, false);
        s
    }

    fn write_checks(&self, s: &mut String, timing: bool) {
        for c in self.checks.iter().filter(|c| timing || !c.wall_clock) {
            let tol = if c.tolerance.is_nan() {
                String::new()
            } else {
                format!(" ± {:.3e}", c.tolerance)
            };
            let _ = write!(
                *s,
                "\n    [{}] {}: {:.9e} vs {:.9e}{}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.value,
                c.target,
                tol
            );
        }
        for n in &self.notes {
            let _ = write!(*s, "\n    note: {n}");
        }
    }
}
