use serde::{Deserialize, Serialize};

/// One failed check: which rule, where, and by how much.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub location: String,
    pub magnitude: f64,
}

/// Outcome of a batch of invariant checks.
///
/// Violations are data rather than errors: a report is always produced and
/// `passed` is true exactly when `violations` is empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport {
            passed: true,
            checks: 0,
            violations: Vec::new(),
        }
    }

    /// Records a check that fails when `magnitude > tolerance` (or is NaN).
    pub fn check(
        &mut self,
        rule: &str,
        location: impl Into<String>,
        magnitude: f64,
        tolerance: f64,
    ) -> bool {
        self.checks += 1;
        let ok = magnitude <= tolerance;
        if !ok {
            self.violate(rule, location, magnitude);
        }
        ok
    }

    /// Records a boolean check; a failure is stored with magnitude 1.
    pub fn require(&mut self, rule: &str, location: impl Into<String>, ok: bool) -> bool {
        self.checks += 1;
        if !ok {
            self.violate(rule, location, 1.0);
        }
        ok
    }

    pub fn violate(&mut self, rule: &str, location: impl Into<String>, magnitude: f64) {
        self.violations.push(Violation {
            rule: rule.to_string(),
            location: location.into(),
            magnitude,
        });
        self.passed = false;
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.checks += other.checks;
        self.passed &= other.passed;
        self.violations.extend(other.violations);
    }

    /// True if some violation carries the given rule id.
    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub fn max_magnitude(&self, rule: &str) -> Option<f64> {
        self.violations
            .iter()
            .filter(|v| v.rule == rule)
            .map(|v| v.magnitude)
            .fold(None, |acc, m| Some(acc.map_or(m, |a: f64| a.max(m))))
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed {
            return write!(f, "passed ({} checks)", self.checks);
        }
        writeln!(
            f,
            "FAILED: {} of {} checks violated",
            self.violations.len(),
            self.checks
        )?;
        for v in &self.violations {
            writeln!(f, "  [{}] at {}: {:.3e}", v.rule, v.location, v.magnitude)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_tracks_violations() {
        let mut r = ValidationReport::new();
        assert!(r.check("a", "x", 1e-12, 1e-9));
        assert!(r.passed);
        assert!(!r.check("b", "y", 0.5, 1e-9));
        assert!(!r.passed);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.checks, 2);
        assert!(!r.check("nan", "z", f64::NAN, 1.0));
        assert_eq!(r.max_magnitude("b"), Some(0.5));
    }
}
