//! Surely-true per-run inequalities evaluated on recorded traces.
//!
//! Each check compares a left side against a right side at every step and
//! keeps the worst signed violation `lhs − rhs`. A step passes when its
//! violation is at most `max(1e−10, 1e−7 · scale)`, where `scale` is the
//! largest magnitude among the terms entering that step.

use serde::{Deserialize, Serialize};

pub mod alpha;
pub mod last_iterate;
pub mod inequalities;
pub mod suite;

pub use alpha::{alpha, alpha_double_sums, alpha_sum, rho, sweep_alpha_identity, sweep_rho_sums};
pub use last_iterate::{check_last_iterate_inequalities, last_iterate_decomposition, LastIterateDecomp};
pub use inequalities::{
    check_d_recursion, check_iterate_comparison, check_one_step, check_weighted_iterates,
    d_sequence, DSequence,
};
pub use suite::{run_trace_suite, SuiteConfig, SuiteSummary};

pub const ABS_TOL: f64 = 1e-10;
pub const REL_TOL: f64 = 1e-7;

pub fn tolerance(scale: f64) -> f64 {
    ABS_TOL.max(REL_TOL * scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub name: String,
    /// Worst `lhs − rhs` relative to its own tolerance; negative means slack.
    pub max_violation: f64,
    pub tolerance: f64,
    /// 1-based step (or configuration index) where it occurred; 0 if nothing was checked.
    pub worst_step: usize,
    pub checked: usize,
    pub pass: bool,
}

impl DiagnosticReport {
    pub fn new(name: impl Into<String>) -> Self {
        DiagnosticReport {
            name: name.into(),
            max_violation: f64::NEG_INFINITY,
            tolerance: ABS_TOL,
            worst_step: 0,
            checked: 0,
            pass: true,
        }
    }

    /// Records one instance `lhs ≤ rhs` whose terms have magnitude at most `scale`.
    pub fn observe(&mut self, step: usize, lhs: f64, rhs: f64, scale: f64) {
        let tol = tolerance(scale.abs().max(lhs.abs()).max(rhs.abs()));
        self.observe_with_tol(step, lhs, rhs, tol);
    }

    /// Records one instance `lhs ≤ rhs` judged against an explicit tolerance.
    pub fn observe_with_tol(&mut self, step: usize, lhs: f64, rhs: f64, tol: f64) {
        let violation = lhs - rhs;
        self.checked += 1;
        let ok = violation <= tol;
        // NaN compares false above, so it is recorded as a failure.
        let worse = !ok && self.pass
            || (ok == self.pass && violation - tol > self.max_violation - self.tolerance);
        if worse || self.checked == 1 {
            self.max_violation = violation;
            self.tolerance = tol;
            self.worst_step = step;
        }
        self.pass &= ok;
    }

    /// Folds another report of the same check into this one.
    pub fn merge(&mut self, other: &DiagnosticReport) {
        if other.checked == 0 {
            return;
        }
        let worse = !other.pass && self.pass
            || (other.pass == self.pass
                && other.max_violation - other.tolerance > self.max_violation - self.tolerance);
        if worse || self.checked == 0 {
            self.max_violation = other.max_violation;
            self.tolerance = other.tolerance;
            self.worst_step = other.worst_step;
        }
        self.checked += other.checked;
        self.pass &= other.pass;
    }
}

pub(crate) fn max_abs(terms: &[f64]) -> f64 {
    terms.iter().fold(0.0, |m, t| m.max(t.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_keeps_worst_relative_violation() {
        let mut r = DiagnosticReport::new("x");
        r.observe(1, 0.0, 1.0, 1.0);
        r.observe(2, 1.0, 1.0 - 1e-9, 1.0);
        assert!(r.pass);
        assert_eq!(r.worst_step, 2);
        r.observe(3, 2.0, 1.0, 2.0);
        assert!(!r.pass);
        assert_eq!(r.worst_step, 3);
        r.observe(4, 0.0, 5.0, 5.0);
        assert_eq!(r.worst_step, 3);
    }

    #[test]
    fn nan_fails() {
        let mut r = DiagnosticReport::new("x");
        r.observe(1, f64::NAN, 0.0, 1.0);
        assert!(!r.pass);
    }

    #[test]
    fn merge_prefers_failures() {
        let mut a = DiagnosticReport::new("x");
        a.observe(1, 0.0, 1.0, 1.0);
        let mut b = DiagnosticReport::new("x");
        b.observe(7, 1.0, 0.0, 1.0);
        a.merge(&b);
        assert!(!a.pass);
        assert_eq!((a.worst_step, a.checked), (7, 2));
    }
}
