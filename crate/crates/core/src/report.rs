use std::fmt;

use serde::Serialize;

/// Where the worst violation of a check was observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    None,
    Time { t: f64 },
    Phase { sigma: f64, xi: f64 },
    Pair { sigma1: f64, sigma2: f64, xi: f64 },
}

/// Pass/fail record of a sampled inequality check.
///
/// Every check reduces to "violation ≤ tolerance" at a set of samples; the
/// report keeps the largest violation and where it occurred. A check with no
/// samples passes vacuously with `worst_violation = -inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub worst_location: Location,
    pub tolerance: f64,
    pub samples_checked: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn builder(name: impl Into<String>, tolerance: f64) -> ReportBuilder {
        ReportBuilder {
            name: name.into(),
            tolerance,
            worst: f64::NEG_INFINITY,
            location: Location::None,
            samples: 0,
            notes: Vec::new(),
        }
    }

    /// Combine several reports into one that passes only if all of them pass.
    pub fn all(name: impl Into<String>, parts: &[VerificationReport]) -> VerificationReport {
        let mut notes = Vec::new();
        let mut worst: Option<&VerificationReport> = None;
        for p in parts {
            notes.push(format!(
                "{}: {} (worst {:.3e}, tol {:.1e})",
                p.name,
                if p.passed { "pass" } else { "FAIL" },
                p.worst_violation,
                p.tolerance
            ));
            let margin = p.worst_violation - p.tolerance;
            if worst.map_or(true, |w| margin > w.worst_violation - w.tolerance) {
                worst = Some(p);
            }
        }
        let (worst_violation, worst_location, tolerance) = match worst {
            Some(w) => (w.worst_violation, w.worst_location, w.tolerance),
            None => (f64::NEG_INFINITY, Location::None, 0.0),
        };
        VerificationReport {
            name: name.into(),
            passed: parts.iter().all(|p| p.passed),
            worst_violation,
            worst_location,
            tolerance,
            samples_checked: parts.iter().map(|p| p.samples_checked).sum(),
            notes,
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: worst violation {:.3e} (tol {:.1e}) over {} samples at {:?}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst_violation,
            self.tolerance,
            self.samples_checked,
            self.worst_location
        )
    }
}

pub struct ReportBuilder {
    name: String,
    tolerance: f64,
    worst: f64,
    location: Location,
    samples: usize,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn observe(&mut self, violation: f64, location: Location) {
        self.samples += 1;
        // NaN counts as the worst possible outcome
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if v > self.worst {
            self.worst = v;
            self.location = location;
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn finish(self) -> VerificationReport {
        VerificationReport {
            passed: self.worst <= self.tolerance,
            name: self.name,
            worst_violation: self.worst,
            worst_location: self.location,
            tolerance: self.tolerance,
            samples_checked: self.samples,
            notes: self.notes,
        }
    }
}
