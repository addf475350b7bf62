//! Simulation of Duhem operators along piecewise-linear inputs.
//!
//! The operator is rate independent: on a segment where `u̇ > 0` the output
//! obeys `dy/du = f1(y, u)` regardless of how fast `u` moves (and `dy/du = f2`
//! for `u̇ < 0`). Integration therefore runs in input space, one monotone
//! segment at a time, with a fixed-step RK4 scheme. Time stamps are recovered
//! from the segment's linear time map.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DuhemModel, Rect};
use crate::numeric::rk4_step;
use crate::report::{Location, VerificationReport};
use crate::signal::InputSignal;

/// Upper bound on the input-space step used by [`StepRule::Auto`].
pub const AUTO_STEP_CAP: f64 = 1e-3;

/// One sampled point `(t, u, y)` of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub u: f64,
    pub y: f64,
}

/// Sampled solution `y = Φ(u, y0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub model_id: String,
    pub y0: f64,
    pub step: f64,
    pub samples: Vec<Sample>,
    /// Index into `samples` of each input breakpoint.
    pub breakpoint_index: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Sample {
        self.samples[self.samples.len() - 1]
    }

    /// Samples at the input breakpoints.
    pub fn at_breakpoints(&self) -> impl Iterator<Item = Sample> + '_ {
        self.breakpoint_index.iter().map(|&i| self.samples[i])
    }

    pub fn max_abs_output(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.y.abs()))
    }
}

/// Input-space step selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// At most this input distance per RK4 step.
    Fixed(f64),
    /// Segment length / 1000, capped at [`AUTO_STEP_CAP`].
    Auto,
}

impl StepRule {
    fn substeps(&self, du: f64) -> usize {
        let len = du.abs();
        let h = match *self {
            StepRule::Fixed(h) => h,
            StepRule::Auto => (len / 1000.0).min(AUTO_STEP_CAP),
        };
        ((len / h).ceil() as usize).max(1)
    }

    fn nominal(&self) -> f64 {
        match *self {
            StepRule::Fixed(h) => h,
            StepRule::Auto => AUTO_STEP_CAP,
        }
    }
}

/// Integrates the operator along `input` from `y0` with input-space steps of
/// at most `step`. Samples every breakpoint and every RK4 substep.
pub fn simulate(model: &DuhemModel, input: &InputSignal, y0: f64, step: f64) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidStep(step));
    }
    simulate_with(model, input, y0, StepRule::Fixed(step))
}

pub fn simulate_with(model: &DuhemModel, input: &InputSignal, y0: f64, rule: StepRule) -> Result<Trajectory> {
    let u0 = input.start_value();
    if !model.contains(y0, u0) {
        return Err(Error::InvalidInitialState { y0, u0 });
    }
    let mut samples = vec![Sample { t: 0.0, u: u0, y: y0 }];
    let mut breakpoint_index = vec![0];
    let mut y = y0;

    for seg in input.segments() {
        let du = seg.du();
        if du == 0.0 {
            samples.push(Sample {
                t: seg.t1,
                u: seg.u1,
                y,
            });
            breakpoint_index.push(samples.len() - 1);
            continue;
        }
        let n = rule.substeps(du);
        let h = du / n as f64;
        let dt = seg.duration() / n as f64;
        let increasing = du > 0.0;
        let slope = |s: f64, x: f64| if increasing { model.f1(s, x) } else { model.f2(s, x) };
        for k in 1..=n {
            let u_prev = seg.u0 + (k - 1) as f64 * h;
            y = rk4_step(slope, u_prev, y, h);
            let (t, u) = if k == n {
                (seg.t1, seg.u1)
            } else {
                (seg.t0 + k as f64 * dt, seg.u0 + k as f64 * h)
            };
            if !model.contains(y, u) {
                return Err(Error::DomainExit { t, u, y });
            }
            samples.push(Sample { t, u, y });
        }
        breakpoint_index.push(samples.len() - 1);
    }

    Ok(Trajectory {
        model_id: model.id().to_string(),
        y0,
        step: rule.nominal(),
        samples,
        breakpoint_index,
    })
}

/// Raw residuals of the two existence inequalities for one pair:
/// `(σ1−σ2)[f1(σ1)−f1(σ2)] − λ(σ1−σ2)²` (must be ≤ 0) and
/// `−(σ1−σ2)[f2(σ1)−f2(σ2)] − λ(σ1−σ2)²` (must be ≤ 0).
pub fn existence_residuals(model: &DuhemModel, s1: f64, s2: f64, xi: f64, lambda: f64) -> (f64, f64) {
    let d = s1 - s2;
    let r1 = d * (model.f1(s1, xi) - model.f1(s2, xi)) - lambda * d * d;
    let r2 = -d * (model.f2(s1, xi) - model.f2(s2, xi)) - lambda * d * d;
    (r1, r2)
}

/// Grid check of the one-sided Lipschitz conditions that guarantee existence
/// of solutions, with `λ1 = λ2 = lambda_bound`.
///
/// For every ξ on the grid and every pair `σ1 ≠ σ2`, the normalized residuals
/// `Δf1/Δσ − λ` and `−Δf2/Δσ − λ` must be non-positive. The report's notes carry
/// the largest observed one-sided slope (the smallest admissible λ).
pub fn check_existence_conditions(
    model: &DuhemModel,
    rect: &Rect,
    resolution: usize,
    lambda_bound: f64,
) -> Result<VerificationReport> {
    if !model.domain().contains_rect(rect) {
        return Err(Error::GridOutsideDomain);
    }
    let sigmas: Vec<f64> = rect.sigma_axis(resolution).collect();
    let mut report = VerificationReport::builder("existence_conditions", 1e-9 * (1.0 + lambda_bound));
    let mut worst_slope = f64::NEG_INFINITY;
    for xi in rect.xi_axis(resolution) {
        let f1: Vec<f64> = sigmas.iter().map(|&s| model.f1(s, xi)).collect();
        let f2: Vec<f64> = sigmas.iter().map(|&s| model.f2(s, xi)).collect();
        for i in 0..sigmas.len() {
            for j in (i + 1)..sigmas.len() {
                let d = sigmas[i] - sigmas[j];
                if d == 0.0 {
                    continue;
                }
                let slope1 = (f1[i] - f1[j]) / d;
                let slope2 = -(f2[i] - f2[j]) / d;
                let s = slope1.max(slope2);
                worst_slope = worst_slope.max(s);
                report.observe(
                    s - lambda_bound,
                    Location::Pair {
                        sigma1: sigmas[i],
                        sigma2: sigmas[j],
                        xi,
                    },
                );
            }
        }
    }
    report.note(format!("smallest admissible lambda on grid: {worst_slope:.6e}"));
    Ok(report.finish())
}

/// Finite-difference probe for continuous differentiability of `f1` and `f2`:
/// forward and backward difference quotients in σ and ξ must agree to within
/// `tol·(1 + |derivative|)`. Catches kinks at grid points.
pub fn smoothness_probe(model: &DuhemModel, rect: &Rect, resolution: usize, tol: f64) -> VerificationReport {
    let mut report = VerificationReport::builder("smoothness", tol);
    let h = 1e-6;
    for xi in rect.xi_axis(resolution) {
        for sigma in rect.sigma_axis(resolution) {
            for increasing in [true, false] {
                let f = |s: f64, x: f64| if increasing { model.f1(s, x) } else { model.f2(s, x) };
                let c = f(sigma, xi);
                let hs = h * (1.0 + sigma.abs());
                let hx = h * (1.0 + xi.abs());
                let inside = model.contains(sigma - hs, xi) && model.contains(sigma + hs, xi);
                if inside {
                    let fwd = (f(sigma + hs, xi) - c) / hs;
                    let bwd = (c - f(sigma - hs, xi)) / hs;
                    report.observe(
                        (fwd - bwd).abs() / (1.0 + fwd.abs().max(bwd.abs())),
                        Location::Phase { sigma, xi },
                    );
                }
                let fwd = (f(sigma, xi + hx) - c) / hx;
                let bwd = (c - f(sigma, xi - hx)) / hx;
                report.observe(
                    (fwd - bwd).abs() / (1.0 + fwd.abs().max(bwd.abs())),
                    Location::Phase { sigma, xi },
                );
            }
        }
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Anhysteresis, Domain};

    fn dahl() -> DuhemModel {
        DuhemModel::dahl(1.5, 0.75, 1.0).unwrap()
    }

    #[test]
    fn dahl_ramp_matches_closed_form() {
        let input = InputSignal::ramp(0.0, 1.0, 1.0).unwrap();
        let tr = simulate(&dahl(), &input, 0.0, 1e-3).unwrap();
        let exact = 0.75 * (1.0 - (-2.0f64).exp());
        assert!((tr.last().y - exact).abs() < 1e-12);
        assert!((exact - 0.6484986).abs() < 1e-7);
        assert_eq!(tr.samples[0], Sample { t: 0.0, u: 0.0, y: 0.0 });
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn constant_input_holds_output() {
        let input = InputSignal::new(vec![(0.0, 0.3), (1.0, 0.3), (4.0, 0.3)]).unwrap();
        for m in [dahl(), DuhemModel::exp_example_default()] {
            let tr = simulate(&m, &input, 0.2, 1e-3).unwrap();
            assert!(tr.samples.iter().all(|s| s.y == 0.2));
            assert_eq!(tr.breakpoint_index, vec![0, 1, 2]);
        }
    }

    #[test]
    fn bouc_wen_saturates_at_cube_root_half() {
        let m = DuhemModel::bouc_wen(1.0, 1.0, 1.0, 3.0).unwrap();
        let input = InputSignal::ramp(0.0, 10.0, 10.0).unwrap();
        let tr = simulate(&m, &input, 0.0, 1e-3).unwrap();
        assert!((tr.last().y - 0.5f64.cbrt()).abs() < 1e-9);
        assert!((tr.last().y - 0.7937005).abs() < 1e-7);
    }

    #[test]
    fn time_stamps_are_monotone_and_hit_breakpoints() {
        let input = InputSignal::triangle(0.0, 1.0, 2.0, 2).unwrap();
        let tr = simulate_with(&dahl(), &input, 0.1, StepRule::Auto).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        for (s, &(t, u)) in tr.at_breakpoints().zip(input.breakpoints()) {
            assert_eq!((s.t, s.u), (t, u));
        }
    }

    #[test]
    fn rejects_bad_initial_state_and_step() {
        let input = InputSignal::ramp(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            simulate(&dahl(), &input, 0.75, 1e-3),
            Err(Error::InvalidInitialState { .. })
        ));
        assert!(matches!(
            simulate(&dahl(), &input, 0.0, 0.0),
            Err(Error::InvalidStep(_))
        ));
        assert!(simulate(&dahl(), &input, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn domain_exit_is_reported_not_clamped() {
        // slope 1 everywhere, domain (-1, 1): leaves the band at u = 1 - y0
        let m = DuhemModel::custom(
            "unit",
            |_, _| 1.0,
            |_, _| 1.0,
            Domain::Band { lo: -1.0, hi: 1.0 },
            Anhysteresis::Implicit,
        );
        let input = InputSignal::ramp(0.0, 3.0, 3.0).unwrap();
        match simulate(&m, &input, 0.0, 1e-2) {
            Err(Error::DomainExit { u, y, .. }) => {
                assert!(y >= 1.0 && (u - 1.0).abs() < 2e-2);
            }
            other => panic!("expected domain exit, got {other:?}"),
        }
    }

    #[test]
    fn existence_conditions_dahl() {
        let m = dahl();
        let rect = m.domain().working_rect(-2.0, 2.0, 1e-3, 0.0);
        let r = check_existence_conditions(&m, &rect, 40, 1.5 / 0.75).unwrap();
        assert!(r.passed, "{r}");
        // f1 is affine with slope -ρ/Fc, so the one-sided constant is -2 < ρ/Fc
        assert!((r.worst_violation - (-2.0 - 2.0)).abs() < 1e-9);
        let outside = Rect::new(-0.8, 0.8, 0.0, 1.0);
        assert_eq!(
            check_existence_conditions(&m, &outside, 10, 2.0),
            Err(Error::GridOutsideDomain)
        );
    }

    #[test]
    fn existence_degenerate_pair_is_zero() {
        let m = DuhemModel::bouc_wen(1.0, 1.0, 1.0, 3.0).unwrap();
        assert_eq!(existence_residuals(&m, 0.4, 0.4, 1.0, 6.0), (0.0, 0.0));
    }

    #[test]
    fn existence_conditions_bouc_wen() {
        let m = DuhemModel::bouc_wen(1.0, 1.0, 1.0, 3.0).unwrap();
        let rect = Rect::new(-1.0, 1.0, -1.0, 1.0);
        let r = check_existence_conditions(&m, &rect, 60, 6.0).unwrap();
        assert!(r.passed, "{r}");
        // brute-force bound on |∂f/∂σ| over [-1, 1]
        let max_slope = Rect::axis(-1.0, 1.0, 2001)
            .map(|s| {
                let h = 1e-6;
                ((m.f1(s + h, 0.0) - m.f1(s - h, 0.0)) / (2.0 * h))
                    .abs()
                    .max(((m.f2(s + h, 0.0) - m.f2(s - h, 0.0)) / (2.0 * h)).abs())
            })
            .fold(0.0, f64::max);
        assert!(max_slope <= 6.0 + 1e-6 && max_slope > 5.9, "{max_slope}");
    }

    #[test]
    fn smoothness_probe_flags_kinks() {
        let rect = Rect::new(-0.5, 0.5, -1.0, 1.0);
        for m in [dahl(), DuhemModel::bouc_wen(1.0, 1.0, 1.0, 3.0).unwrap()] {
            let r = smoothness_probe(&m, &rect, 11, 1e-3);
            assert!(r.passed, "{r}");
        }
        let kinked = DuhemModel::custom(
            "abs",
            |s: f64, _| s.abs(),
            |s: f64, _| -s.abs(),
            Domain::Plane,
            Anhysteresis::Implicit,
        );
        assert!(!smoothness_probe(&kinked, &rect, 11, 1e-3).passed);
    }
}
