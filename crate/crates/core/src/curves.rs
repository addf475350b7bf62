//! Anhysteresis, traversing and intersecting functions of a Duhem operator.
//!
//! * The anhysteresis function `f_an` is the zero set `F(σ, ξ) = 0`, where the
//!   two slopes agree.
//! * The traversing curve `ω(·, σ, ξ)` through a phase point is what the output
//!   does if the input is driven monotonically away from `ξ`: rightwards along
//!   `f1`, leftwards along `f2`.
//! * The intersecting function `Λ(σ, ξ)` is the input value at which that curve
//!   meets the anhysteresis curve. Points above the curve ride left to meet it,
//!   points below ride right.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DuhemModel, Rect};
use crate::numeric::{bisect, hermite, rk4_step};
use crate::report::{Location, VerificationReport};

/// Default input-space step for traversing curves.
pub const CURVE_STEP: f64 = 1e-3;

/// Residual bound on `F(f_an(ξ), ξ)` for numerically solved anhysteresis points.
pub const ANHYSTERESIS_TOL: f64 = 1e-10;

/// Residual bound on `ω(Λ) − f_an(Λ)`.
pub const INTERSECTION_TOL: f64 = 1e-9;

/// Bracket doublings allowed when searching for Λ.
pub const MAX_EXPANSIONS: u32 = 60;

/// A state `(σ, ξ) = (output, input)` in the hysteresis phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub sigma: f64,
    pub xi: f64,
}

impl PhasePoint {
    pub fn new(sigma: f64, xi: f64) -> Self {
        PhasePoint { sigma, xi }
    }
}

/// `f_an(ξ)`: the explicit form when the model declares one, otherwise the
/// root of `F(·, ξ)` found by geometric bracket expansion from `σ = 0` and
/// bisection.
pub fn anhysteresis(model: &DuhemModel, xi: f64) -> Result<f64> {
    match model.anhysteresis_kind().explicit(xi) {
        Some(v) => Ok(v),
        None => anhysteresis_implicit(model, xi),
    }
}

/// Numerical root of `F(·, ξ)` irrespective of any declared closed form.
pub fn anhysteresis_implicit(model: &DuhemModel, xi: f64) -> Result<f64> {
    let f = |s: f64| model.odd_part(s, xi);
    let f0 = f(0.0);
    if f0.abs() <= ANHYSTERESIS_TOL {
        return Ok(0.0);
    }
    let (lo_bound, hi_bound) = model.domain().sigma_bounds();
    let shrink = |b: f64| {
        if b.is_finite() {
            b - b.signum() * 1e-12 * b.abs().max(1.0)
        } else {
            b
        }
    };
    let (lo_bound, hi_bound) = (shrink(lo_bound), shrink(hi_bound));

    let mut width: f64 = 1.0;
    for _ in 0..=MAX_EXPANSIONS {
        let hi = width.min(hi_bound);
        let lo = (-width).max(lo_bound);
        for end in [hi, lo] {
            let fe = f(end);
            if fe == 0.0 {
                return Ok(end);
            }
            if fe.signum() != f0.signum() && fe.is_finite() {
                let root = bisect(f, 0.0, end, 0.0, 0.1 * ANHYSTERESIS_TOL)?;
                if f(root).abs() <= ANHYSTERESIS_TOL {
                    return Ok(root);
                }
                return Err(Error::NoAnhysteresis { xi });
            }
        }
        if hi >= hi_bound && lo <= lo_bound {
            break;
        }
        width *= 2.0;
    }
    Err(Error::NoAnhysteresis { xi })
}

/// Dense samples of one branch of a traversing curve, ordered from the origin
/// outward. Slopes are the exact vector-field values, so interpolation is
/// cubic Hermite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    /// +1 for the right (f1) branch, −1 for the left (f2) branch.
    pub direction: f64,
}

impl Branch {
    fn start(model: &DuhemModel, origin: PhasePoint, direction: f64) -> Self {
        let mut b = Branch {
            taus: Vec::new(),
            values: Vec::new(),
            slopes: Vec::new(),
            direction,
        };
        b.push(model, origin.xi, origin.sigma);
        b
    }

    fn push(&mut self, model: &DuhemModel, tau: f64, y: f64) {
        self.taus.push(tau);
        self.values.push(y);
        self.slopes.push(slope(model, self.direction, y, tau));
    }

    /// Input value of the far end.
    pub fn end(&self) -> f64 {
        self.taus[self.taus.len() - 1]
    }

    pub fn end_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Interpolated value, `None` outside the sampled range.
    pub fn eval(&self, tau: f64) -> Option<f64> {
        let d = self.direction;
        let s = d * (tau - self.taus[0]);
        let s_end = d * (self.end() - self.taus[0]);
        if !(0.0..=s_end).contains(&s) {
            return None;
        }
        let i = self.taus.partition_point(|&t| d * (t - self.taus[0]) <= s);
        if i == 0 {
            return Some(self.values[0]);
        }
        if i >= self.taus.len() {
            return Some(self.end_value());
        }
        let (a, b) = (i - 1, i);
        Some(hermite(
            self.taus[a],
            self.values[a],
            self.slopes[a],
            self.taus[b],
            self.values[b],
            self.slopes[b],
            tau,
        ))
    }
}

#[inline]
fn slope(model: &DuhemModel, direction: f64, y: f64, tau: f64) -> f64 {
    if direction > 0.0 {
        model.f1(y, tau)
    } else {
        model.f2(y, tau)
    }
}

/// Which branch of a traversing curve stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Where a branch left the model domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub side: Side,
    /// Last input value reached inside the domain.
    pub tau: f64,
}

/// The traversing curve `ω(·, σ, ξ)` sampled on `[tau_min, tau_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraversingCurve {
    pub origin: PhasePoint,
    pub left: Branch,
    pub right: Branch,
    pub truncated: Vec<Truncation>,
}

impl TraversingCurve {
    /// `ω(τ)`; `None` outside the sampled range.
    pub fn eval(&self, tau: f64) -> Option<f64> {
        if tau >= self.origin.xi {
            self.right.eval(tau)
        } else {
            self.left.eval(tau)
        }
    }

    /// Sampled input range `[left end, right end]`.
    pub fn range(&self) -> (f64, f64) {
        (self.left.end(), self.right.end())
    }

    pub fn is_truncated(&self) -> bool {
        !self.truncated.is_empty()
    }

    /// `(τ, ω(τ))` pairs, left end to right end.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self
            .left
            .taus
            .iter()
            .zip(&self.left.values)
            .skip(1)
            .rev()
            .map(|(&t, &y)| (t, y))
            .collect();
        pts.extend(self.right.taus.iter().zip(&self.right.values).map(|(&t, &y)| (t, y)));
        pts
    }
}

/// Integrates one branch from the origin to `end`. Returns the branch and the
/// exit point if it left the domain first.
fn integrate_branch(model: &DuhemModel, origin: PhasePoint, end: f64, step: f64) -> (Branch, Option<f64>) {
    let direction = if end >= origin.xi { 1.0 } else { -1.0 };
    let mut branch = Branch::start(model, origin, direction);
    let len = (end - origin.xi).abs();
    if len == 0.0 {
        return (branch, None);
    }
    let n = ((len / step).ceil() as usize).max(1);
    let h = direction * len / n as f64;
    let (mut tau, mut y) = (origin.xi, origin.sigma);
    for k in 1..=n {
        let y_next = rk4_step(|s, x| slope(model, direction, s, x), tau, y, h);
        let tau_next = if k == n { end } else { origin.xi + k as f64 * h };
        if !model.contains(y_next, tau_next) {
            return (branch, Some(tau));
        }
        tau = tau_next;
        y = y_next;
        branch.push(model, tau, y);
    }
    (branch, None)
}

/// Traversing curve through `p` on `[tau_min, tau_max]` with the default step.
pub fn traversing_curve(model: &DuhemModel, p: PhasePoint, tau_min: f64, tau_max: f64) -> Result<TraversingCurve> {
    traversing_curve_with(model, p, tau_min, tau_max, CURVE_STEP)
}

/// Traversing curve through `p`: the right branch solves `dy/dτ = f1` from
/// `(ξ, σ)` up to `tau_max`, the left branch solves `dy/dτ = f2` down to
/// `tau_min`. A branch that leaves the domain is cut short and recorded in
/// `truncated`.
pub fn traversing_curve_with(
    model: &DuhemModel,
    p: PhasePoint,
    tau_min: f64,
    tau_max: f64,
    step: f64,
) -> Result<TraversingCurve> {
    if !model.contains(p.sigma, p.xi) {
        return Err(Error::OutsideDomain {
            sigma: p.sigma,
            xi: p.xi,
        });
    }
    if !(tau_min <= p.xi && p.xi <= tau_max) {
        return Err(Error::InvalidInput(format!(
            "traversing range [{tau_min}, {tau_max}] does not contain xi = {}",
            p.xi
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidStep(step));
    }
    let (right, right_exit) = integrate_branch(model, p, tau_max, step);
    let (left, left_exit) = integrate_branch(model, p, tau_min, step);
    let mut truncated = Vec::new();
    if let Some(tau) = left_exit {
        truncated.push(Truncation { side: Side::Left, tau });
    }
    if let Some(tau) = right_exit {
        truncated.push(Truncation { side: Side::Right, tau });
    }
    Ok(TraversingCurve {
        origin: p,
        left,
        right,
        truncated,
    })
}

/// `Λ(σ, ξ)` together with the branch of the traversing curve from `ξ` to `Λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Intersection {
    pub lambda: f64,
    pub branch: Branch,
}

/// `Λ(p)` with the default step.
pub fn intersect_lambda(model: &DuhemModel, p: PhasePoint) -> Result<f64> {
    locate_intersection(model, p, CURVE_STEP).map(|i| i.lambda)
}

/// Finds where the traversing curve through `p` meets the anhysteresis curve.
///
/// The ride goes left (along `f2`) when `σ ≥ f_an(ξ)` and right (along `f1`)
/// otherwise. The search window starts at `1 + |ξ|` and doubles up to
/// [`MAX_EXPANSIONS`] times; the crossing step is refined by bisection on the
/// RK4 substep length until `|ω(Λ) − f_an(Λ)| ≤ 1e-9`.
pub fn locate_intersection(model: &DuhemModel, p: PhasePoint, step: f64) -> Result<Intersection> {
    let PhasePoint { sigma, xi } = p;
    if !model.contains(sigma, xi) {
        return Err(Error::OutsideDomain { sigma, xi });
    }
    let fail = |reason: String| Error::NoIntersection { sigma, xi, reason };
    let gap = sigma - anhysteresis(model, xi)?;
    let direction = if gap >= 0.0 { -1.0 } else { 1.0 };
    let mut branch = Branch::start(model, p, direction);
    if gap == 0.0 {
        return Ok(Intersection { lambda: xi, branch });
    }
    let field = |s: f64, x: f64| slope(model, direction, s, x);

    let (mut tau, mut y) = (xi, sigma);
    let mut width = 1.0 + xi.abs();
    let mut reached = 0.0;
    for _ in 0..=MAX_EXPANSIONS {
        // far windows get coarser steps so the budget stays bounded
        let h = step.max((width - reached) / 100_000.0);
        while reached < width {
            let hs = h.min(width - reached);
            let tau_next = tau + direction * hs;
            let y_next = rk4_step(field, tau, y, direction * hs);
            if !model.contains(y_next, tau_next) {
                return Err(fail(format!("traversing curve left the domain at tau = {tau_next}")));
            }
            let phi = y_next - anhysteresis(model, tau_next)?;
            if phi == 0.0 || phi.signum() != gap.signum() {
                let residual = |s: f64| {
                    rk4_step(field, tau, y, direction * s)
                        - anhysteresis(model, tau + direction * s).unwrap_or(f64::NAN)
                };
                let s = bisect(residual, 0.0, hs, 0.0, 1e-3 * INTERSECTION_TOL)?;
                let r = residual(s);
                if r.is_nan() || r.abs() > INTERSECTION_TOL {
                    return Err(fail(format!("crossing residual {r:e} above tolerance")));
                }
                let lambda = tau + direction * s;
                if s > 0.0 {
                    branch.push(model, lambda, rk4_step(field, tau, y, direction * s));
                }
                return Ok(Intersection { lambda, branch });
            }
            tau = tau_next;
            y = y_next;
            reached += hs;
            branch.push(model, tau, y);
        }
        width *= 2.0;
    }
    Err(fail(format!("no crossing within {MAX_EXPANSIONS} bracket doublings")))
}

/// Grid certificate for the hypotheses guaranteeing an intersecting function:
/// `f1(σ, ξ) > f_an′(ξ) + ε` above the anhysteresis curve and
/// `f2(σ, ξ) > f_an′(ξ) + ε` below it, with `f_an′` by central difference.
///
/// Violations are `f_an′ + ε − f_i`. A decreasing `f_an` anywhere on the ξ-axis
/// also fails the check; a constant `f_an` passes with a note.
pub fn check_lemma1(model: &DuhemModel, rect: &Rect, epsilon: f64, resolution: usize) -> Result<VerificationReport> {
    if !model.domain().contains_rect(rect) {
        return Err(Error::GridOutsideDomain);
    }
    let mut report = VerificationReport::builder("lemma1_hypotheses", 0.0);
    if model.anhysteresis_kind().is_constant() {
        report.note("constant-f_an mode: f_an is constant rather than strictly increasing");
    }
    let xis: Vec<f64> = rect.xi_axis(resolution).collect();
    let mut fan = Vec::with_capacity(xis.len());
    for &xi in &xis {
        let h = 1e-5 * (1.0 + xi.abs());
        let d = (anhysteresis(model, xi + h)? - anhysteresis(model, xi - h)?) / (2.0 * h);
        fan.push((anhysteresis(model, xi)?, d));
    }
    if !model.anhysteresis_kind().is_constant() {
        for (w, x) in fan.windows(2).zip(&xis) {
            if w[1].0 <= w[0].0 {
                report.observe(
                    w[0].0 - w[1].0 + f64::MIN_POSITIVE,
                    Location::Phase { sigma: w[0].0, xi: *x },
                );
                report.note(format!("f_an not strictly increasing near xi = {x}"));
            }
        }
    }
    let mut worst_margin = f64::INFINITY;
    for (&xi, &(f_an, df_an)) in xis.iter().zip(&fan) {
        for sigma in rect.sigma_axis(resolution) {
            let f = if sigma > f_an {
                model.f1(sigma, xi)
            } else if sigma < f_an {
                model.f2(sigma, xi)
            } else {
                continue;
            };
            let margin = f - df_an - epsilon;
            worst_margin = worst_margin.min(margin);
            report.observe(-margin, Location::Phase { sigma, xi });
        }
    }
    report.note(format!("worst margin f - f_an' - eps = {worst_margin:.6e}"));
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Anhysteresis, Domain};

    fn dahl() -> DuhemModel {
        DuhemModel::dahl(1.5, 0.75, 1.0).unwrap()
    }

    #[test]
    fn dahl_anhysteresis_is_zero() {
        let m = dahl();
        for xi in [-3.0, 0.0, 2.5] {
            assert_eq!(anhysteresis(&m, xi).unwrap(), 0.0);
            assert!(anhysteresis_implicit(&m, xi).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn bouc_wen_anhysteresis_by_bisection() {
        let m = DuhemModel::bouc_wen(1.0, 1.0, 1.0, 3.0).unwrap();
        for xi in [-2.0, 0.7] {
            let s = anhysteresis_implicit(&m, xi).unwrap();
            assert!(m.odd_part(s, xi).abs() <= ANHYSTERESIS_TOL);
            assert!(s.abs() < 1e-3);
        }
    }

    #[test]
    fn exp_example_anhysteresis_is_xi_over_slope() {
        let m = DuhemModel::exp_example_default();
        assert!((anhysteresis(&m, 1.2).unwrap() - 1.0).abs() < 1e-15);
        let s = anhysteresis_implicit(&m, 1.2).unwrap();
        assert!((s - 1.0).abs() < 1e-9, "{s}");
        // the exact slope is 1/1.2, not the rounded 0.83
        assert!((anhysteresis(&m, 3.0).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn anhysteresis_missing_is_an_error() {
        let m = DuhemModel::custom("no_fan", |_, _| 2.0, |_, _| 1.0, Domain::Plane, Anhysteresis::Implicit);
        assert_eq!(anhysteresis(&m, 0.0), Err(Error::NoAnhysteresis { xi: 0.0 }));
    }

    #[test]
    fn traversing_curve_dahl_closed_form() {
        let m = dahl();
        let c = traversing_curve(&m, PhasePoint::new(0.0, 0.0), -1.0, 1.0).unwrap();
        let exact = 0.75 * (1.0 - (-2.0f64).exp());
        assert!((c.eval(1.0).unwrap() - exact).abs() < 1e-12);
        assert!((c.eval(-1.0).unwrap() + exact).abs() < 1e-12);
        assert_eq!(c.eval(0.0), Some(0.0));
        assert!(c.eval(1.5).is_none());
        assert!(!c.is_truncated());
        // interpolation between nodes
        let tau: f64 = 0.123_456_7;
        let e = 0.75 - 0.75 * (-2.0 * tau).exp();
        assert!((c.eval(tau).unwrap() - e).abs() < 1e-13);
    }

    #[test]
    fn traversing_curve_truncates_on_domain_exit() {
        let m = DuhemModel::custom(
            "unit",
            |_, _| 1.0,
            |_, _| 1.0,
            Domain::Band { lo: -1.0, hi: 1.0 },
            Anhysteresis::Zero,
        );
        let c = traversing_curve(&m, PhasePoint::new(0.0, 0.0), -3.0, 3.0).unwrap();
        assert_eq!(c.truncated.len(), 2);
        let (lo, hi) = c.range();
        assert!(lo > -1.0 && hi < 1.0 && hi > 0.99);
        assert!(traversing_curve(&m, PhasePoint::new(0.0, 0.0), 0.5, 3.0).is_err());
        assert!(traversing_curve(&m, PhasePoint::new(2.0, 0.0), -1.0, 1.0).is_err());
    }

    #[test]
    fn lambda_dahl_matches_log_formula() {
        let m = dahl();
        let l = intersect_lambda(&m, PhasePoint::new(0.375, 1.0)).unwrap();
        let exact = 1.0 + 0.5 * (0.75f64 / 1.125).ln();
        assert!((l - exact).abs() < 1e-10, "{l} vs {exact}");
        assert!((exact - 0.7972674).abs() < 1e-7);
        let l = intersect_lambda(&m, PhasePoint::new(-0.375, 1.0)).unwrap();
        assert!((l - (2.0 - exact)).abs() < 1e-10);
        assert_eq!(intersect_lambda(&m, PhasePoint::new(0.0, 0.4)).unwrap(), 0.4);
    }

    #[test]
    fn lambda_direction_exp_example() {
        let m = DuhemModel::exp_example_default();
        let p = PhasePoint::new(2.0, 1.0); // above xi/1.2
        let l = intersect_lambda(&m, p).unwrap();
        assert!(l < p.xi);
        // brute-force scan of ω − f_an for the sign change
        let c = traversing_curve(&m, p, -5.0, p.xi).unwrap();
        let mut crossing = None;
        let mut tau = p.xi;
        while tau > -5.0 {
            let next = tau - 1e-3;
            let a = c.eval(tau).unwrap() - tau / 1.2;
            let b = c.eval(next).unwrap() - next / 1.2;
            if a > 0.0 && b <= 0.0 {
                crossing = Some((tau, next));
                break;
            }
            tau = next;
        }
        let (hi, lo) = crossing.expect("scan found a crossing");
        assert!(lo <= l && l <= hi);
        let below = intersect_lambda(&m, PhasePoint::new(-1.0, 1.0)).unwrap();
        assert!(below > 1.0);
    }

    #[test]
    fn lambda_outside_domain_is_an_error() {
        assert!(matches!(
            intersect_lambda(&dahl(), PhasePoint::new(0.9, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn lambda_failure_when_curves_never_meet() {
        // slopes are both zero: the traversing curve is flat and never reaches f_an
        let m = DuhemModel::custom("flat", |_, _| 0.0, |_, _| 0.0, Domain::Plane, Anhysteresis::Zero);
        assert!(matches!(
            intersect_lambda(&m, PhasePoint::new(1.0, 0.0)),
            Err(Error::NoIntersection { .. })
        ));
    }

    #[test]
    fn intersection_hypotheses_dahl_on_band() {
        let m = dahl();
        let rect = Rect::new(-0.74, 0.74, -5.0, 5.0);
        let r = check_lemma1(&m, &rect, 0.01, 200).unwrap();
        assert!(r.passed, "{r}");
        assert!(r.notes.iter().any(|n| n.contains("constant-f_an")));
    }

    #[test]
    fn intersection_hypotheses_vacuous_on_the_curve() {
        let rect = Rect::new(0.0, 0.0, -5.0, 5.0);
        let r = check_lemma1(&dahl(), &rect, 0.01, 50).unwrap();
        assert!(r.passed);
        assert_eq!(r.samples_checked, 0);
    }

    #[test]
    fn intersection_hypotheses_exp_example_margin() {
        let m = DuhemModel::exp_example_default();
        let rect = Rect::new(-5.0, 5.0, -5.0, 5.0);
        let r = check_lemma1(&m, &rect, 0.0, 200).unwrap();
        // worst point is a corner: e^{-5.5} + 0.83 - 1/1.2
        let expected = (-5.5f64).exp() + 0.83 - 1.0 / 1.2;
        assert!((-r.worst_violation - expected).abs() < 1e-8, "{r}");
        assert!(check_lemma1(&m, &rect, 5e-4, 200).unwrap().passed);
        assert!(
            check_lemma1(&m, &Rect::new(-4.0, 4.0, -4.0, 4.0), 1e-3, 200)
                .unwrap()
                .passed
        );
    }
}
