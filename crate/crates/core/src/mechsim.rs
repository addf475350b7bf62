//! A mass on a spring and viscous damper, sliding with Dahl friction.
//!
//! States are displacement `x1`, velocity `x2` and friction force `x3`:
//!
//! ```text
//! ẋ1 = x2
//! ẋ2 = (F − k·x1 − x3) / m
//! ẋ3 = ρ(1 − x3/Fc)·max(0, x2) + ρ(1 + x3/Fc)·min(0, x2)
//! ```
//!
//! with `F = −d·x2` in both force modes. The Lyapunov candidate is
//! `V = ½k·x1² + ½m·x2² + H(x3)` with `H` the closed-form Dahl storage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{Location, VerificationReport};
use crate::storage::storage_dahl_closed_form;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MechState {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl MechState {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        MechState { x1, x2, x3 }
    }

    fn axpy(self, h: f64, d: MechState) -> MechState {
        MechState::new(self.x1 + h * d.x1, self.x2 + h * d.x2, self.x3 + h * d.x3)
    }
}

/// How the applied force `F` is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceLaw {
    /// No applied force; `d` acts as a viscous damper on the mass.
    #[default]
    Zero,
    /// Velocity feedback `F = −d·x2` on a mass with no spring.
    Feedback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechParams {
    pub m: f64,
    pub d: f64,
    pub k: f64,
    pub rho: f64,
    pub fc: f64,
    #[serde(default)]
    pub force: ForceLaw,
}

impl Default for MechParams {
    fn default() -> Self {
        MechParams {
            m: 1.0,
            d: 0.5,
            k: 1.0,
            rho: 1.5,
            fc: 0.75,
            force: ForceLaw::Zero,
        }
    }
}

impl MechParams {
    pub fn feedback(m: f64, d: f64, rho: f64, fc: f64) -> Self {
        MechParams {
            m,
            d,
            k: 0.0,
            rho,
            fc,
            force: ForceLaw::Feedback,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64, reason: &'static str| {
            Err(Error::InvalidParameter {
                name: name.into(),
                value,
                reason,
            })
        };
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad("m", self.m, "must be positive and finite");
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return bad("d", self.d, "must be non-negative and finite");
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return bad("k", self.k, "must be non-negative and finite");
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho", self.rho, "must be positive and finite");
        }
        if !(self.fc > 0.0 && self.fc.is_finite()) {
            return bad("fc", self.fc, "must be positive and finite");
        }
        if self.force == ForceLaw::Feedback && self.k != 0.0 {
            return bad("k", self.k, "feedback mode has no spring");
        }
        Ok(())
    }

    pub fn applied_force(&self, s: MechState) -> f64 {
        match self.force {
            ForceLaw::Zero => 0.0,
            ForceLaw::Feedback => -self.d * s.x2,
        }
    }

    fn damping_force(&self, s: MechState) -> f64 {
        match self.force {
            ForceLaw::Zero => -self.d * s.x2,
            ForceLaw::Feedback => 0.0,
        }
    }

    pub fn field(&self, s: MechState) -> MechState {
        let x3_dot =
            self.rho * (1.0 - s.x3 / self.fc) * s.x2.max(0.0) + self.rho * (1.0 + s.x3 / self.fc) * s.x2.min(0.0);
        MechState {
            x1: s.x2,
            x2: (self.applied_force(s) + self.damping_force(s) - self.k * s.x1 - s.x3) / self.m,
            x3: x3_dot,
        }
    }

    /// `V = ½k·x1² + ½m·x2² + H(x3)`.
    pub fn lyapunov(&self, s: MechState) -> Result<f64> {
        Ok(
            0.5 * self.k * s.x1 * s.x1
                + 0.5 * self.m * s.x2 * s.x2
                + storage_dahl_closed_form(s.x3, self.rho, self.fc)?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechSeries {
    pub t: Vec<f64>,
    pub states: Vec<MechState>,
    pub v: Vec<f64>,
}

impl MechSeries {
    pub fn last(&self) -> MechState {
        *self.states.last().expect("series holds the initial state")
    }

    pub fn max_abs_x3(&self) -> f64 {
        self.states.iter().fold(0.0, |m, s| m.max(s.x3.abs()))
    }
}

fn rk4(p: &MechParams, s: MechState, h: f64) -> MechState {
    let k1 = p.field(s);
    let k2 = p.field(s.axpy(h / 2.0, k1));
    let k3 = p.field(s.axpy(h / 2.0, k2));
    let k4 = p.field(s.axpy(h, k3));
    MechState {
        x1: s.x1 + h / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
        x2: s.x2 + h / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
        x3: s.x3 + h / 6.0 * (k1.x3 + 2.0 * k2.x3 + 2.0 * k3.x3 + k4.x3),
    }
}

/// Fixed-step RK4 in time. A step over which the velocity changes sign is
/// redone as two half steps, so the kink in `ẋ3` falls near a step boundary.
pub fn simulate_mech(params: &MechParams, init: MechState, horizon: f64, step: f64) -> Result<MechSeries> {
    params.validate()?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidStep(step));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "horizon".into(),
            value: horizon,
            reason: "must be non-negative and finite",
        });
    }
    if init.x3.is_nan() || init.x3.abs() >= params.fc {
        return Err(Error::FrictionSaturated {
            t: 0.0,
            x3: init.x3,
            fc: params.fc,
        });
    }
    let n = (horizon / step).round() as usize;
    let mut t = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut v = Vec::with_capacity(n + 1);
    let mut s = init;
    t.push(0.0);
    states.push(s);
    v.push(params.lyapunov(s)?);
    for i in 1..=n {
        let mut next = rk4(params, s, step);
        if next.x2.signum() != s.x2.signum() && s.x2 != 0.0 && next.x2 != 0.0 {
            let mid = rk4(params, s, step / 2.0);
            next = rk4(params, mid, step / 2.0);
        }
        let ti = i as f64 * step;
        if next.x3.is_nan() || next.x3.abs() >= params.fc || !next.x1.is_finite() || !next.x2.is_finite() {
            return Err(Error::FrictionSaturated {
                t: ti,
                x3: next.x3,
                fc: params.fc,
            });
        }
        s = next;
        t.push(ti);
        states.push(s);
        v.push(params.lyapunov(s)?);
    }
    Ok(MechSeries { t, states, v })
}

/// Forward difference `(V_{i+1} − V_i)/Δt ≤ −d·x2_i² + tol`, together with
/// the rise of `V` over its running minimum staying below `tol`.
pub fn lyapunov_check(series: &MechSeries, params: &MechParams, tol: f64) -> VerificationReport {
    let mut deriv = VerificationReport::builder("lyapunov_derivative", tol);
    for i in 0..series.t.len().saturating_sub(1) {
        let dt = series.t[i + 1] - series.t[i];
        let x2 = series.states[i].x2;
        let rate = (series.v[i + 1] - series.v[i]) / dt;
        deriv.observe(rate + params.d * x2 * x2, Location::Time { t: series.t[i] });
    }
    VerificationReport::all("lyapunov", &[deriv.finish(), v_nonincreasing(series, tol)])
}

/// Largest rise of `V` above its running minimum, compared against `tol`.
pub fn v_nonincreasing(series: &MechSeries, tol: f64) -> VerificationReport {
    let mut report = VerificationReport::builder("v_nonincreasing", tol);
    let mut lo = f64::INFINITY;
    for (&t, &v) in series.t.iter().zip(&series.v) {
        lo = lo.min(v);
        report.observe(v - lo, Location::Time { t });
    }
    report.finish()
}

/// `∫ F·x2 dt ≥ V(T) − V(0) − tol`, with the supplied work integrated by the
/// trapezoid rule.
pub fn passivity_check(series: &MechSeries, params: &MechParams, tol: f64) -> VerificationReport {
    let mut report = VerificationReport::builder("passivity_port", tol);
    let mut work = 0.0;
    for i in 1..series.t.len() {
        let p = |s: MechState| params.applied_force(s) * s.x2;
        work += 0.5 * (p(series.states[i - 1]) + p(series.states[i])) * (series.t[i] - series.t[i - 1]);
        let gain = series.v[i] - series.v[0];
        report.observe(gain - work, Location::Time { t: series.t[i] });
    }
    report.finish()
}
