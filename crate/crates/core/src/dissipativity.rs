//! Checks of the clockwise dissipation inequality `dH/dt ≤ y·u̇` and of the
//! sign condition on `F` that makes it hold, plus supply-integral and loop
//! orientation diagnostics for simulated trajectories.

use serde::Serialize;

use crate::curves::{anhysteresis, PhasePoint, CURVE_STEP};
use crate::error::{Error, Result};
use crate::model::{DuhemModel, Rect};
use crate::operator::{simulate, Trajectory};
use crate::report::{Location, VerificationReport};
use crate::signal::InputSignal;
use crate::storage::{storage_cw_with, StorageOptions, DEFAULT_QUAD_TOL};

/// Half-width of the band around the anhysteresis curve excluded from the
/// strict `F < 0` test.
pub const CURVE_EXCLUSION: f64 = 1e-6;

/// Margin required for the strict inequality `F < 0` away from the curve.
pub const STRICT_MARGIN: f64 = 1e-12;

/// Grid check that `F(σ, ξ) ≥ 0` on and below the anhysteresis curve and
/// `F(σ, ξ) < 0` above it.
///
/// Above the curve (beyond [`CURVE_EXCLUSION`]) the violation is
/// `F + STRICT_MARGIN`; on or below it, `−F − STRICT_MARGIN`.
pub fn check_assumption_a(model: &DuhemModel, rect: &Rect, resolution: usize) -> Result<VerificationReport> {
    if !model.domain().contains_rect(rect) {
        return Err(Error::GridOutsideDomain);
    }
    let mut report = VerificationReport::builder("assumption_a", 0.0);
    for xi in rect.xi_axis(resolution) {
        let f_an = anhysteresis(model, xi)?;
        for sigma in rect.sigma_axis(resolution) {
            let f = model.odd_part(sigma, xi);
            let violation = if sigma <= f_an {
                -f - STRICT_MARGIN
            } else if sigma > f_an + CURVE_EXCLUSION {
                f + STRICT_MARGIN
            } else {
                continue;
            };
            report.observe(violation, Location::Phase { sigma, xi });
        }
    }
    Ok(report.finish())
}

/// Where the supply rate `y·u̇` is sampled against the difference quotient
/// `(H_{i+1} − H_i)/Δt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    /// `y` averaged over the step. The quotient approximates `dH/dt` at the
    /// step midpoint, so the mismatch is second order in the step.
    Centered,
    /// `y` at the left sample: a test of the right derivative.
    Forward,
    /// `y` at the right sample: a test of the left derivative.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationOptions {
    /// Input-space integration step.
    pub step: f64,
    /// Defaults to `1e-6 + 10·step`.
    pub tol: Option<f64>,
    pub quad_tol: f64,
    pub curve_step: f64,
    pub difference: Difference,
}

impl DissipationOptions {
    pub fn new(step: f64) -> Self {
        DissipationOptions {
            step,
            tol: None,
            quad_tol: DEFAULT_QUAD_TOL,
            curve_step: CURVE_STEP,
            difference: Difference::Centered,
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(1e-6 + 10.0 * self.step)
    }
}

impl Default for DissipationOptions {
    fn default() -> Self {
        Self::new(1e-3)
    }
}

/// `H(y(t), u(t))` at every sample of a trajectory.
pub fn storage_along(model: &DuhemModel, tr: &Trajectory, opts: &StorageOptions) -> Result<Vec<f64>> {
    tr.samples
        .iter()
        .map(|s| storage_cw_with(model, PhasePoint::new(s.y, s.u), opts).map(|e| e.value))
        .collect()
}

/// Simulates `input` from `y0` and checks `ΔH/Δt ≤ y·u̇ + tol` over every
/// integration step, with `y` sampled as set by `opts.difference`.
pub fn verify_dissipation(
    model: &DuhemModel,
    input: &InputSignal,
    y0: f64,
    opts: &DissipationOptions,
) -> Result<VerificationReport> {
    let tr = simulate(model, input, y0, opts.step)?;
    let storage_opts = StorageOptions {
        quad_tol: opts.quad_tol,
        curve_step: opts.curve_step,
    };
    let h = storage_along(model, &tr, &storage_opts)?;
    Ok(dissipation_report(&tr, &h, opts.tolerance(), opts.difference))
}

/// The difference-quotient check on a precomputed storage series.
pub fn dissipation_report(tr: &Trajectory, h: &[f64], tol: f64, difference: Difference) -> VerificationReport {
    let name = match difference {
        Difference::Centered => "dissipation",
        Difference::Forward => "dissipation_forward",
        Difference::Backward => "dissipation_backward",
    };
    let mut report = VerificationReport::builder(name, tol);
    let s = &tr.samples;
    for i in 0..s.len().saturating_sub(1) {
        let dt = s[i + 1].t - s[i].t;
        if dt <= 0.0 {
            continue;
        }
        let u_dot = (s[i + 1].u - s[i].u) / dt;
        let y = match difference {
            Difference::Centered => 0.5 * (s[i].y + s[i + 1].y),
            Difference::Forward => s[i].y,
            Difference::Backward => s[i + 1].y,
        };
        report.observe((h[i + 1] - h[i]) / dt - y * u_dot, Location::Time { t: s[i].t });
    }
    report.finish()
}

/// Running supply `∫₀^t y·u̇ dt` (trapezoid in `u`) and its running minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupplySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub running_min: Vec<f64>,
}

impl SupplySeries {
    pub fn min(&self) -> f64 {
        self.running_min.last().copied().unwrap_or(0.0)
    }

    /// Value at the sample whose time is within `1e-9·(1+|t|)` of `t`.
    pub fn at_time(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&s| s < t - 1e-9 * (1.0 + t.abs()));
        (i < self.times.len() && (self.times[i] - t).abs() <= 1e-9 * (1.0 + t.abs())).then(|| self.values[i])
    }
}

pub fn cw_supply_integral(tr: &Trajectory) -> Result<SupplySeries> {
    let s = &tr.samples;
    if s.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: s.len(),
        });
    }
    let mut values = Vec::with_capacity(s.len());
    let mut running_min = Vec::with_capacity(s.len());
    let (mut acc, mut lo) = (0.0, 0.0f64);
    values.push(0.0);
    running_min.push(0.0);
    for w in s.windows(2) {
        acc += 0.5 * (w[0].y + w[1].y) * (w[1].u - w[0].u);
        lo = lo.min(acc);
        values.push(acc);
        running_min.push(lo);
    }
    Ok(SupplySeries {
        times: s.iter().map(|x| x.t).collect(),
        values,
        running_min,
    })
}

/// Supply gained over each period `[(k−1)P, kP]` of a periodic input.
pub fn cycle_increments(tr: &Trajectory, period: f64) -> Result<Vec<f64>> {
    let supply = cw_supply_integral(tr)?;
    let end = tr.last().t;
    let cycles = (end / period + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(cycles);
    let mut prev = 0.0;
    for k in 1..=cycles {
        let v = supply
            .at_time(k as f64 * period)
            .ok_or_else(|| Error::InvalidInput(format!("no sample at t = {}", k as f64 * period)))?;
        out.push(v - prev);
        prev = v;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
    Degenerate,
}

/// Areas below this magnitude count as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-9;

/// Signed area `∮ y du` of the last closed input cycle: from the previous time
/// the input crossed its final value in the same direction, to the end.
pub fn last_cycle_area(tr: &Trajectory) -> Result<f64> {
    let s = &tr.samples;
    if s.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: s.len(),
        });
    }
    let n = s.len() - 1;
    let target = s[n].u;
    let Some(dir) = s
        .windows(2)
        .rev()
        .map(|w| w[1].u - w[0].u)
        .find(|&du| du != 0.0)
        .map(f64::signum)
    else {
        // the input never moved: a zero-amplitude cycle
        return Ok(0.0);
    };
    let side = |u: f64| dir * (u - target);
    let crossing = (1..n).rev().find(|&j| side(s[j - 1].u) < 0.0 && side(s[j].u) >= 0.0);
    let start = match crossing {
        Some(j) => j,
        // a path that starts on the final level closes there
        None if s[0].u == target => {
            return Ok(s.windows(2).map(|w| 0.5 * (w[0].y + w[1].y) * (w[1].u - w[0].u)).sum());
        }
        None => return Err(Error::NoClosedCycle),
    };
    let (a, b) = (s[start - 1], s[start]);
    let theta = (target - a.u) / (b.u - a.u);
    let y_cross = a.y + theta * (b.y - a.y);

    let mut area = 0.5 * (y_cross + b.y) * (b.u - target);
    for w in s[start..].windows(2) {
        area += 0.5 * (w[0].y + w[1].y) * (w[1].u - w[0].u);
    }
    Ok(area)
}

/// Orientation of the last closed loop in the (u, y) plane: positive
/// `∮ y du` is clockwise.
pub fn loop_orientation(tr: &Trajectory) -> Result<Orientation> {
    let area = last_cycle_area(tr)?;
    Ok(if area.abs() < DEGENERATE_AREA {
        Orientation::Degenerate
    } else if area > 0.0 {
        Orientation::Clockwise
    } else {
        Orientation::Counterclockwise
    })
}
