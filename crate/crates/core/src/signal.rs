//! Piecewise-linear input signals.
//!
//! Every input is absolutely continuous and linear between breakpoints, so the
//! input rate is constant on each segment and the operator never switches
//! between `f1` and `f2` inside a segment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input `u(t)` given by breakpoints `(t_i, u_i)` with `t_0 = 0` and strictly
/// increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSignal {
    points: Vec<(f64, f64)>,
}

/// One linear piece of an [`InputSignal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub u0: f64,
    pub u1: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn rate(&self) -> f64 {
        (self.u1 - self.u0) / (self.t1 - self.t0)
    }

    pub fn du(&self) -> f64 {
        self.u1 - self.u0
    }
}

impl InputSignal {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(t0, _)) = points.first() else {
            return Err(Error::EmptyInput);
        };
        if t0 != 0.0 {
            return Err(Error::InvalidInput(format!("first breakpoint at t = {t0}, expected 0")));
        }
        for (i, &(t, u)) in points.iter().enumerate() {
            if !t.is_finite() || !u.is_finite() {
                return Err(Error::InvalidInput(format!("breakpoint {i} is not finite")));
            }
        }
        if let Some(w) = points.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidInput(format!(
                "times not strictly increasing at t = {}",
                w[1].0
            )));
        }
        Ok(InputSignal { points })
    }

    /// The signal that stays at `u0` on `[0, duration]`.
    pub fn constant(u0: f64, duration: f64) -> Result<Self> {
        Self::new(vec![(0.0, u0), (duration, u0)])
    }

    /// Straight ramp from `from` to `to` over `[0, duration]`.
    pub fn ramp(from: f64, to: f64, duration: f64) -> Result<Self> {
        Self::new(vec![(0.0, from), (duration, to)])
    }

    /// Ramp to `to` over `[0, ramp_time]`, then hold until `horizon`.
    pub fn ramp_and_hold(from: f64, to: f64, ramp_time: f64, horizon: f64) -> Result<Self> {
        let mut pts = vec![(0.0, from), (ramp_time, to)];
        if horizon > ramp_time {
            pts.push((horizon, to));
        }
        Self::new(pts)
    }

    /// Triangle wave starting at `offset`, rising first to `offset + amplitude`,
    /// down to `offset - amplitude` and back, `cycles` times.
    pub fn triangle(offset: f64, amplitude: f64, period: f64, cycles: usize) -> Result<Self> {
        let q = period / 4.0;
        let mut pts = vec![(0.0, offset)];
        for c in 0..cycles {
            let t = c as f64 * period;
            pts.push((t + q, offset + amplitude));
            pts.push((t + 3.0 * q, offset - amplitude));
            pts.push((t + 4.0 * q, offset));
        }
        Self::new(pts)
    }

    /// Sinusoid `offset + amplitude·sin(2πt/period)` approximated by
    /// `segments_per_period` chords per period.
    pub fn sine(offset: f64, amplitude: f64, period: f64, cycles: usize, segments_per_period: usize) -> Result<Self> {
        let n = cycles * segments_per_period;
        let pts = (0..=n)
            .map(|k| {
                let phase = k as f64 / segments_per_period as f64;
                // exact zeros at whole and half periods
                let s = match k % segments_per_period {
                    0 => 0.0,
                    j if 2 * j == segments_per_period => 0.0,
                    _ => (std::f64::consts::TAU * phase).sin(),
                };
                (phase * period, offset + amplitude * s)
            })
            .collect();
        Self::new(pts)
    }

    /// Random piecewise-linear input: `breakpoints` points in total with time
    /// increments drawn from `dt_range` and values within `radius` of `u0`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        u0: f64,
        breakpoints: usize,
        radius: f64,
        dt_range: (f64, f64),
    ) -> Result<Self> {
        let mut pts = Vec::with_capacity(breakpoints.max(1));
        pts.push((0.0, u0));
        let mut t = 0.0;
        for _ in 1..breakpoints {
            t += rng.random_range(dt_range.0..=dt_range.1);
            pts.push((t, u0 + rng.random_range(-radius..=radius)));
        }
        Self::new(pts)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn start_value(&self) -> f64 {
        self.points[0].1
    }

    pub fn end_time(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.points.windows(2).map(|w| Segment {
            t0: w[0].0,
            t1: w[1].0,
            u0: w[0].1,
            u1: w[1].1,
        })
    }

    /// `u(t)` by linear interpolation.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let end = self.end_time();
        if !(0.0..=end).contains(&t) {
            return Err(Error::OutOfSupport { t, start: 0.0, end });
        }
        Ok(interpolate(&self.points, t))
    }

    /// Total variation `Σ |Δu|`.
    pub fn total_variation(&self) -> f64 {
        self.segments().map(|s| s.du().abs()).sum()
    }
}

/// Linear interpolation in a table sorted by its first coordinate; `x` must lie
/// inside the table range.
fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let i = table.partition_point(|p| p.0 <= x);
    if i == 0 {
        return table[0].1;
    }
    if i == table.len() {
        return table[table.len() - 1].1;
    }
    let (x0, y0) = table[i - 1];
    let (x1, y1) = table[i];
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Re-times `input` by the strictly increasing map `warp` (given as breakpoints
/// `(t, s)` with `warp(0) = 0`), returning `v(s) = u(warp⁻¹(s))`.
///
/// The result has a breakpoint at every warped input breakpoint and at every
/// warp knot, so it is exact: the sequence of input values is unchanged, only
/// the times move. The warp must cover the whole input support.
pub fn rate_reparameterize(input: &InputSignal, warp: &[(f64, f64)]) -> Result<InputSignal> {
    let Some(&(w_t0, w_s0)) = warp.first() else {
        return Err(Error::InvalidWarp("empty warp".into()));
    };
    if w_t0 != 0.0 || w_s0 != 0.0 {
        return Err(Error::InvalidWarp(format!("warp(0) must be 0, got ({w_t0}, {w_s0})")));
    }
    if warp.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
        return Err(Error::InvalidWarp("breakpoints not strictly increasing".into()));
    }
    let end = input.end_time();
    let warp_end = warp[warp.len() - 1].0;
    if warp_end < end {
        return Err(Error::InvalidWarp(format!(
            "warp covers [0, {warp_end}] but input runs to {end}"
        )));
    }

    let mut times: Vec<f64> = input.points.iter().map(|p| p.0).collect();
    times.extend(warp.iter().map(|p| p.0).filter(|&t| t > 0.0 && t < end));
    times.sort_by(f64::total_cmp);
    times.dedup();

    let points = times
        .into_iter()
        .map(|t| (interpolate(warp, t), interpolate(&input.points, t)))
        .collect();
    InputSignal::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_malformed_breakpoints() {
        assert_eq!(InputSignal::new(vec![]), Err(Error::EmptyInput));
        assert!(InputSignal::new(vec![(0.5, 0.0)]).is_err());
        assert!(InputSignal::new(vec![(0.0, 0.0), (1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(InputSignal::new(vec![(0.0, 0.0), (1.0, f64::NAN)]).is_err());
        assert!(InputSignal::new(vec![(0.0, 3.0)]).is_ok());
    }

    #[test]
    fn evaluation_outside_support_is_an_error() {
        let s = InputSignal::ramp(0.0, 1.0, 1.0).unwrap();
        assert_eq!(s.value_at(0.25).unwrap(), 0.25);
        assert!(matches!(s.value_at(1.5), Err(Error::OutOfSupport { .. })));
        assert!(s.value_at(-0.1).is_err());
    }

    #[test]
    fn triangle_shape() {
        let s = InputSignal::triangle(0.0, 2.0, 4.0, 2).unwrap();
        assert_eq!(s.breakpoints().len(), 7);
        assert_eq!(s.value_at(1.0).unwrap(), 2.0);
        assert_eq!(s.value_at(3.0).unwrap(), -2.0);
        assert_eq!(s.value_at(8.0).unwrap(), 0.0);
        assert!((s.total_variation() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn sine_chords_hit_the_sinusoid() {
        let s = InputSignal::sine(0.0, 2.0, 10.0, 1, 256).unwrap();
        assert_eq!(s.breakpoints().len(), 257);
        assert_eq!(s.value_at(5.0).unwrap(), 0.0);
        assert!((s.value_at(2.5).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_warp_is_identity() {
        let s = InputSignal::triangle(0.5, 1.0, 2.0, 2).unwrap();
        let w = rate_reparameterize(&s, &[(0.0, 0.0), (10.0, 10.0)]).unwrap();
        assert_eq!(w, s);
    }

    #[test]
    fn linear_stretch() {
        let s = InputSignal::ramp(0.0, 1.0, 1.0).unwrap();
        let w = rate_reparameterize(&s, &[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert_eq!(w.breakpoints(), &[(0.0, 0.0), (2.0, 1.0)]);
    }

    #[test]
    fn squared_warp_keeps_values_at_warped_times() {
        let s = InputSignal::sine(0.0, 1.0, 1.0, 1, 16).unwrap();
        let warp: Vec<(f64, f64)> = (0..=64)
            .map(|k| {
                let t = k as f64 / 64.0;
                (t, t * t)
            })
            .collect();
        let w = rate_reparameterize(&s, &warp).unwrap();
        for &(t, u) in s.breakpoints() {
            // t² is exact at the warp knots, which include every sine knot
            let v = w.value_at(t * t).unwrap();
            assert!((v - u).abs() < 1e-14, "t = {t}: {v} vs {u}");
        }
    }

    #[test]
    fn non_monotone_warp_rejected() {
        let s = InputSignal::ramp(0.0, 1.0, 1.0).unwrap();
        let bad = [(0.0, 0.0), (0.5, 1.0), (1.0, 0.9)];
        assert!(matches!(rate_reparameterize(&s, &bad), Err(Error::InvalidWarp(_))));
        let short = [(0.0, 0.0), (0.5, 1.0)];
        assert!(rate_reparameterize(&s, &short).is_err());
        let shifted = [(0.0, 1.0), (1.0, 2.0)];
        assert!(rate_reparameterize(&s, &shifted).is_err());
    }

    #[test]
    fn random_signals_are_seeded() {
        let a = InputSignal::random(&mut ChaCha8Rng::seed_from_u64(7), 0.5, 6, 3.0, (1.0, 2.0)).unwrap();
        let b = InputSignal::random(&mut ChaCha8Rng::seed_from_u64(7), 0.5, 6, 3.0, (1.0, 2.0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.breakpoints().len(), 6);
        assert!(a.breakpoints().iter().all(|p| (p.1 - 0.5).abs() <= 3.0));
    }
}
