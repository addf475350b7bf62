//! Duhem operators and the built-in model catalog.
//!
//! A Duhem operator is fixed by two slope functions `f1(σ, ξ)` and `f2(σ, ξ)`:
//! the output `y` moves along `f1` while the input `u` increases and along `f2`
//! while it decreases,
//!
//! ```text
//! ẏ = f1(y, u)·max(0, u̇) + f2(y, u)·min(0, u̇)
//! ```
//!
//! The odd and even parts `F = (f1 − f2)/2` and `G = (f1 + f2)/2` are exposed
//! as [`DuhemModel::odd_part`] and [`DuhemModel::even_part`]. The zero set of
//! `F` is the anhysteresis curve.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A slope function `(σ, ξ) ↦ f(σ, ξ)`.
pub type SlopeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A scalar curve `ξ ↦ f_an(ξ)`.
pub type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Law {
    Dahl { rho: f64, fc: f64, r: f64 },
    BoucWen { alpha: f64, beta: f64, zeta: f64, n: f64 },
    Exp { gain: f64, slope: f64, offset: f64 },
    Custom { f1: SlopeFn, f2: SlopeFn },
}

/// Region of the (output, input) plane a model's trajectories are confined to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Plane,
    /// Open band `lo < σ < hi`, any `ξ`.
    Band {
        lo: f64,
        hi: f64,
    },
}

impl Domain {
    pub fn contains(&self, sigma: f64, xi: f64) -> bool {
        if !sigma.is_finite() || !xi.is_finite() {
            return false;
        }
        match *self {
            Domain::Plane => true,
            Domain::Band { lo, hi } => lo < sigma && sigma < hi,
        }
    }

    /// Bounds on σ, infinite for the whole plane.
    pub fn sigma_bounds(&self) -> (f64, f64) {
        match *self {
            Domain::Plane => (f64::NEG_INFINITY, f64::INFINITY),
            Domain::Band { lo, hi } => (lo, hi),
        }
    }

    /// A closed rectangle inside the domain over `[xi_lo, xi_hi]`. For a band the
    /// open σ-interval is shrunk by `margin` times its width; for the plane the
    /// σ-range `[-sigma_extent, sigma_extent]` is used.
    pub fn working_rect(&self, xi_lo: f64, xi_hi: f64, margin: f64, sigma_extent: f64) -> Rect {
        let (lo, hi) = match *self {
            Domain::Plane => (-sigma_extent, sigma_extent),
            Domain::Band { lo, hi } => {
                let pad = margin * (hi - lo);
                (lo + pad, hi - pad)
            }
        };
        Rect::new(lo, hi, xi_lo, xi_hi)
    }

    pub fn contains_rect(&self, rect: &Rect) -> bool {
        match *self {
            Domain::Plane => true,
            Domain::Band { lo, hi } => lo < rect.sigma_lo && rect.sigma_hi < hi,
        }
    }
}

/// Closed rectangle `[sigma_lo, sigma_hi] × [xi_lo, xi_hi]` in the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub xi_lo: f64,
    pub xi_hi: f64,
}

impl Rect {
    pub fn new(sigma_lo: f64, sigma_hi: f64, xi_lo: f64, xi_hi: f64) -> Self {
        Rect {
            sigma_lo,
            sigma_hi,
            xi_lo,
            xi_hi,
        }
    }

    /// `n` evenly spaced values from `lo` to `hi` inclusive (`lo` alone when `n == 1`).
    pub(crate) fn axis(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
        (0..n).map(move |i| if i + 1 == n && n > 1 { hi } else { lo + step * i as f64 })
    }

    pub fn sigma_axis(&self, n: usize) -> impl Iterator<Item = f64> {
        Self::axis(self.sigma_lo, self.sigma_hi, n)
    }

    pub fn xi_axis(&self, n: usize) -> impl Iterator<Item = f64> {
        Self::axis(self.xi_lo, self.xi_hi, n)
    }
}

/// How a model provides its anhysteresis function.
#[derive(Clone)]
pub enum Anhysteresis {
    /// `f_an ≡ 0`.
    Zero,
    /// `f_an(ξ) = slope·ξ`.
    Linear {
        slope: f64,
    },
    Explicit(CurveFn),
    /// Solve `F(σ, ξ) = 0` for σ numerically.
    Implicit,
}

impl Anhysteresis {
    pub fn is_zero(&self) -> bool {
        matches!(self, Anhysteresis::Zero)
    }

    /// `f_an` is constant rather than strictly increasing.
    pub fn is_constant(&self) -> bool {
        match self {
            Anhysteresis::Zero => true,
            Anhysteresis::Linear { slope } => *slope == 0.0,
            _ => false,
        }
    }

    pub(crate) fn explicit(&self, xi: f64) -> Option<f64> {
        match self {
            Anhysteresis::Zero => Some(0.0),
            Anhysteresis::Linear { slope } => Some(slope * xi),
            Anhysteresis::Explicit(f) => Some(f(xi)),
            Anhysteresis::Implicit => None,
        }
    }
}

impl fmt::Debug for Anhysteresis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anhysteresis::Zero => write!(f, "Zero"),
            Anhysteresis::Linear { slope } => write!(f, "Linear {{ slope: {slope} }}"),
            Anhysteresis::Explicit(_) => write!(f, "Explicit(..)"),
            Anhysteresis::Implicit => write!(f, "Implicit"),
        }
    }
}

/// A Duhem hysteresis operator: slope pair, domain, and anhysteresis function.
///
/// Models are immutable once built and cheap to clone.
#[derive(Clone)]
pub struct DuhemModel {
    id: String,
    law: Law,
    domain: Domain,
    anhysteresis: Anhysteresis,
}

impl fmt::Debug for DuhemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DuhemModel")
            .field("id", &self.id)
            .field("params", &self.params())
            .field("domain", &self.domain)
            .field("anhysteresis", &self.anhysteresis)
            .finish()
    }
}

fn require(name: &str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: name.to_string(),
            value,
            reason,
        })
    }
}

/// `|x|^p` with a fast path for small integer exponents.
#[inline]
fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p.fract() == 0.0 && p <= 16.0 {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

#[inline]
fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl DuhemModel {
    /// Dahl friction model with rest stiffness `rho`, Coulomb force `fc` and
    /// shape exponent `r ≥ 1`. Trajectories live in the band `(-fc, fc)`.
    pub fn dahl(rho: f64, fc: f64, r: f64) -> Result<Self> {
        require("rho", rho, rho > 0.0, "must be positive")?;
        require("fc", fc, fc > 0.0, "must be positive")?;
        require("r", r, r >= 1.0, "must be at least 1")?;
        Ok(DuhemModel {
            id: "dahl".into(),
            law: Law::Dahl { rho, fc, r },
            domain: Domain::Band { lo: -fc, hi: fc },
            anhysteresis: Anhysteresis::Zero,
        })
    }

    /// Bouc-Wen model `f1,2 = α − β|σ|ⁿ ∓ ζσ|σ|ⁿ⁻¹`.
    pub fn bouc_wen(alpha: f64, beta: f64, zeta: f64, n: f64) -> Result<Self> {
        require("alpha", alpha, true, "must be finite")?;
        require("beta", beta, true, "must be finite")?;
        require("zeta", zeta, true, "must be finite")?;
        require("n", n, n >= 1.0, "must be at least 1")?;
        // F = -ζσ|σ|^(n-1) vanishes only at σ = 0 unless ζ = 0.
        let anhysteresis = if zeta != 0.0 {
            Anhysteresis::Zero
        } else {
            Anhysteresis::Implicit
        };
        Ok(DuhemModel {
            id: "boucwen".into(),
            law: Law::BoucWen { alpha, beta, zeta, n },
            domain: Domain::Plane,
            anhysteresis,
        })
    }

    /// The exponential example operator
    /// `f1 = exp(gain·(−slope·σ + ξ)) + offset`, `f2 = exp(gain·(slope·σ − ξ)) + offset`,
    /// whose anhysteresis curve is the line `σ = ξ / slope`.
    pub fn exp_example(gain: f64, slope: f64, offset: f64) -> Result<Self> {
        require("gain", gain, gain > 0.0, "must be positive")?;
        require("slope", slope, slope > 0.0, "must be positive")?;
        require("offset", offset, true, "must be finite")?;
        Ok(DuhemModel {
            id: "exp_example".into(),
            law: Law::Exp { gain, slope, offset },
            domain: Domain::Plane,
            anhysteresis: Anhysteresis::Linear { slope: 1.0 / slope },
        })
    }

    /// The exponential example with its standard constants (0.5, 1.2, 0.83).
    pub fn exp_example_default() -> Self {
        Self::exp_example(0.5, 1.2, 0.83).expect("default constants are valid")
    }

    /// A user-supplied operator.
    pub fn custom(
        id: impl Into<String>,
        f1: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        f2: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        domain: Domain,
        anhysteresis: Anhysteresis,
    ) -> Self {
        DuhemModel {
            id: id.into(),
            law: Law::Custom {
                f1: Arc::new(f1),
                f2: Arc::new(f2),
            },
            domain,
            anhysteresis,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn anhysteresis_kind(&self) -> &Anhysteresis {
        &self.anhysteresis
    }

    /// Dahl parameters `(rho, fc, r)` when this is a Dahl model.
    pub fn dahl_params(&self) -> Option<(f64, f64, f64)> {
        match self.law {
            Law::Dahl { rho, fc, r } => Some((rho, fc, r)),
            _ => None,
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match self.law {
            Law::Dahl { rho, fc, r } => vec![("rho", rho), ("fc", fc), ("r", r)],
            Law::BoucWen { alpha, beta, zeta, n } => vec![("alpha", alpha), ("beta", beta), ("zeta", zeta), ("n", n)],
            Law::Exp { gain, slope, offset } => vec![("gain", gain), ("slope", slope), ("offset", offset)],
            Law::Custom { .. } => vec![],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Slope for increasing input.
    #[inline]
    pub fn f1(&self, sigma: f64, xi: f64) -> f64 {
        match &self.law {
            Law::Dahl { rho, fc, r } => {
                let s = 1.0 - sigma / fc;
                if *r == 1.0 {
                    rho * s
                } else {
                    rho * abs_pow(s, *r) * signum0(s)
                }
            }
            Law::BoucWen { alpha, beta, zeta, n } => {
                let a = abs_pow(sigma, *n);
                alpha - beta * a - zeta * signum0(sigma) * a
            }
            Law::Exp { gain, slope, offset } => (gain * (-slope * sigma + xi)).exp() + offset,
            Law::Custom { f1, .. } => f1(sigma, xi),
        }
    }

    /// Slope for decreasing input.
    #[inline]
    pub fn f2(&self, sigma: f64, xi: f64) -> f64 {
        match &self.law {
            Law::Dahl { rho, fc, r } => {
                let s = 1.0 + sigma / fc;
                if *r == 1.0 {
                    rho * s
                } else {
                    rho * abs_pow(s, *r) * signum0(s)
                }
            }
            Law::BoucWen { alpha, beta, zeta, n } => {
                let a = abs_pow(sigma, *n);
                alpha - beta * a + zeta * signum0(sigma) * a
            }
            Law::Exp { gain, slope, offset } => (gain * (slope * sigma - xi)).exp() + offset,
            Law::Custom { f2, .. } => f2(sigma, xi),
        }
    }

    /// `F = (f1 − f2)/2`.
    #[inline]
    pub fn odd_part(&self, sigma: f64, xi: f64) -> f64 {
        0.5 * (self.f1(sigma, xi) - self.f2(sigma, xi))
    }

    /// `G = (f1 + f2)/2`.
    #[inline]
    pub fn even_part(&self, sigma: f64, xi: f64) -> f64 {
        0.5 * (self.f1(sigma, xi) + self.f2(sigma, xi))
    }

    /// Right-hand side of the operator for a given input rate.
    #[inline]
    pub fn rate(&self, sigma: f64, xi: f64, u_dot: f64) -> f64 {
        if u_dot > 0.0 {
            self.f1(sigma, xi) * u_dot
        } else if u_dot < 0.0 {
            self.f2(sigma, xi) * u_dot
        } else {
            0.0
        }
    }

    pub fn contains(&self, sigma: f64, xi: f64) -> bool {
        self.domain.contains(sigma, xi)
    }
}

/// JSON description of a built-in model: `{"model": "dahl", "params": {...}}`.
///
/// Missing parameters take the catalog defaults (the loop presets); unknown
/// parameter names are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub model: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn new(model: impl Into<String>) -> Self {
        ModelSpec {
            model: model.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn build(&self) -> Result<DuhemModel> {
        let known: &[(&str, f64)] = match self.model.as_str() {
            "dahl" => &[("rho", 1.5), ("fc", 0.75), ("r", 1.0)],
            "boucwen" => &[("alpha", 1.0), ("beta", 1.0), ("zeta", 1.0), ("n", 3.0)],
            "exp_example" => &[("gain", 0.5), ("slope", 1.2), ("offset", 0.83)],
            other => return Err(Error::UnknownModel(other.to_string())),
        };
        for (key, value) in &self.params {
            if !known.iter().any(|(k, _)| k == key) {
                return Err(Error::InvalidParameter {
                    name: key.clone(),
                    value: *value,
                    reason: "not a parameter of this model",
                });
            }
        }
        let get = |key: &str| -> f64 {
            self.params.get(key).copied().unwrap_or_else(|| {
                known
                    .iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, v)| *v)
                    .unwrap_or(f64::NAN)
            })
        };
        match self.model.as_str() {
            "dahl" => DuhemModel::dahl(get("rho"), get("fc"), get("r")),
            "boucwen" => DuhemModel::bouc_wen(get("alpha"), get("beta"), get("zeta"), get("n")),
            _ => DuhemModel::exp_example(get("gain"), get("slope"), get("offset")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dahl_rejects_bad_parameters() {
        assert!(DuhemModel::dahl(0.0, 0.75, 1.0).is_err());
        assert!(DuhemModel::dahl(1.5, -1.0, 1.0).is_err());
        assert!(DuhemModel::dahl(1.5, 0.75, 0.5).is_err());
        assert!(DuhemModel::dahl(1.5, 0.75, f64::NAN).is_err());
        assert!(DuhemModel::bouc_wen(1.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn odd_and_even_parts_recombine() {
        let models = [
            DuhemModel::dahl(1.5, 0.75, 3.0).unwrap(),
            DuhemModel::bouc_wen(1.0, 1.0, 1.0, 3.0).unwrap(),
            DuhemModel::exp_example_default(),
        ];
        for m in &models {
            for &(s, x) in &[(0.3, -1.0), (-0.6, 2.0), (0.0, 0.0), (0.71, 4.0)] {
                let (f, g) = (m.odd_part(s, x), m.even_part(s, x));
                let scale = 1.0 + m.f1(s, x).abs() + m.f2(s, x).abs();
                assert!((f + g - m.f1(s, x)).abs() <= 4.0 * f64::EPSILON * scale);
                assert!((-f + g - m.f2(s, x)).abs() <= 4.0 * f64::EPSILON * scale);
            }
        }
    }

    #[test]
    fn dahl_general_r_vanishes_at_coulomb_limit() {
        let m = DuhemModel::dahl(1.5, 0.75, 3.0).unwrap();
        assert_eq!(m.f1(0.75, 0.0), 0.0);
        assert_eq!(m.f2(-0.75, 0.0), 0.0);
        // r = 3 reduces to ρ(1 − σ/Fc)³ inside the band
        let s: f64 = 1.0 - 0.3 / 0.75;
        assert!((m.f1(0.3, 1.0) - 1.5 * s.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn bouc_wen_branches() {
        let m = DuhemModel::bouc_wen(1.0, 1.0, 1.0, 3.0).unwrap();
        // σ > 0: f1 = 1 − 2σ³, f2 = 1
        assert!((m.f1(0.5, 0.0) - 0.75).abs() < 1e-15);
        assert!((m.f2(0.5, 0.0) - 1.0).abs() < 1e-15);
        // σ < 0: f1 = 1, f2 = 1 − 2|σ|³
        assert!((m.f1(-0.5, 0.0) - 1.0).abs() < 1e-15);
        assert!((m.f2(-0.5, 0.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn spec_defaults_and_unknown_keys() {
        let m = ModelSpec::new("dahl").build().unwrap();
        assert_eq!(m.dahl_params(), Some((1.5, 0.75, 1.0)));
        let m = ModelSpec::new("dahl").with("r", 3.0).build().unwrap();
        assert_eq!(m.dahl_params(), Some((1.5, 0.75, 3.0)));
        assert!(ModelSpec::new("dahl").with("gamma", 1.0).build().is_err());
        assert!(matches!(
            ModelSpec::new("preisach").build(),
            Err(Error::UnknownModel(_))
        ));
        let json = r#"{"model": "boucwen", "params": {"n": 2.0}}"#;
        let spec: ModelSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.build().unwrap().params()["n"], 2.0);
        assert!(serde_json::from_str::<ModelSpec>(r#"{"model":"dahl","extra":1}"#).is_err());
    }

    #[test]
    fn band_domain_is_open() {
        let d = Domain::Band { lo: -0.75, hi: 0.75 };
        assert!(d.contains(0.7499, 100.0));
        assert!(!d.contains(0.75, 0.0));
        assert!(!d.contains(-0.75, 0.0));
        assert!(!d.contains(f64::NAN, 0.0));
        let rect = d.working_rect(-1.0, 1.0, 1e-6, 0.0);
        assert!(d.contains_rect(&rect));
        assert!(!d.contains_rect(&Rect::new(-0.75, 0.5, 0.0, 1.0)));
    }

    #[test]
    fn axis_hits_endpoints() {
        let v: Vec<f64> = Rect::axis(-5.0, 5.0, 11).collect();
        assert_eq!(v.len(), 11);
        assert_eq!(v[0], -5.0);
        assert_eq!(v[10], 5.0);
        assert!((v[5]).abs() < 1e-15);
    }
}
