//! The clockwise storage function
//!
//! ```text
//! H(σ, ξ) = ∫₀^Λ f_an(τ) dτ − ∫_ξ^Λ ω(τ, σ, ξ) dτ,   Λ = Λ(σ, ξ)
//! ```
//!
//! evaluated by quadrature along the traversing curve, the Dahl closed forms
//! used as oracles, and a brute-force estimate of the available storage
//! `sup −∫ y·u̇ dt`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curves::{anhysteresis, locate_intersection, PhasePoint, CURVE_STEP};
use crate::dissipativity::cw_supply_integral;
use crate::error::{Error, Result};
use crate::model::DuhemModel;
use crate::numeric::adaptive_simpson;
use crate::operator::simulate;
use crate::signal::InputSignal;

pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

/// One evaluation of the storage function and its two integral terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StorageEvaluation {
    pub point: PhasePoint,
    pub lambda_star: f64,
    /// `∫₀^Λ f_an`.
    pub anhysteresis_integral: f64,
    /// `∫_ξ^Λ ω`.
    pub traverse_integral: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageOptions {
    pub quad_tol: f64,
    pub curve_step: f64,
}

impl Default for StorageOptions {
    fn default() -> Self {
        StorageOptions {
            quad_tol: DEFAULT_QUAD_TOL,
            curve_step: CURVE_STEP,
        }
    }
}

/// `H(p)` with both integrals by adaptive Simpson to absolute tolerance
/// `quad_tol`.
pub fn storage_cw(model: &DuhemModel, p: PhasePoint, quad_tol: f64) -> Result<StorageEvaluation> {
    storage_cw_with(
        model,
        p,
        &StorageOptions {
            quad_tol,
            ..StorageOptions::default()
        },
    )
}

pub fn storage_cw_with(model: &DuhemModel, p: PhasePoint, opts: &StorageOptions) -> Result<StorageEvaluation> {
    let hit = locate_intersection(model, p, opts.curve_step)?;
    let lambda = hit.lambda;

    let anhysteresis_integral = if model.anhysteresis_kind().is_zero() {
        0.0
    } else {
        let q = adaptive_simpson(
            |t| anhysteresis(model, t).unwrap_or(f64::NAN),
            0.0,
            lambda,
            opts.quad_tol,
        )?;
        if !q.is_finite() {
            return Err(Error::NoAnhysteresis { xi: lambda });
        }
        q
    };

    let branch = &hit.branch;
    // Λ is the far end of the branch, so eval never falls outside it
    let traverse_integral = adaptive_simpson(|t| branch.eval(t).unwrap_or(f64::NAN), p.xi, lambda, opts.quad_tol)?;

    Ok(StorageEvaluation {
        point: p,
        lambda_star: lambda,
        anhysteresis_integral,
        traverse_integral,
        value: anhysteresis_integral - traverse_integral,
    })
}

fn check_band(y: f64, fc: f64) -> Result<()> {
    if y.abs() < fc {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "y".into(),
            value: y,
            reason: "must satisfy |y| < Fc",
        })
    }
}

/// Closed-form storage of the Dahl model with `r = 1`:
/// `(Fc²/ρ)·ln(Fc/(Fc + |y|)) + (Fc/ρ)·|y|`. Independent of the input value.
pub fn storage_dahl_closed_form(y: f64, rho: f64, fc: f64) -> Result<f64> {
    check_band(y, fc)?;
    let v = if y >= 0.0 {
        fc * fc / rho * (fc / (y + fc)).ln() + fc / rho * y
    } else {
        fc * fc / rho * (-fc / (y - fc)).ln() - fc / rho * y
    };
    Ok(v)
}

/// Closed-form intersecting function of the Dahl model with `r = 1`.
pub fn lambda_dahl_closed_form(y: f64, u: f64, rho: f64, fc: f64) -> Result<f64> {
    check_band(y, fc)?;
    let v = if y >= 0.0 {
        u + fc / rho * (fc / (y + fc)).ln()
    } else {
        u - fc / rho * (-fc / (y - fc)).ln()
    };
    Ok(v)
}

/// Closed-form traversing curve of the Dahl model with `r = 1` through `(y, u)`.
pub fn omega_dahl_closed_form(tau: f64, y: f64, u: f64, rho: f64, fc: f64) -> Result<f64> {
    check_band(y, fc)?;
    let k = rho / fc;
    let v = if tau >= u {
        fc + (y - fc) * (k * (u - tau)).exp()
    } else {
        -fc + (y + fc) * (k * (tau - u)).exp()
    };
    Ok(v)
}

/// Inputs over which the available storage supremum is searched.
#[derive(Debug, Clone, PartialEq)]
pub struct InputFamily {
    /// The monotone ramp from `ξ` to `Λ(σ, ξ)` held afterwards, which attains the
    /// supremum when `f_an ≡ 0`.
    pub ramp_to_lambda: bool,
    /// The constant input at `ξ`.
    pub constant: bool,
    pub random_count: usize,
    pub seed: u64,
    /// Inclusive range for the number of breakpoints of a random member.
    pub breakpoints: (usize, usize),
    /// Random members stay within this distance of `ξ`.
    pub radius: f64,
    /// Input-space integration step.
    pub step: f64,
}

impl InputFamily {
    /// Ramp to Λ plus 200 seeded random signals with 3–10 breakpoints within ±3.
    pub fn standard(seed: u64) -> Self {
        InputFamily {
            ramp_to_lambda: true,
            constant: false,
            random_count: 200,
            seed,
            breakpoints: (3, 10),
            radius: 3.0,
            step: 1e-3,
        }
    }

    pub fn constant_only() -> Self {
        InputFamily {
            ramp_to_lambda: false,
            constant: true,
            random_count: 0,
            seed: 0,
            breakpoints: (3, 10),
            radius: 0.0,
            step: 1e-3,
        }
    }

    /// The members for start point `p` over `[0, horizon]`.
    pub fn members(&self, model: &DuhemModel, p: PhasePoint, horizon: f64) -> Result<Vec<InputSignal>> {
        let mut out = Vec::new();
        if self.constant {
            out.push(InputSignal::constant(p.xi, horizon)?);
        }
        if self.ramp_to_lambda {
            let lambda = crate::curves::intersect_lambda(model, p)?;
            out.push(InputSignal::ramp_and_hold(p.xi, lambda, 0.5 * horizon, horizon)?);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_count {
            let n = rand::Rng::random_range(&mut rng, self.breakpoints.0..=self.breakpoints.1);
            let raw = InputSignal::random(&mut rng, p.xi, n, self.radius, (1.0, 2.0))?;
            let scale = horizon / raw.end_time();
            out.push(InputSignal::new(
                raw.breakpoints().iter().map(|&(t, u)| (t * scale, u)).collect(),
            )?);
        }
        Ok(out)
    }
}

/// Result of the brute-force available storage search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AvailableStorage {
    pub value: f64,
    /// Index of the maximizing family member.
    pub maximizer: usize,
    pub members: usize,
}

/// `max` over the family of `max_T −∫₀^T y·u̇ dt` with `y = Φ(u, σ)` and
/// `u(0) = ξ`. The running integral is maximized over every sample, not only
/// the endpoint. Requires `f_an ≡ 0`.
pub fn available_storage_bruteforce(
    model: &DuhemModel,
    p: PhasePoint,
    family: &InputFamily,
    horizon: f64,
) -> Result<AvailableStorage> {
    if !model.anhysteresis_kind().is_zero() {
        return Err(Error::NonZeroAnhysteresis);
    }
    if !model.contains(p.sigma, p.xi) {
        return Err(Error::OutsideDomain {
            sigma: p.sigma,
            xi: p.xi,
        });
    }
    let members = family.members(model, p, horizon)?;
    if members.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut best = AvailableStorage {
        value: f64::NEG_INFINITY,
        maximizer: 0,
        members: members.len(),
    };
    for (i, input) in members.iter().enumerate() {
        let tr = simulate(model, input, p.sigma, family.step)?;
        let supply = cw_supply_integral(&tr)?;
        let extracted = supply.values.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(-s));
        if extracted > best.value {
            best.value = extracted;
            best.maximizer = i;
        }
    }
    Ok(best)
}
