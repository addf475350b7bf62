//! Duhem hysteresis operators with clockwise input-output dynamics.
//!
//! The crate simulates Duhem operators (Dahl, Bouc-Wen and user-defined
//! models), builds the anhysteresis, traversing and intersecting functions of
//! an operator, evaluates the clockwise storage function `H` that bounds the
//! supply `∫ y·u̇ dt`, and checks the resulting dissipation and Lyapunov
//! inequalities numerically.
//!
//! ```
//! use duhem::{DuhemModel, InputSignal, simulate};
//!
//! let dahl = DuhemModel::dahl(1.5, 0.75, 1.0)?;
//! let ramp = InputSignal::ramp(0.0, 1.0, 1.0)?;
//! let y = simulate(&dahl, &ramp, 0.0, 1e-3)?;
//! assert!((y.last().y - 0.75 * (1.0 - (-2.0f64).exp())).abs() < 1e-10);
//! # Ok::<(), duhem::Error>(())
//! ```

pub mod curves;
pub mod dissipativity;
mod error;
pub mod mechsim;
pub mod model;
pub mod numeric;
pub mod operator;
pub mod presets;
pub mod report;
pub mod signal;
pub mod storage;

pub use curves::{anhysteresis, check_lemma1, intersect_lambda, traversing_curve, PhasePoint, TraversingCurve};
pub use dissipativity::{check_assumption_a, cw_supply_integral, loop_orientation, verify_dissipation, Orientation};
pub use error::{Error, Result};
pub use mechsim::{lyapunov_check, simulate_mech, ForceLaw, MechParams, MechSeries, MechState};
pub use model::{Anhysteresis, Domain, DuhemModel, ModelSpec, Rect};
pub use operator::{check_existence_conditions, simulate, simulate_with, Sample, StepRule, Trajectory};
pub use report::{Location, VerificationReport};
pub use signal::{rate_reparameterize, InputSignal};
pub use storage::{
    available_storage_bruteforce, lambda_dahl_closed_form, storage_cw, storage_dahl_closed_form, StorageEvaluation,
};

// The guide's code listings run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/storage.md")]
    mod storage {}
    #[doc = include_str!("../../../book/src/dissipativity.md")]
    mod dissipativity {}
    #[doc = include_str!("../../../book/src/mechanical.md")]
    mod mechanical {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
