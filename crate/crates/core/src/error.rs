use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("input signal has no breakpoints")]
    EmptyInput,

    #[error("input signal is malformed: {0}")]
    InvalidInput(String),

    #[error("time {t} lies outside the signal support [{start}, {end}]")]
    OutOfSupport { t: f64, start: f64, end: f64 },

    #[error("time warp is not strictly increasing from zero: {0}")]
    InvalidWarp(String),

    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("initial state (y0 = {y0}, u0 = {u0}) is outside the model domain")]
    InvalidInitialState { y0: f64, u0: f64 },

    #[error("trajectory left the model domain at t = {t} (u = {u}, y = {y})")]
    DomainExit { t: f64, u: f64, y: f64 },

    #[error("point (sigma = {sigma}, xi = {xi}) is outside the model domain")]
    OutsideDomain { sigma: f64, xi: f64 },

    #[error("grid rectangle is not contained in the model domain")]
    GridOutsideDomain,

    #[error("no anhysteresis point at xi = {xi}: F(., xi) has no sign change in the domain")]
    NoAnhysteresis { xi: f64 },

    #[error("intersecting function not found from (sigma = {sigma}, xi = {xi}): {reason}")]
    NoIntersection { sigma: f64, xi: f64, reason: String },

    #[error("root bracket [{lo}, {hi}] does not contain a sign change")]
    NoBracket { lo: f64, hi: f64 },

    #[error("adaptive quadrature on [{a}, {b}] did not converge within depth {depth}")]
    QuadratureDiverged { a: f64, b: f64, depth: u32 },

    #[error("operation requires an identically zero anhysteresis function")]
    NonZeroAnhysteresis,

    #[error("input family is empty")]
    EmptyFamily,

    #[error("trajectory needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("no closed input cycle found in trajectory")]
    NoClosedCycle,

    #[error("mechanical friction state |x3| = {x3} reached Fc = {fc} at t = {t}")]
    FrictionSaturated { t: f64, x3: f64, fc: f64 },
}
