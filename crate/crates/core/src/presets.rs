//! Named parameter sets for the loop reproductions: a Dahl loop with
//! `Fc = 0.75, ρ = 1.5, r = 3` and a Bouc-Wen loop with `α = β = ζ = 1, n = 3`,
//! both driven by a chord-sampled sine.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DuhemModel, ModelSpec};
use crate::signal::InputSignal;

pub const AMPLITUDE: f64 = 2.0;
pub const PERIOD: f64 = 4.0;
pub const CYCLES: usize = 5;
pub const SEGMENTS_PER_PERIOD: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
        }
    }

    /// The model family the preset belongs to.
    pub fn model_name(self) -> &'static str {
        match self {
            Preset::Fig1 => "dahl",
            Preset::Fig2 => "boucwen",
        }
    }

    pub fn spec(self) -> ModelSpec {
        match self {
            Preset::Fig1 => ModelSpec::new("dahl").with("rho", 1.5).with("fc", 0.75).with("r", 3.0),
            Preset::Fig2 => ModelSpec::new("boucwen")
                .with("alpha", 1.0)
                .with("beta", 1.0)
                .with("zeta", 1.0)
                .with("n", 3.0),
        }
    }

    pub fn model(self) -> DuhemModel {
        self.spec().build().expect("preset parameters are valid")
    }

    pub fn input(self) -> InputSignal {
        InputSignal::sine(0.0, AMPLITUDE, PERIOD, CYCLES, SEGMENTS_PER_PERIOD).expect("preset input is valid")
    }

    pub fn period(self) -> f64 {
        PERIOD
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            other => Err(Error::InvalidInput(format!("unknown preset `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_build() {
        assert_eq!(Preset::Fig1.model().dahl_params(), Some((1.5, 0.75, 3.0)));
        assert_eq!(Preset::Fig2.model().id(), "boucwen");
        assert_eq!(Preset::Fig1.input().end_time(), PERIOD * CYCLES as f64);
        assert_eq!("fig2".parse::<Preset>().unwrap(), Preset::Fig2);
        assert!("fig3".parse::<Preset>().is_err());
    }
}
