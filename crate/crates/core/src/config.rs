//! Explicit run configuration shared by the CLI and the verification suite.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rep::Flavor;
use crate::tolerance;

/// The three rungs of the tolerance ladder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub construction: f64,
    pub verification: f64,
    pub finite_difference: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            construction: tolerance::CONSTRUCTION,
            verification: tolerance::VERIFICATION,
            finite_difference: tolerance::FINITE_DIFFERENCE,
        }
    }
}

impl Tolerances {
    /// Applies one `key=value` override. Keys are `construction`,
    /// `verification` and `finite-difference`.
    pub fn apply(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("tolerance override {assignment:?} is not key=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("tolerance {value:?} is not a number")))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance {key} must be positive, got {value}")));
        }
        match key.trim() {
            "construction" => self.construction = value,
            "verification" => self.verification = value,
            "finite-difference" => self.finite_difference = value,
            other => return Err(Error::InvalidInput(format!("unknown tolerance {other:?}"))),
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub genus: usize,
    pub rank: usize,
    pub flavor: Flavor,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            genus: 2,
            rank: 2,
            flavor: Flavor::Unitary,
            seed: 0,
            tolerances: Tolerances::default(),
            out: None,
            parallel: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.genus == 0 {
            return Err(Error::InvalidInput("genus must be at least 1".into()));
        }
        if self.rank == 0 {
            return Err(Error::InvalidInput("rank must be at least 1".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("construction", t.construction),
            ("verification", t.verification),
            ("finite-difference", t.finite_difference),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("tolerance {name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Fault injected into the verification suite to show that it can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// Flips the sign of the `β` terms in the dual-generator pairing.
    DualSign,
}

impl std::fmt::Display for Mutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mutation::None => "none",
            Mutation::DualSign => "dual-sign",
        })
    }
}

impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Mutation::None),
            "dual-sign" => Ok(Mutation::DualSign),
            other => Err(Error::InvalidInput(format!("unknown mutation {other:?}"))),
        }
    }
}
