//! Certified two-sided bounds for optimized quantities.

use serde::{Deserialize, Serialize};

use crate::annulus::LaurentFamily;
use crate::functors::Representation;
use crate::spaces::cvec;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverTag {
    Exact,
    ClosedForm,
    ProjectedNewton,
    LevelSearch,
    SmoothedMinimax,
    LogNewton,
    ExtremePoints,
    PhaseGrid,
    Ascent,
    Envelope,
    Svd,
}

/// Replayable evidence for an upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    /// `x = x0 + (x - x0)`.
    Split {
        #[serde(with = "cvec")]
        x0: Vec<C64>,
    },
    /// `|x| = u^(1-theta) v^theta` coordinatewise, with the bound `||u||^(1-theta) ||v||^theta`.
    Factorization { u: Vec<f64>, v: Vec<f64> },
    Family { family: LaurentFamily },
    Representation { representation: Representation },
    /// A vector attaining (for lower bounds) or certifying a value.
    Vector {
        #[serde(with = "cvec")]
        x: Vec<C64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when a bound relies on sampling rather than a certificate.
    #[serde(default)]
    pub heuristic: bool,
    pub solver: SolverTag,
    pub witness: Witness,
}

impl NormBracket {
    pub fn new(lower: f64, upper: f64, solver: SolverTag, witness: Witness) -> Self {
        debug_assert!(
            lower <= upper * (1.0 + 1e-9) + 1e-300,
            "bracket inverted: lower {lower} > upper {upper}"
        );
        NormBracket {
            lower: lower.min(upper).max(0.0),
            upper,
            iterations: 0,
            converged: true,
            heuristic: false,
            solver,
            witness,
        }
    }

    pub fn exact(value: f64, solver: SolverTag) -> Self {
        Self::new(value, value, solver, Witness::None)
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_iterations(mut self, iterations: usize, converged: bool) -> Self {
        self.iterations = iterations;
        self.converged = converged;
        self
    }

    pub fn heuristic(mut self, flag: bool) -> Self {
        self.heuristic = flag;
        self
    }

    /// The reported value (the feasible upper bound).
    pub fn value(&self) -> f64 {
        self.upper
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn relative_gap(&self) -> f64 {
        if self.upper == 0.0 {
            0.0
        } else {
            self.gap() / self.upper
        }
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }

    pub fn overlaps(&self, other: &NormBracket, tol: f64) -> bool {
        self.lower <= other.upper + tol && other.lower <= self.upper + tol
    }
}
