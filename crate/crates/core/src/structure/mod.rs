//! Packing bounds, strongly regular graphs, the three-fiber decomposition of
//! a minimal-type design, its lift, and the coherent configuration with its
//! Q-polynomial check.

mod coherent;
mod decompose;
mod packing;
mod qpoly;
mod srg;

use thiserror::Error;

use crate::configs::ConfigError;
use crate::derived::DerivedError;
use crate::design::DesignError;
use crate::exactnum::{NumError, QuadExt};

pub use coherent::{build_coherent_config, CoherentConfigReport, LemmaCase, Relation};
pub use decompose::{decompose, lift, reordered_source, Condition, DecomposeCase, Decomposition, LiftReport};
pub use packing::{levenstein_alpha, packing_report, packing_report_gram, welch_bound, PackingReport};
pub use qpoly::{verify_q_poly, BlockCheck, EigenRow, QPolyReport};
pub use srg::{srg_family_params, srg_formula, srg_from_two_distance, SrgParams, SrgReport};

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("not a two-distance set: angles {0}")]
    NotTwoDistance(String),
    #[error("not a tight frame: degree-2 sum is {0}")]
    NotTightFrame(QuadExt),
    #[error("{0} is not an integer")]
    NonIntegral(String),
    #[error("srg parameters from the formula {formula} differ from the counted {counted}")]
    ParameterMismatch { formula: String, counted: String },
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(
        "axiom (iv) fails for relations ({r1},{r2}) over {h}: pair {first:?} has {first_count}, pair {second:?} has {second_count}"
    )]
    AxiomIvFails {
        r1: usize,
        r2: usize,
        h: usize,
        first: (usize, usize),
        first_count: u64,
        second: (usize, usize),
        second_count: u64,
    },
    #[error("nonzero residual in F_{l} F_{m} on fibers {block:?}: entry {entry}")]
    ResidualNonzero { block: (usize, usize, usize), l: usize, m: usize, entry: QuadExt },
    #[error("k must be odd and at least 3, got {0}")]
    InvalidK(i64),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Derived(#[from] DerivedError),
}
