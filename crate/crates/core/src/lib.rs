//! Body-tail generalized normal (BTGN) distributions.
//!
//! The crate provides the symmetric BTGN family with separate body and tail
//! shape parameters, its two-piece skewed extension, a small zoo of baseline
//! models behind a common fitting contract, maximum-likelihood estimation,
//! BIC-based Bayes-factor comparison, and data ingestion helpers.

pub mod btgn;
pub mod datapipe;
pub mod error;
pub mod inference;
pub mod optim;
pub mod specfun;
pub mod twopiece;
pub mod zoo;

pub use btgn::{lemma2_closed_form, tail_limit_check, Btgn, LocScaleBtgn, LocScaleParams, ShapeParams};
pub use error::{Error, Result};
pub use twopiece::{tptan_params, StdNormal, SymmetricBase, TwoPiece, TwoPieceBtgn, TwoPieceParams};
pub use inference::{
    bic, compare_models, evidence_category, mle_fit, neg_log_likelihood, standard_errors, two_ln_bf, ComparisonRow,
    ComparisonTable, EvidenceCategory, ExternalFit, Favors, FitOptions, FitReport, Reference, StandardErrors,
};
pub use zoo::{model_by_name, Density, Model, MODEL_NAMES};
