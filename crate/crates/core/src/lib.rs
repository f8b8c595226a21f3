//! Model selection by mutation validation (MV) and k-fold cross-validation
//! (CV), paired nested cross-validation comparisons between the two, and
//! Bayesian ROPE analysis of the resulting score differences.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`]: datasets, label mutation, fold plans, ANOVA feature ranking,
//!   synthetic generators, CSV ingestion.
//! * [`learners`]: decision tree, polynomial kernel ridge classifier and
//!   polynomial Pegasos SVM, each with a single capacity hyperparameter.
//! * [`selection`]: the m-score, CV scoring and argmax selection.
//! * [`harness`]: repeated nested cross-validation with a paired design and
//!   runtime / CO2 accounting.
//! * [`bayes`]: Student-t CDF, correlated t-test and hierarchical test.

pub mod bayes;
pub mod data;
pub mod error;
pub mod harness;
pub mod learners;
pub mod seed;
pub mod selection;

pub use error::{Error, Result};
