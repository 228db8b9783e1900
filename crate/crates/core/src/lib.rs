//! Forecasting and post-hoc explanation toolkit for univariate monthly series.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure
//! computation; file formats, configuration and the command line live in the
//! `lagshap` companion crate.
//!
//! Module map:
//!
//! - [`series`]: monthly series, descriptive statistics, transforms, ACF/PACF.
//! - [`supervise`]: lag/rolling/cyclic feature matrices, chronological split,
//!   standardization and expanding-window folds.
//! - [`gbt`]: second-order gradient-boosted regression trees.
//! - [`sarima`]: seasonal ARIMA fitted by conditional sum of squares.
//! - [`explain`]: permutation SHAP, interventional TreeSHAP, LIME,
//!   permutation importance and stability analysis.
//! - [`stats`]: accuracy metrics, Diebold-Mariano, block bootstrap, correlations.
//! - [`oracle`]: brute-force reference computations used for verification.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod calendar;
pub mod error;
pub mod explain;
pub mod gbt;
pub mod optim;
pub mod oracle;
pub mod rng;
pub mod sarima;
pub mod series;
pub mod special;
pub mod stats;
pub mod supervise;

pub use calendar::YearMonth;
pub use error::{Error, ErrorKind, Result};
pub use series::TimeSeries;
pub use supervise::FeatureMatrix;
