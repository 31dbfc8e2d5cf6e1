//! Data-driven subgroup discovery for linear regression.
//!
//! Finds an interpretable axis-aligned region of feature space on which one
//! linear model fits well. The pipeline runs in three phases:
//!
//! 1. [`coregroup`]: scan every k-nearest-neighbor neighborhood and keep the
//!    one whose local least-squares fit has the lowest training error.
//! 2. [`pipeline::reject_labels`]: reject every training point whose residual
//!    under the core model reaches a threshold.
//! 3. [`region::grow_box`]: grow a box from the core center until each face is
//!    supported by a rejected point or the data bounding box.
//!
//! [`pipeline::sweep`] runs a hyperparameter grid and selects a region on a
//! validation set, [`pipeline::fit_multi`] peels off several groups in turn,
//! and [`synth`] provides a synthetic generator with known ground truth plus
//! volume-overlap scoring.

pub mod baseline;
pub mod bench;
pub mod coregroup;
pub mod dataset;
pub mod error;
pub mod neighbors;
pub mod numerics;
pub mod pipeline;
pub mod region;
pub mod synth;

mod par;

pub use error::{Error, Result};
