//! Orbifold data, Wilson-line categories C_A and Drinfeld-centre cross-checks for
//! skeletal fusion categories.

pub mod centre;
pub mod fusion_data;
pub mod graded_vect;
pub mod locmod;
pub mod numeric;
pub mod orbifold;
pub mod report;
pub mod wilson;

pub use fusion_data::{CategoryError, ModularData, SkeletalCategory};
pub use graded_vect::{GradedBimodule, GradedError, GradedMap, GradedTrimodule};
pub use numeric::{NumericError, Tolerance, C64};
pub use orbifold::{OrbifoldDatum, OrbifoldError};
pub use report::{Check, ConditionReport};
pub use wilson::{WilsonError, WilsonObject};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Category(#[from] CategoryError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Orbifold(#[from] OrbifoldError),
    #[error(transparent)]
    Wilson(#[from] WilsonError),
    #[error(transparent)]
    Centre(#[from] centre::CentreError),
    #[error(transparent)]
    Locmod(#[from] locmod::LocmodError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
