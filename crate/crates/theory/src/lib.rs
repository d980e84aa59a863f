//! Closed-form and numerical theory for distributed sequence memories:
//! retrieval accuracy integrals, sensitivity laws for every noise source,
//! information content and capacity for symbolic and analog data, the
//! diffusion analysis of clipped and tanh networks, forgetting time
//! constants, collision-limited capacity, and reference curves from
//! earlier analyses for comparison.

pub mod accuracy;
pub mod collision;
pub mod diffusion;
pub mod error;
pub mod info;
pub mod optimize;
pub mod query;
pub mod sensitivity;
pub mod special;
pub mod timeconst;
pub mod white;

pub use accuracy::{p_corr_numeric, AccuracyGrid};
pub use error::TheoryError;
pub use query::{TheoryQuery, TheoryResult};
