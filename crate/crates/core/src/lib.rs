pub mod consensus;
pub mod engine;
pub mod error;
pub mod ingest;
pub mod loss;
pub mod models;
pub mod point;
pub mod pose;
pub mod quality;
pub mod sampling;

pub use error::{Error, Result};
pub use loss::{LossFunction, LossKind};
pub use models::{ModelInstance, ModelType};
pub use point::{DataPoint, PointSet};
