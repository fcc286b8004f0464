pub mod caps;
mod codec;
pub mod error;
pub mod group;
pub mod measure;
pub mod metric;
pub mod report;
pub mod rng;
pub mod sofic;
pub mod subshift;
pub mod topological;
