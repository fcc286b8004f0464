//! Sofic approximations, the sofic graph and its block decomposition,
//! microstate spaces and topological sofic entropy.

mod graph;
mod map;
mod microstate;
mod params;

pub use graph::{
    build_sofic_graph, decompose, exhaustive_maximal_families, verify_decomposition, Block,
    Decomposition, ExhaustiveSummary, SoficGraph, EXHAUSTIVE_MAX_N,
};
pub use map::{quality, PairQuality, QualityReport, SoficMap, SoficModel};
pub use microstate::{
    microstate_metric, microstate_space, sofic_entropy_estimate, Microstate, MicrostateMode,
    MicrostateOptions, MicrostateSpace, SoficEntropyParams, SoficEntropyReport, SoficRow,
};
pub use params::{binary_entropy, theorem1_parameters, Candidate, Check, Theorem1Parameters};
