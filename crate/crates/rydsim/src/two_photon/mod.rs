//! Two-photon relative-coordinate propagation, bound states and the
//! blockade-based single-photon source.

mod bound;
mod evolve;
mod source;

pub use bound::{find_bound_states, BoundStateSet};
pub use evolve::{
    dispersive_potential, dissipative_potential, evolve_dispersive, evolve_dispersive_from, evolve_dissipative,
    EvolveOptions, TwoPhotonAmplitude, TwoPhotonGrid,
};
pub use source::{source_density_matrix, PulseShape, SourceOptions, SourceResult};
