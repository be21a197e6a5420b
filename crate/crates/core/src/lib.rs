//! Partial information decomposition of the past→future mutual information
//! of Boolean networks, and how its synergy/redundancy balance changes when
//! a system is described at a coarser scale.
//!
//! - [`discrete`]: distributions, TPMs, stationary distributions, temporal MI
//! - [`lattice`]: the redundancy lattice of source antichains and its layers
//! - [`pid`]: `I_WB` redundancy, Möbius inversion, PI spectrum and synergy bias
//! - [`boolnet`]: Boolean networks and the logic-gate circuits
//! - [`expansion`] / [`ensemble`]: MI-preserving node expansion and random ensembles
//! - [`causal`]: effective information, determinism and degeneracy

pub mod boolnet;
pub mod causal;
pub mod discrete;
pub mod ensemble;
pub mod error;
pub mod expansion;
pub mod lattice;
pub mod pid;
pub mod stats;

pub use boolnet::{
    build_gate_pair, induced_past_distribution, network_pid, network_to_tpm, BoolNetwork, Element,
    ExoPolicy, GateCircuitPair, GateKind,
};
pub use causal::{coarse_grain_tpm, effective_information, EiReport, StatePartition};
pub use discrete::{
    entropy, entropy_of, stationary_distribution, temporal_mutual_information, JointDistribution,
    StateDistribution, StochasticMatrix, Tpm,
};
pub use ensemble::{
    generate_deterministic_tpm, generate_gaussian_tpm, measure_scale, near_deterministic_tpm,
    run_expansion_experiment, sample_fixed_point_free_map, EnsembleKind, EnsembleSpec,
    ExpansionTable, ExperimentSummary, ScaleMeasure, SkippedSystem, SystemResult,
};
pub use error::{Error, Result};
pub use expansion::{expand_node, merge_children, ExpansionRecord};
pub use lattice::{enumerate_atoms, precedes, Antichain, PiLattice, SourceSubset};
pub use pid::{
    decompose, redundancy_wb, specific_information, spectrum_and_bias, temporal_pid, PiSpectrum,
    PidResult, SourcesTarget,
};
pub use stats::pearson;
