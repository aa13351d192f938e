//! Monte Carlo estimates for sizes beyond exact enumeration: Metropolis chains,
//! parallel tempering, thermodynamic integration and disorder averages.

mod chain;
mod ensemble;
mod tempering;

pub use chain::{CacheBackend, ChainState, Sampler};
pub use ensemble::{average_records, disorder_average, disorder_map, worker_pool, DisorderAverage};
pub use tempering::{
    default_ladder, mc_overlap_statistics, parallel_tempering_run, respace_ladder, thermo_integration_free_energy,
    BurnIn, TemperingConfig, TemperingResult, ThermoIntegration, AUDIT_TOLERANCE, DEFAULT_LADDER_NODES,
};
