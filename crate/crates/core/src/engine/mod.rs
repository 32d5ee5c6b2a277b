//! Simulation of the forward-curve dynamics and bond pricing.

pub mod drift;
pub mod montecarlo;
pub mod pricing;
pub mod simulate;

pub use drift::{hjm_drift, hjm_drift_alternative, Volatility};
pub use montecarlo::{martingale_test, MartingaleReport};
pub use pricing::{bank_account, bond_price};
pub use simulate::{
    coarsen, reduced_model, sample_increments, simulate_full, simulate_reduced, Engine, ReducedModel,
    ReducedPath, SimulationResult, OVERFLOW_GUARD,
};
