//! Closed-form quasistatic and sudden-limit results, optimal allocations and
//! random allocation sweeps.

mod closed_form;
mod optimize;
mod sudden;
mod sweep;

pub use crate::propagators::FormulaMode;
pub use closed_form::{
    adiabat_time_floor, carnot_efficiency, efficiency_hierarchy, endoreversible_efficiency,
    entropy_production_quasistatic, f_transport, g_entropy, g_work, quasistatic_power_bound, quasistatic_work,
    sudden_efficiency, EfficiencyHierarchy,
};
pub use optimize::{
    isochore_allocation_residual, optimal_compression, optimal_cycle_time_residual, optimal_isochore_allocation,
    optimal_time_partition, produced_work, CompressionGrid, CompressionMethod, CompressionOptimum, Regime,
};
pub use sudden::{
    friction_upper_bound, friction_upper_bound_constructive, sudden_cycle, sudden_work, sudden_work_diagnostics,
    SuddenCycle, SuddenWorkDiagnostics,
};
pub use sweep::{
    nonadiabaticity, random_sweep, sample_allocation, sweep_record, SweepConfig, SweepRecord, SweepTags,
};
