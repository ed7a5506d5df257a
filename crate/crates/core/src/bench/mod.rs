//! Monte Carlo experiment drivers, metrics, configuration and CSV output.
//!
//! Every output is a pure function of the [`SweepConfig`] (including its
//! seed): trials draw scenes and noise from sub-seeds derived with
//! [`derive_seed`], run in parallel, and are aggregated in trial order.

mod config;
mod experiments;
mod io;
mod metrics;
mod scene;

pub use config::{SweepConfig, CONFIG_KEYS};
pub use experiments::{
    make_projection, projection_coherence, run_coherence_experiment, run_design, run_mse_sweep, CoherenceRow,
    SweepResult, SweepRow,
};
pub use io::{
    coherence_csv, complex_matrix_csv, emit_csv, estimate_csv, format_real, parse_coherence_csv, parse_complex_matrix,
    parse_sweep_csv, read_complex_matrix, read_sweep_csv, sweep_csv, trace_csv, write_coherence_csv,
    write_complex_matrix, write_estimate_csv, write_trace_csv, COHERENCE_HEADER, ESTIMATE_HEADER, MAX_MATRIX_ENTRIES,
    SWEEP_HEADER, TRACE_HEADER,
};
pub use metrics::{min_cost_assignment, mse_frequencies, wrapped_difference};
pub use scene::{derive_seed, draw_scene, min_circular_gap};
