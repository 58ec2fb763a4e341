//! Seeded instance generation and the LP versus branch-and-bound timing run.

mod bench;
mod generate;

pub use bench::{
    median_times, render_table, run_benchmark, run_cell, BenchCell, BenchConfig, BenchRecord, OBJECTIVE_TOLERANCE,
    TABLE1_KS, TABLE1_SIZES,
};
pub use generate::{gen_kmedoid_instance, gen_points, gen_transport_instance};
