//! Benchmark problem generators, the suite runner, and the summary
//! statistics used to compare solver configurations.

pub mod generators;
pub mod profile;
pub mod runner;

pub use generators::{gen_l1_pca, gen_lasso, gen_logreg, Family, GeneratorError, GeneratorSpec};
pub use profile::{dm_profile, performance_ratios, sgm, tau_grid, ProfileError, Ratios, TimingTable};
pub use runner::{run_suite, write_artifacts, BenchError, SolverConfig, SuiteReport, SuiteSpec};
