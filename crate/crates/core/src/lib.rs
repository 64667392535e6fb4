//! Single-row facility layout: exact objective arithmetic, swap/insertion
//! neighbourhoods, exact re-optimization of moving windows and a multi-start
//! simulated annealing driver that ties them together.

pub mod error;
pub mod eval;
pub mod exact;
pub mod harness;
pub mod instance;
pub mod local_search;
pub mod moves;
pub mod msa;
pub mod window;

pub use error::{ConfigError, InstanceError, ParseError, SolveError};
pub use eval::{objective, Layout, WindowBounds};
pub use instance::{generate_random_instance, parse_instance, HalfUnits, Instance};
pub use moves::{apply_move, GainCache, Move};
pub use exact::betweenness::{build_betweenness_model, create_order, encode_order, BetweennessModel};
pub use exact::export::{export_model, ModelFormat};
pub use exact::{solve_window_bruteforce, solve_window_dp, Backend, WindowSolution};
pub use local_search::{ls_insert, ls_swap, ls_wind, SearchState, SearchStats};
pub use window::{extract_window_subproblem, orient_window, wind_met, WindowConfig, WindowSubproblem};
pub use msa::{msa, solve, Deadline, MsaOutcome, SaParams};
pub use harness::{emit_report, run_experiment, Config, ReportFormat, RunReport};
