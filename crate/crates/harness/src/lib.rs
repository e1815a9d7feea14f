//! Instance generation, experiment orchestration and file formats for the
//! `lpirl` command-line tool.

pub mod config;
pub mod experiment;
pub mod instance;
pub mod trace;

pub use config::{parse_spec, ExperimentSpec};
pub use experiment::{run_experiment, ResultRow};
pub use instance::{generate_orthonormal_instance, generate_uniform_instance, load_instance, serialize_instance, Instance, InstanceKind};
