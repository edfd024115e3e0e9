//! Scenario files, presets, the model registry and the simulation driver.

pub mod config;
pub mod output;
pub mod presets;
pub mod registry;
pub mod simulate;

pub use config::{load_config, GlobalConfig, ModuleSpec, MonetaryUnit, OutputConfig, ScenarioConfig};
pub use output::{emit_outputs, read_dataset, write_dataset, RunManifest};
pub use presets::{preset, PRESET_NAMES};
pub use registry::{BuildContext, ModelRegistry};
pub use simulate::{run_simulation, Dataset, Scenario};
