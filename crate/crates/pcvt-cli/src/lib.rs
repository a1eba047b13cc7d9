//! Reproducible experiment harness for the pcvt library: seeded batches,
//! K-sweeps, CSV/JSON emission, SVG rendering and admissibility checks.

pub mod admissible;
pub mod config;
pub mod export;
pub mod render;
pub mod runner;

pub use admissible::{admissible_hex_n, hex_decomposition, AdmissibleCheck};
pub use config::{
    DeltaRuleSpec, DomainKind, DomainSpec, ExperimentConfig, InnerSpec, MethodSpec, OUT_DIR_ENV,
};
pub use export::{read_csv_file, read_json_file, write_csv_file, write_json_file, BatchDocument};
pub use render::{render_svg, render_svg_string, RenderOptions};
pub use runner::{run_batch, run_batch_with, run_single, sweep_k, ResultRecord, StageRow, SweepPoint};
