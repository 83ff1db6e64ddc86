//! Synthetic data and dataset files.

mod io;
mod synth;
mod truth;

pub use io::{format_dataset, load_dataset, parse_dataset, save_dataset};
pub use synth::{gem_sticks, generate_fixed, generate_mti, generate_mtv, DatasetBundle, LatentDraw, STICK_TOLERANCE};
pub use truth::{case_matrix, node_group, synthetic_truth, GroundTruth, GROUP_MEMBERSHIP};
