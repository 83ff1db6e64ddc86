//! Writes a simulated dataset in the text format, reads it back, and loads
//! the bundled 18-node fixture.
//!
//! `cargo run --release --example dataset_io`

use std::path::Path;

use dim3::generator::{format_dataset, generate_fixed, load_dataset, save_dataset, synthetic_truth};

fn main() -> dim3::Result<()> {
    let mut bundle = generate_fixed(&synthetic_truth(2, 4)?, 4, 2, 3)?;
    bundle.name = "tiny".into();
    let text = format_dataset(&bundle);
    println!("{text}");
    let path = std::env::temp_dir().join(format!("dim3-io-{}.txt", std::process::id()));
    save_dataset(&bundle, &path)?;
    let back = load_dataset(&path)?;
    println!(
        "round trip exact: {}",
        back.data == bundle.data && back.truth == bundle.truth
    );
    let _ = std::fs::remove_file(&path);

    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sampson_style.txt");
    let f = load_dataset(&fixture)?;
    println!(
        "fixture '{}': {} nodes, {} steps, {} links, first nodes {:?}",
        f.name,
        f.data.n(),
        f.data.times(),
        f.data.ones(),
        &f.node_labels[..3.min(f.node_labels.len())]
    );
    Ok(())
}
