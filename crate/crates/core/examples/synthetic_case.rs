//! Simulates the four-group benchmark network for each compatibility case
//! and prints its link density per time step.
//!
//! `cargo run --release --example synthetic_case -- [n] [T]`

use dim3::generator::{case_matrix, generate_fixed, synthetic_truth};

fn main() -> dim3::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(20);
    let t = args.next().unwrap_or(3);
    for case in 1..=4 {
        let w = case_matrix(case)?;
        let bundle = generate_fixed(&synthetic_truth(case, n)?, n, t, 2024)?;
        let per_step: Vec<String> = (0..t)
            .map(|tt| {
                let ones = bundle
                    .data
                    .pairs()
                    .filter(|&(i, j, s)| s == tt && bundle.data.get(i, j, s))
                    .count();
                format!("{:.3}", ones as f64 / bundle.data.pairs_per_time() as f64)
            })
            .collect();
        println!("case {case}: W = {:?}", w.rows());
        println!("        density by step: {}", per_step.join(" "));
    }
    Ok(())
}
