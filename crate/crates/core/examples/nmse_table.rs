//! NMSE comparison table of the non-learned methods, as CSV.
//!
//! `cargo run --release --example nmse_table -- [trials]`

use tfnet::baselines::{L1ProxConfig, OmpConfig};
use tfnet::eval::{self, CaseStudy, MethodSpec, CASE_LEN};
use tfnet::NoiseLevel;

fn main() -> tfnet::Result<()> {
    let trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let methods = [
        MethodSpec::Wvd,
        MethodSpec::Omp(OmpConfig::for_len(CASE_LEN)),
        MethodSpec::L1Prox(L1ProxConfig::default()),
    ];
    let rows = eval::comparison_table(&CaseStudy::ALL, &[NoiseLevel::NOISE_FREE, NoiseLevel::db(5.0)], &methods, trials, 0)?;
    print!("{}", eval::to_csv(&rows));
    Ok(())
}
