//! Render the ideal TFR, the WVD and the l1-prox estimate of case 3 as PGM images.
//!
//! `cargo run --release --example render -- [out_dir]`

use std::path::PathBuf;

use tfnet::baselines::{self, L1ProxConfig};
use tfnet::eval::{self, CaseStudy};
use tfnet::{tfr, NoiseLevel};

fn main() -> tfnet::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("tfnet-render"));
    std::fs::create_dir_all(&out).expect("output directory");
    let case = CaseStudy::Case3;
    let series = eval::trial_series(case, NoiseLevel::db(5.0), 0, 0);
    let images = [
        ("ideal", tfr::ideal_tfr(&case.model())?),
        ("wvd", tfr::normalize_input(&tfr::wvd(&series)?)),
        ("l1prox", baselines::l1prox_tfr(&series, &L1ProxConfig::default())?),
    ];
    for (name, image) in &images {
        let path = out.join(format!("case3_{name}.pgm"));
        eval::render_log_image(image, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
