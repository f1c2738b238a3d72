//! Sparse-recovery baselines on the reference case studies.
//!
//! `cargo run --release --example baselines`

use tfnet::baselines::{self, L1ProxConfig, OmpConfig};
use tfnet::eval::{self, CaseStudy, CASE_LEN};
use tfnet::tfr;

fn main() -> tfnet::Result<()> {
    for case in CaseStudy::ALL {
        let model = case.model();
        let series = model.synthesize();
        let label = tfr::ideal_tfr(&model)?;

        let omp = baselines::omp_tfr(&series, &OmpConfig::for_len(CASE_LEN))?;
        let run = baselines::l1prox_run(&series, &L1ProxConfig::default())?;
        println!(
            "case {case}: OMP {:6.2} dB | l1-prox {:6.2} dB after {} iterations (lambda {:.3e}, objective {:.4e} -> {:.4e})",
            eval::nmse_trial_db(&label, &omp)?,
            eval::nmse_trial_db(&label, &run.image)?,
            run.iterations(),
            run.lambda,
            run.objective[0],
            run.objective.last().unwrap(),
        );
    }
    Ok(())
}
