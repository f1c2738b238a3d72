//! Synthesize a two-component signal and look at its Wigner-Ville distribution.
//!
//! `cargo run --example synthesis_and_wvd`

use tfnet::{tfr, Component, NoiseLevel, PhaseLaw, SignalModel};

fn main() -> tfnet::Result<()> {
    let len = 128;
    let model = SignalModel::new(
        vec![
            Component::unit(PhaseLaw::linear(0.05, 0.2)),
            Component::unit(PhaseLaw::Sinusoidal { fc: 0.35, fd: 0.05, r: 1.0, psi: 0.0 }),
        ],
        len,
    )?;
    let clean = model.synthesize();
    let noisy = clean.add_noise(NoiseLevel::db(5.0), 7);
    println!("mean power: clean {:.4}, noisy {:.4}", clean.mean_power(), noisy.mean_power());

    let w = tfr::wvd(&clean)?;
    let ideal = tfr::ideal_tfr(&model)?;
    for n in (0..len).step_by(16) {
        let row = w.row(n);
        let peak = (0..len).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        let truth: Vec<usize> = (0..len).filter(|&k| ideal[(n, k)] > 0.0).collect();
        println!(
            "n={n:3}  WVD peak bin {peak:3} ({:.3} cycles/sample)  ideal bins {truth:?}",
            peak as f64 / (2 * len) as f64
        );
    }
    // Energy between the two autoterms is crossterm.
    let crossterm: f64 = (0..len).map(|n| w[(n, 60)].abs()).sum::<f64>() / len as f64;
    println!("mean |W| on bin 60 (between the components): {crossterm:.2}");
    Ok(())
}
