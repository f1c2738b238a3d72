//! The ambiguity function of a signal, and its relation to the WVD.
//!
//! `cargo run --example ambiguity_function`

use tfnet::tfr::{self, AfTransform};
use tfnet::{Component, PhaseLaw, SignalModel};

fn main() -> tfnet::Result<()> {
    let len = 128;
    let series = SignalModel::new(
        vec![Component::unit(PhaseLaw::tone(0.1)), Component::unit(PhaseLaw::tone(0.3))],
        len,
    )?
    .synthesize();

    let af = tfr::af(&series)?;
    // Autoterms sit at zero Doppler; the crossterms are pushed out to ±(f2 - f1).
    let doppler_energy: Vec<f64> = (0..len).map(|d| af.row(d).iter().map(|z| z.norm_sqr()).sum()).collect();
    let mut strongest: Vec<usize> = (0..len).collect();
    strongest.sort_by(|&a, &b| doppler_energy[b].total_cmp(&doppler_energy[a]));
    println!("strongest Doppler rows: {:?}", &strongest[..3]);

    let transform = AfTransform::new(len);
    let from_wvd = transform.forward(&tfr::wvd_complex(&series)?);
    let diff = af.as_slice().iter().zip(from_wvd.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("max |AF - F(WVD)| = {diff:.2e}");

    let back = transform.adjoint(&af);
    let w = tfr::wvd(&series)?;
    let diff = back.as_slice().iter().zip(w.as_slice()).map(|(a, b)| (a.re - b).abs()).fold(0.0, f64::max);
    println!("max |F*(AF) - WVD| = {diff:.2e}");
    Ok(())
}
