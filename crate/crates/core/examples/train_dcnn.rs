//! Train a small network on generated WVD/ideal-TFR pairs.
//!
//! `cargo run --release --example train_dcnn`
//!
//! The reference network (12 layers, 40 channels) is slow on a CPU, so this
//! uses a reduced one; `tfnet train` exposes the full configuration.

use tfnet::dataset::{self, SignalClass};
use tfnet::dcnn::{self, FeatureMap, Network, Sample, TrainConfig};
use tfnet::eval::{self, CaseStudy, Estimator};
use tfnet::NoiseLevel;

fn samples(class: SignalClass, count: usize, seed: u64) -> tfnet::Result<Vec<Sample<f32>>> {
    dataset::draw_specs(class, NoiseLevel::NOISE_FREE, count, seed)?
        .iter()
        .map(|spec| {
            let (x, y) = dataset::build_sample(spec)?;
            Ok(Sample {
                input: FeatureMap::from_image(&x),
                label: FeatureMap::from_image(&y),
            })
        })
        .collect()
}

fn main() -> tfnet::Result<()> {
    let train = samples(SignalClass::TwoNlfm, 24, 1)?;
    let val = samples(SignalClass::TwoNlfm, 8, 2)?;
    let net = Network::<f32>::init(6, 16, 5, 3)?;
    println!("{} parameters, receptive field {}", net.parameter_count(), net.receptive_field());

    let config = TrainConfig {
        batch_size: 8,
        epochs: 10,
        ..Default::default()
    };
    let outcome = dcnn::train(net, &train, &val, &config, |e| {
        println!("epoch {:2}  train {:.3e}  val {:.3e}", e.epoch, e.train_loss, e.val_loss);
    })?;
    println!("best epoch {} (val {:.3e})", outcome.best_epoch, outcome.best_val_loss);

    let path = std::env::temp_dir().join("tfnet-example.tfw");
    dcnn::save_weights(&outcome.network, &path)?;
    let net = dcnn::load_weights(&path)?;
    let report = eval::run_case(CaseStudy::Case2, &Estimator::Dcnn(net.into()), NoiseLevel::NOISE_FREE, 1, 0)?;
    println!("case 2 NMSE after this short run: {:.2} dB", report.nmse_db);
    Ok(())
}
