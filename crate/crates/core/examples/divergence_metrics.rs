//! Compare two speed samples: shared-bin histograms, the four divergences
//! and the accuracy of the mean.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use twinway::validate::{accuracy, build_histogram, Divergences};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let reference: Vec<f64> = Normal::new(30.0, 2.0)?
        .sample_iter(&mut rng)
        .take(2000)
        .collect();
    for (label, mean, sd) in [
        ("same law", 30.0, 2.0),
        ("slower", 28.0, 2.0),
        ("wider", 30.0, 4.0),
    ] {
        let twin: Vec<f64> = Normal::new(mean, sd)?
            .sample_iter(&mut rng)
            .take(2000)
            .collect();
        let (r, t) = build_histogram(&reference, &twin)?;
        let d = Divergences::between(&r, &t)?;
        let mean_acc = accuracy(
            twin.iter().sum::<f64>() / twin.len() as f64,
            reference.iter().sum::<f64>() / reference.len() as f64,
        )
        .unwrap_or(f64::NAN);
        println!(
            "{label:>9}: {} bins of {:.3} m/s | KL {:.4} JS {:.4} W1 {:.3} m/s B {:.4} | mean accuracy {:.2}%",
            r.bins(),
            r.bin_width(),
            d.kl,
            d.js,
            d.wasserstein,
            d.bhattacharyya,
            mean_acc
        );
    }
    Ok(())
}
