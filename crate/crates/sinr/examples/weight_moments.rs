//! Why random dictionaries work: trained INR weights look Gaussian.
//!
//! Compares per-layer weight moments at initialization (uniform, excess
//! kurtosis near -1.2) against the same network after training, where the
//! hidden-layer distributions move toward Gaussian shape (skewness and
//! excess kurtosis near 0). That drift is the empirical license for coding
//! weight vectors over random Gaussian atoms.

use sinr::inr::{
    coordinate_grid, init_network, train, weight_gaussianity, Activation, ActivationKind,
    Architecture, TrainConfig,
};
use sinr::signals::gaussian_bumps_image;

fn print_moments(tag: &str, net: &sinr::inr::Network) {
    println!("{tag}");
    println!("{:>6} {:>8} {:>10} {:>10} {:>10}", "layer", "count", "std", "skew", "exkurt");
    for m in weight_gaussianity(net) {
        println!(
            "{:>6} {:>8} {:>10.4} {:>10.3} {:>10.3}",
            m.layer, m.count, m.std, m.skewness, m.excess_kurtosis
        );
    }
}

fn main() {
    let img = gaussian_bumps_image(64, 64, 5, 3).unwrap();
    let mut activation = Activation::new(ActivationKind::Sine);
    activation.omega0 = 30.0;
    let arch = Architecture {
        input_dim: 2,
        output_dim: 1,
        hidden_layers: 2,
        width: 64,
        activation,
        pe_levels: 0,
    };

    let mut net = init_network(&arch, 0).unwrap();
    print_moments("at initialization (uniform fan-in init):", &net);

    let coords = coordinate_grid(&[64, 64]).unwrap();
    let cfg = TrainConfig { epochs: 300, ..TrainConfig::for_activation(ActivationKind::Sine) };
    train(&mut net, &coords, &img.to_targets(), &cfg).unwrap();
    print_moments("after 300 epochs:", &net);

    // Uniform init should read as strongly platykurtic on the wide layers.
    let init_moments = weight_gaussianity(&init_network(&arch, 0).unwrap());
    for m in init_moments.iter().filter(|m| m.count >= 1000) {
        assert!(
            (m.excess_kurtosis - (-1.2)).abs() < 0.2,
            "uniform init has excess kurtosis near -6/5"
        );
    }
}
