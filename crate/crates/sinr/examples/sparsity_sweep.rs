//! The sparsity/error/size trade-off for one trained weight matrix.
//!
//! Sweeps the per-vector sparsity s over its whole feasible range
//! (2s < k1) and prints the worst relative reconstruction error and
//! projected payload at every grid point — the curve behind the codec's
//! automatic s selection.

use sinr::inr::{
    coordinate_grid, init_network, train, Activation, ActivationKind, Architecture, TrainConfig,
};
use sinr::signals::gaussian_bumps_image;
use sinr::sparse::{sweep_s, CodingParams};

fn main() {
    let img = gaussian_bumps_image(64, 64, 5, 3).unwrap();
    let mut activation = Activation::new(ActivationKind::Sine);
    activation.omega0 = 30.0;
    let arch = Architecture {
        input_dim: 2,
        output_dim: 1,
        hidden_layers: 1,
        width: 64,
        activation,
        pe_levels: 0,
    };
    let mut net = init_network(&arch, 0).unwrap();
    let coords = coordinate_grid(&[64, 64]).unwrap();
    let cfg = TrainConfig { epochs: 120, ..TrainConfig::for_activation(ActivationKind::Sine) };
    train(&mut net, &coords, &img.to_targets(), &cfg).unwrap();

    // The middle 64x64 matrix, coded column by column.
    let hidden = &net.weights[1];
    let params = CodingParams { k2_factor: 16, ..Default::default() };
    let outcome = sweep_s(hidden, 0xA70B, 0.02, &params).unwrap();

    println!(
        "matrix 64x64, mode {:?}, dictionary {}x{}",
        outcome.mode, outcome.k1, outcome.k2
    );
    println!("{:>4} {:>14} {:>10}", "s", "worst rel err", "bytes");
    for point in &outcome.curve {
        let marker = if point.s == outcome.s { "  <- chosen" } else { "" };
        println!(
            "{:>4} {:>14.5} {:>10}{marker}",
            point.s, point.worst_rel_err, point.payload_bytes
        );
    }
    println!(
        "chosen s = {} (error {:.5}, tolerance met: {})",
        outcome.s, outcome.worst_rel_err, outcome.met
    );

    // The curve is monotone: more atoms never hurt the fit, and the
    // payload grows linearly with s.
    for pair in outcome.curve.windows(2) {
        assert!(pair[1].worst_rel_err <= pair[0].worst_rel_err + 1e-12);
        assert!(pair[1].payload_bytes >= pair[0].payload_bytes);
    }
}
