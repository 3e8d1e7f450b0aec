//! Fit a sine-activated coordinate network to a procedural image.
//!
//! A small SIREN-style MLP learns the map (y, x) -> gray value over a 64x64
//! Gaussian-bump image, with full-batch Adam. Prints the loss trajectory and
//! the final reconstruction PSNR.

use sinr::inr::{
    coordinate_grid, init_network, train, Activation, ActivationKind, Architecture, TrainConfig,
};
use sinr::signals::{gaussian_bumps_image, psnr, psnr_from_mse, render_inr_image};

fn main() {
    let img = gaussian_bumps_image(64, 64, 5, 3).unwrap();

    let mut activation = Activation::new(ActivationKind::Sine);
    activation.omega0 = 30.0;
    let arch = Architecture {
        input_dim: 2,
        output_dim: 1,
        hidden_layers: 2,
        width: 32,
        activation,
        pe_levels: 0,
    };

    let mut net = init_network(&arch, 0).unwrap();
    let coords = coordinate_grid(&[img.height(), img.width()]).unwrap();
    let targets = img.to_targets();

    let cfg = TrainConfig { epochs: 400, ..TrainConfig::for_activation(ActivationKind::Sine) };
    let result = train(&mut net, &coords, &targets, &cfg).unwrap();

    for epoch in (0..result.loss_history.len()).step_by(100) {
        let loss = result.loss_history[epoch];
        println!("epoch {epoch:4}  mse {loss:.3e}  ({:.2} dB)", psnr_from_mse(loss));
    }

    let rendered = render_inr_image(&net, img.width(), img.height()).unwrap();
    let db = psnr(&img, &rendered).unwrap();
    println!("final render: {db:.2} dB over {} pixels", img.pixels().len());
    assert!(db > 25.0, "a smooth 64x64 target should fit easily");
}
