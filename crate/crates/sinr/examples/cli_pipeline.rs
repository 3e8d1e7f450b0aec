//! Driving the command-line front end programmatically.
//!
//! Builds a tiny training signal, then runs the same seven commands the
//! `sinr` binary exposes — train, sweep, diagnose, compress, decompress,
//! eval, pipeline — through the library's CLI entry point, leaving all
//! artifacts in a temp directory.

use sinr::signals::{gaussian_bumps_image, save_image};

fn run(step: &str, args: &[&str]) {
    let argv: Vec<String> = args.iter().map(|a| a.to_string()).collect();
    println!("--- sinr {}", args.join(" "));
    let code = sinr::cli::run(&argv);
    assert_eq!(code, 0, "step '{step}' exited with {code}");
}

fn main() {
    let dir = std::env::temp_dir().join(format!("sinr-cli-demo-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = |name: &str| dir.join(name).to_str().unwrap().to_string();

    save_image(&gaussian_bumps_image(48, 48, 4, 9).unwrap(), dir.join("bumps.pgm").as_path())
        .unwrap();

    run("train", &[
        "train", "--input", &p("bumps.pgm"), "--output", &p("net.ckpt"),
        "--hidden-layers", "2", "--width", "64", "--epochs", "120", "--seed", "3",
    ]);
    run("sweep", &[
        "sweep", "--input", &p("net.ckpt"), "--output", &p("sweep.csv"), "--k2-factor", "64",
    ]);
    run("diagnose", &["diagnose", "--input", &p("net.ckpt"), "--output", &p("moments.csv")]);
    run("compress", &[
        "compress", "--input", &p("net.ckpt"), "--output", &p("net.sinr"),
        "--k2-factor", "64", "--rel-tol", "0.03", "--master-seed", "5",
    ]);
    run("decompress", &["decompress", "--input", &p("net.sinr"), "--output", &p("back.ckpt")]);
    run("eval", &[
        "eval", "--input", &p("net.sinr"), "--reference", &p("bumps.pgm"),
        "--output", &p("metrics.csv"),
    ]);
    run("pipeline", &[
        "pipeline", "--input", &p("bumps.pgm"), "--output", &p("oneshot.sinr"),
        "--hidden-layers", "2", "--width", "64", "--epochs", "120", "--seed", "3",
        "--s", "8", "--k2-factor", "8", "--master-seed", "5",
    ]);

    println!("--- artifacts in {}", dir.display());
    for entry in std::fs::read_dir(&dir).unwrap() {
        let entry = entry.unwrap();
        println!("{:>9} bytes  {}", entry.metadata().unwrap().len(), entry.file_name().to_string_lossy());
    }
}
