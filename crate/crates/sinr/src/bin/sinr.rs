fn main() {
    sinr::cli::configure_threads();
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(sinr::cli::run(&args));
}
