fn main() {
    std::process::exit(rh_twin::cli::run(std::env::args_os()));
}
