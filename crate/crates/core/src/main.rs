fn main() {
    std::process::exit(dirac_spectral::cli::run(std::env::args_os()));
}
