fn main() {
    std::process::exit(d2d_secrecy::harness::cli::run(std::env::args_os()));
}
