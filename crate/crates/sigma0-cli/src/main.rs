fn main() {
    std::process::exit(sigma0_cli::run(std::env::args_os()));
}
