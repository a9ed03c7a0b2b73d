fn main() {
    std::process::exit(bessel_models::cli::main_with_args(std::env::args_os()));
}
