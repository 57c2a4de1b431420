fn main() {
    std::process::exit(cartan::cli::main_with_args(std::env::args_os()));
}
