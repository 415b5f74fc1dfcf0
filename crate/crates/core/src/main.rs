fn main() {
    std::process::exit(varwave::cli::run(std::env::args_os()));
}
