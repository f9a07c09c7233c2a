fn main() {
    std::process::exit(ouda::cli::run(std::env::args_os()));
}
