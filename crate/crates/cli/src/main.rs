fn main() {
    std::process::exit(avta_cli::run(std::env::args_os()));
}
