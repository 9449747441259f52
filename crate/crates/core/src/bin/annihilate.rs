fn main() {
    std::process::exit(annihilate::cli::run_cli(std::env::args_os()));
}
