fn main() {
    std::process::exit(halfwalk_cli::run(std::env::args_os()));
}
