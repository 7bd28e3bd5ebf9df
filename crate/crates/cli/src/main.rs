fn main() {
    std::process::exit(framegate_cli::run(std::env::args_os()));
}
