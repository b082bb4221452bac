fn main() {
    std::process::exit(tempofact_cli::run(std::env::args_os()));
}
