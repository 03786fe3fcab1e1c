fn main() {
    std::process::exit(qrenew_cli::run(std::env::args_os()));
}
