fn main() {
    std::process::exit(danzer::cli::run(std::env::args_os()));
}
