fn main() {
    std::process::exit(fraxion::cli::run(std::env::args_os()));
}
