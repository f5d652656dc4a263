fn main() {
    std::process::exit(starstab::cli::run(std::env::args_os()));
}
