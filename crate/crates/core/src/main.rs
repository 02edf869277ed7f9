fn main() {
    std::process::exit(jetcocycle::cli::run(std::env::args_os()));
}
