fn main() {
    std::process::exit(nclandau::cli::run(std::env::args_os()));
}
