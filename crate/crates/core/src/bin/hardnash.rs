fn main() {
    std::process::exit(hardnash::cli::run(std::env::args_os()));
}
