fn main() {
    std::process::exit(kronblock::cli::run(std::env::args_os()));
}
