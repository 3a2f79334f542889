fn main() {
    std::process::exit(randla::cli::run(std::env::args_os()));
}
