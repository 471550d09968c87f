fn main() {
    std::process::exit(spiked::cli::run(std::env::args_os()));
}
