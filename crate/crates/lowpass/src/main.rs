fn main() {
    std::process::exit(lowpass::cli::run(std::env::args_os()));
}
