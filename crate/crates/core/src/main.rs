fn main() {
    std::process::exit(cinterp::cli::run(std::env::args_os()));
}
