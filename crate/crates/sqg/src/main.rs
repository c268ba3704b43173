fn main() {
    std::process::exit(sqg::cli::run(std::env::args_os()));
}
