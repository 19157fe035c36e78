fn main() {
    std::process::exit(partcong::cli::run(std::env::args_os()));
}
