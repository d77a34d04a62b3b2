fn main() {
    std::process::exit(flat3::cli::run(std::env::args_os()));
}
