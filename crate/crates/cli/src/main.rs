fn main() {
    std::process::exit(bdiv_cli::run(std::env::args_os()));
}
