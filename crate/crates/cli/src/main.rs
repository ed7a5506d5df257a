fn main() {
    std::process::exit(gomp_cli::run(std::env::args_os()));
}
