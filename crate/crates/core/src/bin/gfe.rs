fn main() {
    std::process::exit(gfe::cli::run(std::env::args_os()));
}
