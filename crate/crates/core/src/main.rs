fn main() {
    std::process::exit(crackgen::cli::run(std::env::args_os()));
}
