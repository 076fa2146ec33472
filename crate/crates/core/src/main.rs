fn main() {
    std::process::exit(loewner_pencil::cli::run(std::env::args_os()));
}
