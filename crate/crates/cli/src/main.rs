fn main() {
    std::process::exit(seqdec_cli::run(std::env::args_os()));
}
