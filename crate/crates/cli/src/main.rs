fn main() {
    std::process::exit(akconj_cli::run(std::env::args_os()));
}
