fn main() {
    std::process::exit(mcdimpute_cli::run(std::env::args_os()));
}
