fn main() {
    std::process::exit(bozk_cli::execute(std::env::args_os()));
}
