fn main() {
    std::process::exit(nonspread_cli::run(std::env::args_os()));
}
