fn main() {
    std::process::exit(wsqueeze::cli::main_entry(std::env::args_os()));
}
