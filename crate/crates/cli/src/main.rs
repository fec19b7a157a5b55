fn main() {
    std::process::exit(calabi_cli::main_with(std::env::args_os()));
}
