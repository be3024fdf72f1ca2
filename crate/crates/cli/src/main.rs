fn main() {
    std::process::exit(mmw_cli::main_with(std::env::args_os()));
}
