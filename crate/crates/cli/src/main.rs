fn main() {
    std::process::exit(volterra_cli::main_impl(std::env::args_os()));
}
