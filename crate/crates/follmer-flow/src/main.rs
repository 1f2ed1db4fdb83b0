fn main() {
    std::process::exit(follmer_flow::cli::main_with(std::env::args_os()));
}
