fn main() {
    std::process::exit(eos::cli::main_with(std::env::args_os()));
}
