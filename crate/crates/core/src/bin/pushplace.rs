fn main() {
    std::process::exit(pushplace::cli::main_with_args(std::env::args_os()));
}
