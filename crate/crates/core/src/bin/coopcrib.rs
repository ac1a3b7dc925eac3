fn main() {
    std::process::exit(coopcrib::cli::main_with(std::env::args_os()));
}
