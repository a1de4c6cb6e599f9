fn main() {
    std::process::exit(bvlsc::cli::main_with_args(std::env::args_os()));
}
