fn main() {
    std::process::exit(exec_kernel::cli::main_with_args(std::env::args_os()));
}
