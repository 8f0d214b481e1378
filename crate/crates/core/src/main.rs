fn main() -> std::process::ExitCode {
    failwave::cli::main_with_args(std::env::args_os())
}
