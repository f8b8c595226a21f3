fn main() -> std::process::ExitCode {
    mutsel_cli::cli::main_with_args(std::env::args_os())
}
