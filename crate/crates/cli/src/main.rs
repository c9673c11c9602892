fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(fohnn_cli::run_with_args(std::env::args_os()))
}
