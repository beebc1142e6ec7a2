fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(manifold_bias_cli::run(std::env::args_os()))
}
