fn main() -> std::process::ExitCode {
    tfnet::cli::run(std::env::args_os())
}
