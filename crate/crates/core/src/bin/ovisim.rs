fn main() -> std::process::ExitCode {
    ovisim::cli::run(std::env::args_os())
}
