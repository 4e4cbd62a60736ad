fn main() -> std::process::ExitCode {
    pragrank::cli::main()
}
