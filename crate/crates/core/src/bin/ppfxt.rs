fn main() -> std::process::ExitCode {
    ppfxt::cli::main()
}
