fn main() -> std::process::ExitCode {
    cbwring_cli::main_exit()
}
