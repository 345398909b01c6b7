fn main() -> std::process::ExitCode {
    imcf_cli::main_entry()
}
