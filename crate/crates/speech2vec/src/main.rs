fn main() -> std::process::ExitCode {
    speech2vec::cli::main()
}
