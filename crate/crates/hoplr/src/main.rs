fn main() -> std::process::ExitCode {
    hoplr::cli::main()
}
