fn main() -> std::process::ExitCode {
    rosenblatt_lab::expcli::cli::main_entry()
}
