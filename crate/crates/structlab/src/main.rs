use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(structlab::cli::main_entry() as u8)
}
