use clap::Parser;

use ptensor_cli::{emit, run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(outcome) => emit(outcome),
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    };
    std::process::exit(code);
}
