use clap::Parser;
use frechet_lab_cli::{main_with, Cli};

fn main() {
    let cli = Cli::parse();
    match main_with(&cli) {
        Ok(doc) => print!("{doc}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
