use ckblowup_cli::{run, Cli};
use clap::Parser;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error[{}]: {:#}", e.stage, e.source);
        std::process::exit(e.code);
    }
}
