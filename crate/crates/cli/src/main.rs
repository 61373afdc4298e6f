use clap::Parser;
use fockmeas_cli::app::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(msg) => println!("{msg}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
