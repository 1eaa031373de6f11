use clap::Parser;
use nmpk_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, failure)) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if let Some(e) = failure {
                eprintln!("error: {e}");
                std::process::exit(e.exit_code());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
