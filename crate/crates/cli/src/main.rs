use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use placeability_cli::app::{run, Cli};
use placeability_cli::io::write_text;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        for note in &out.notes {
            eprintln!("{note}");
        }
        match &out.path {
            Some(p) => write_text(p, &out.text),
            None => {
                let _ = std::io::stdout().write_all(out.text.as_bytes());
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if cli.error_json {
                let report = serde_json::to_string(&e.to_report()).expect("error report serializes");
                eprintln!("{report}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::FAILURE
        }
    }
}
