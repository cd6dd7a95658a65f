//! Thin executable wrapper: parse, run, print, map errors to exit codes
//! (0 success, 2 usage/validation, 3 internal consistency/limit).

use clap::Parser;

use aoi_walk::cli::{run, Cli};

fn main() {
    // clap itself exits with code 2 on usage errors.
    let cli = Cli::parse();
    let rendered = match run(&cli) {
        Ok(out) => out,
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    };
    match &cli.output {
        None => println!("{rendered}"),
        Some(path) => {
            if let Err(err) = std::fs::write(path, format!("{rendered}\n")) {
                eprintln!("error: cannot write {}: {err}", path.display());
                std::process::exit(1);
            }
        }
    }
}
