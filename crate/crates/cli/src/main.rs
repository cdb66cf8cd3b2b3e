//! `hazode`: fit, simulate and summarise survival models whose hazard
//! functions solve autonomous ODE systems.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! failure.

mod args;
mod error;
mod ops;
mod output;

use clap::Parser;

fn main() {
    let code = match args::Cli::try_parse() {
        Ok(cli) => match ops::run(cli.command) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {}", e.message);
                e.code
            }
        },
        Err(e) => {
            // Help and version requests are successes; everything else is
            // a usage error. clap's default exit code of 2 is reserved
            // for data errors here.
            let code = i32::from(e.exit_code() != 0);
            let _ = e.print();
            code
        }
    };
    std::process::exit(code);
}
