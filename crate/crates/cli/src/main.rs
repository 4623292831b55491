use clap::error::ErrorKind;
use clap::Parser;

use zeta_gaps_cli::{emit, error_object, run, write_output, RunConfig};

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    64
                }
            };
        }
    };

    match run(&config) {
        Ok(report) => {
            let bytes = emit(&report, config.format);
            match write_output(&bytes, config.output.as_ref()) {
                Ok(()) => 0,
                Err(err) => {
                    eprintln!("{}", err.message());
                    err.exit_code()
                }
            }
        }
        Err(err) => {
            print!("{}", error_object(&err));
            err.exit_code()
        }
    }
}
