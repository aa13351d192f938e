use std::process::ExitCode;

use spinglass::cli::{execute, parse_invocation, Invocation};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let outcome = parse_invocation(std::env::args_os()).and_then(|inv| match inv {
        Invocation::Info(text) => {
            print!("{text}");
            Ok(())
        }
        Invocation::Run(cfg) => {
            let out = execute(&cfg)?;
            for (k, v) in &out.results {
                println!("{k} = {v}");
            }
            for f in &out.outputs {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
