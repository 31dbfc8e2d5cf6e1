use std::process::ExitCode;

use ddgroup_cli::{run, Outcome};

fn main() -> ExitCode {
    match run(std::env::args()) {
        Ok(Outcome::Text(t)) => {
            print!("{t}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Score(s)) => {
            println!("{}", serde_json::to_string(&s).expect("scores serialize"));
            ExitCode::SUCCESS
        }
        Ok(Outcome::Manifest(m)) => {
            for f in &m.outputs {
                eprintln!("wrote {}", f.path);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(2)
        }
    }
}
