use std::io::Write;

use clap::Parser;
use mudecomp::cli::{render, run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let out = run(&cli);
    let _ = writeln!(std::io::stdout().lock(), "{}", render(&out.doc, out.format).trim_end());
    std::process::exit(out.code);
}
