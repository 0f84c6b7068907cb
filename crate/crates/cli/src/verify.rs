//! `verify` — run the named property suites and exit nonzero on failure.

use clap::Args;
use sketchlearn::verify::{run_check, CHECK_NAMES};
use sketchlearn::{Error, Result};

#[derive(Args)]
pub struct VerifyArgs {
    /// Check name (repeatable); all checks when omitted.
    #[arg(long = "check")]
    pub checks: Vec<String>,
    /// Trial-count override for checks that take one.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 20260809)]
    pub seed: u64,
    /// List available check names and exit.
    #[arg(long)]
    pub list: bool,
}

pub fn run(args: VerifyArgs) -> Result<()> {
    if args.list {
        for name in CHECK_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let names: Vec<String> = if args.checks.is_empty() {
        CHECK_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.checks.clone()
    };

    let mut failures = 0;
    for name in &names {
        let result = run_check(name, args.trials, args.seed)?;
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        let mut lines = result.detail.lines();
        println!("[{verdict}] {name}: {}", lines.next().unwrap_or(""));
        for line in lines {
            println!("        {line}");
        }
        if !result.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(Error::InvalidInput(format!(
            "{failures}/{} checks failed",
            names.len()
        )));
    }
    Ok(())
}
