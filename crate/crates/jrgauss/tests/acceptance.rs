//! Runs every acceptance criterion and prints one line per criterion. Criterion 13 reruns
//! the whole suite through the binary with the Howe derivative sign flipped and expects
//! it to fail, with criteria 1-4 among the failures.

use std::process::{Command, ExitCode};
use std::time::Instant;

use jrgauss::suite::{run_criterion, Config, Suite};
use serde_json::Value;

fn main() -> ExitCode {
    let cfg = Config::default();
    let mut all = true;
    for &id in Suite::All.criteria() {
        let r = run_criterion(id, &cfg);
        println!("{r}");
        for c in r.checks.iter().filter(|c| !c.pass) {
            println!("      {}: got {}, expected {} (tol {})", c.check, c.got, c.expected, c.tolerance);
        }
        all &= r.pass;
    }

    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_jrgauss")).args(["verify", "--suite", "all", "--negative-control", "--json"]).output();
    let (pass, detail) = match out {
        Ok(out) => {
            let code = out.status.code();
            let reports: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap_or_default();
            let failed: Vec<u64> = reports.iter().filter(|r| r["pass"] == Value::Bool(false)).filter_map(|r| r["id"].as_u64()).collect();
            let broken = (1..=4).all(|id| failed.contains(&id));
            (code.is_some_and(|c| c != 0) && broken, format!("exit {code:?}, failing criteria {failed:?}"))
        }
        Err(e) => (false, format!("could not run the binary: {e}")),
    };
    println!("criterion 13 {}  negative control breaks criteria 1-4 ({:.2} s): {detail}", if pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    all &= pass;

    if all {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
