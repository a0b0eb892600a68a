//! Runs every acceptance criterion and prints one verdict line per
//! criterion, followed by its flags.

use std::process::ExitCode;

use solitonflow_core::suites::{run_suite, Suite};

/// Flags that fail as stated; see the project notes on the two-summands
/// ratio, which is still decaying towards 1 at t = 200.
const EXPECTED_FAILURES: &[(u8, &str)] = &[(7, "example2 m=1: Xtilde_1/Xtilde_2 tail <= 1.1")];

fn main() -> ExitCode {
    let mut unexpected = vec![];
    for suite in Suite::ALL {
        let report = match run_suite(suite) {
            Ok(r) => r,
            Err(e) => {
                println!("suite {suite} [ERROR] {e}");
                unexpected.push(format!("suite {suite}: {e}"));
                continue;
            }
        };
        println!("suite {suite} ({:.2} s)", report.seconds);
        for c in &report.criteria {
            println!("{}", c.summary());
            for f in &c.flags {
                println!("    {}", f.summary());
            }
            for f in &c.informational {
                println!("    (info) {}", f.summary());
            }
            for (name, v) in &c.measurements {
                println!("    (measured) {name} = {v:.6}");
            }
            for f in c.failures() {
                if !EXPECTED_FAILURES.contains(&(c.id, f.name.as_str())) {
                    unexpected.push(format!("criterion {}: {}", c.id, f.summary()));
                }
            }
            if c.flags.is_empty() {
                unexpected.push(format!("criterion {} has no flags", c.id));
            }
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures");
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("UNEXPECTED {u}");
        }
        ExitCode::FAILURE
    }
}
