//! End-to-end acceptance suite: runs every verification criterion at its
//! stated tolerance and prints one pass/fail line per criterion. The same
//! runner backs the `verify` CLI subcommand.

use corners::verify::{run, VerifyConfig};

#[test]
fn acceptance_criteria() {
    let cfg = VerifyConfig::default();
    let report = run(&cfg);
    for c in &report.criteria {
        println!("{}", c.format_line());
        for d in &c.details {
            println!("    {d}");
        }
    }
    assert!(
        report.all_passed(),
        "acceptance criteria failed:\n{}",
        report
            .criteria
            .iter()
            .filter(|c| !c.passed && !c.skipped)
            .map(|c| format!("{}\n    {}", c.format_line(), c.details.join("\n    ")))
            .collect::<Vec<_>>()
            .join("\n")
    );
}
