//! The twelve acceptance criteria at their stated budgets, one line each.

use rrealize::selftest;

#[test]
fn acceptance() {
    let results = selftest::run(&[]);
    assert_eq!(results.len(), 12);
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.to_string())
        .collect();
    assert!(
        failed.is_empty(),
        "failing criteria:\n{}",
        failed.join("\n")
    );
}
