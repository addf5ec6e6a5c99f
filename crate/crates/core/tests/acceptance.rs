//! One line per acceptance criterion; exits nonzero if any fails.

use p1e_core::check::{acceptance_suite, SuiteSize};

fn main() {
    let results = acceptance_suite(&SuiteSize::full());
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
