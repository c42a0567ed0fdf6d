//! Acceptance suite: all ten criteria at their full sample counts and
//! tolerances. Prints one PASS/FAIL line per criterion followed by the
//! individual checks, and exits non-zero if any blocking criterion fails.
//!
//! `cargo test -p cvqec --test acceptance -- 4 5` runs a subset.

use cvqec::verify::{run_criterion, Profile, CRITERIA};

fn main() {
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u8> = CRITERIA.iter().map(|c| c.0).filter(|id| selected.is_empty() || selected.contains(id)).collect();

    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, Profile::Full).expect("known criterion");
        println!("{} criterion {:>2} {} ({:.3} s)", r.status(), r.id, r.name, r.elapsed.as_secs_f64());
        results.push(r);
    }
    println!();
    for r in &results {
        println!("{r}");
    }
    let blocking: Vec<String> = results.iter().filter(|r| r.blocks_suite()).map(|r| r.id.to_string()).collect();
    println!();
    if blocking.is_empty() {
        println!("acceptance: {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {}", blocking.join(", "));
        std::process::exit(1);
    }
}
