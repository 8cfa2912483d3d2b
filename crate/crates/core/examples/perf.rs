//! Times the construction of a fixture quotient: `perf <fixture> <level> [d]`.
//! With `d`, also times the derived subgroup.

use std::time::Instant;

use treedim_core::constructions::fixture;
use treedim_core::groups::derived_subgroup;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = fixture(&args[0]).expect("fixture name");
    let n: usize = args[1].parse().expect("level");
    let t = Instant::now();
    let chain = spec.quotient(n, 1 << 14).unwrap();
    println!(
        "{} n={} order bits {} in {:?}",
        spec.name,
        n,
        chain.order().bits(),
        t.elapsed()
    );
    if args.get(2).is_some_and(|s| s == "d") {
        let t = Instant::now();
        let d = derived_subgroup(&chain).unwrap();
        println!(
            "derived order bits {} in {:?}",
            d.order().bits(),
            t.elapsed()
        );
    }
}
