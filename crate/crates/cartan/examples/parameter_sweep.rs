// Sweep a grid of level sets `(c1, c2)` and list the complete solutions found.

use cartan::ek::sweep;
use cartan::rational::RationalityPolicy;

pub fn run_example() -> Vec<String> {
    let atlas = sweep(21, (-2.0, 2.0), (-0.8, 0.8), RationalityPolicy::default());
    atlas.complete_solutions()
}

#[allow(dead_code)]
fn main() {
    let labels = run_example();
    let named: Vec<&String> = labels
        .iter()
        .filter(|l| !l.contains(',') || l.len() < 14)
        .collect();
    println!("{} distinct labels; short ones:", labels.len());
    for l in named {
        println!("  {l}");
    }
}
