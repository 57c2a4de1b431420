// Rational or irrational up to a denominator bound: verdicts on a few ratios.

use cartan::rational::{classify_ratio, convergents, Rationality, RationalityPolicy};

pub fn run_example() -> Vec<(f64, Rationality)> {
    let policy = RationalityPolicy {
        denominator_bound: 1000,
        tolerance: 1e-12,
    };
    [
        0.5,
        2.0 / 3.0,
        0.6,
        355.0 / 113.0,
        2.0_f64.sqrt() - 1.0,
        std::f64::consts::PI,
    ]
    .into_iter()
    .map(|x| (x, classify_ratio(x, policy).verdict))
    .collect()
}

#[allow(dead_code)]
fn main() {
    for (x, v) in run_example() {
        println!("{x:<20} {v:?}");
    }
    println!(
        "convergents of π: {:?}",
        convergents(std::f64::consts::PI, 40_000)
    );
}
