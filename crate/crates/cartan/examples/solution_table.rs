// The classification of complete simply connected extremal Kähler solutions,
// with the label each representative level set produces.

use cartan::ek::{classify, render_table1, table1};
use cartan::rational::RationalityPolicy;

pub fn run_example() -> (String, Vec<Vec<String>>) {
    let rows = table1();
    let labels = rows
        .iter()
        .map(|row| {
            let (c1, c2) = row.representative;
            classify(c1, c2, RationalityPolicy::default())
                .iter()
                .filter_map(|l| l.complete_solution().map(str::to_string))
                .collect()
        })
        .collect();
    (render_table1(&rows), labels)
}

#[allow(dead_code)]
fn main() {
    let (text, labels) = run_example();
    print!("{text}");
    println!();
    for (i, l) in labels.iter().enumerate() {
        println!("row {}: {}", i + 1, l.join(", "));
    }
}
