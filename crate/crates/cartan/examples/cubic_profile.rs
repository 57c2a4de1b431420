// Roots of the profile cubic `p(K) = −K³/12 + c1 K + c2` across the
// discriminant, and the leaves they cut out.

use cartan::ek::{classify, CubicProfile};
use cartan::rational::RationalityPolicy;

pub fn run_example() -> Vec<(f64, f64, i8, Vec<(f64, u8)>, Vec<String>)> {
    [
        (1.0, 0.0),
        (1.0, 4.0 / 3.0),
        (1.0, 2.0),
        (-1.0, 0.3),
        (0.0, 0.0),
    ]
    .into_iter()
    .map(|(c1, c2)| {
        let prof = CubicProfile::new(c1, c2);
        let roots = prof
            .roots
            .iter()
            .map(|r| (r.value, r.multiplicity))
            .collect();
        let kinds = classify(c1, c2, RationalityPolicy::default())
            .iter()
            .map(|l| {
                serde_json::to_value(l.kind).unwrap()["kind"]
                    .as_str()
                    .unwrap()
                    .to_string()
            })
            .collect();
        (c1, c2, prof.delta_sign(), roots, kinds)
    })
    .collect()
}

#[allow(dead_code)]
fn main() {
    for (c1, c2, sign, roots, kinds) in run_example() {
        println!("c1 {c1:>5.2} c2 {c2:>6.3}  sign(Δ) {sign:>2}  roots {roots:?}");
        println!("    leaves {}", kinds.join(", "));
    }
}
