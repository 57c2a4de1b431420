// Periods of the curvature over the sphere leaf and its polar cap, compared
// with their closed forms, and the resulting discreteness verdicts.

use cartan::ek::{classify, ek_period_options, leaf_monodromy, LeafKind};
use cartan::monodromy::MonodromyReport;
use cartan::rational::RationalityPolicy;
use cartan::{builtin_model, ModelParams};

pub fn run_example() -> cartan::Result<MonodromyReport> {
    let model = builtin_model("extremal_kahler", &ModelParams::default())?;
    let policy = RationalityPolicy::default();
    let leaves = classify(1.0, 0.0, policy);
    let sphere = leaves
        .iter()
        .find(|l| matches!(l.kind, LeafKind::Sphere))
        .expect("(1, 0) has a sphere leaf");
    leaf_monodromy(&model, sphere, &ek_period_options(), policy)
}

#[allow(dead_code)]
fn main() -> cartan::Result<()> {
    let report = run_example()?;
    for g in &report.generators {
        println!(
            "{:<28} period {:>.12}  closed form {:>.12}",
            g.label,
            g.period.coefficients[0],
            g.closed_form.unwrap_or(f64::NAN)
        );
    }
    println!("N discrete:   {:?}", report.monodromy_discrete);
    println!("N^G discrete: {:?}", report.discrete);
    Ok(())
}
