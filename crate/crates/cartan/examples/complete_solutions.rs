// Which leaves of a few level sets carry complete simply connected solutions.

use cartan::ek::classify;
use cartan::metric::{complete_solution_report, interval_text};
use cartan::rational::RationalityPolicy;
use cartan::{builtin_model, ModelParams};

pub fn run_example() -> cartan::Result<Vec<(f64, f64, String, bool, Option<String>)>> {
    let model = builtin_model("extremal_kahler", &ModelParams::default())?;
    let mut out = Vec::new();
    for (c1, c2) in [
        (0.0, 0.0),
        (1.0, 0.0),
        (-1.0, 0.5),
        (0.25, 1.0 / 6.0),
        (0.25, -1.0 / 6.0),
        (0.0, 1.0),
    ] {
        for leaf in classify(c1, c2, RationalityPolicy::default()) {
            let r = complete_solution_report(&model, &leaf, None)?;
            out.push((
                c1,
                c2,
                interval_text(leaf.k_interval),
                r.complete,
                r.simply_connected_solution,
            ));
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> cartan::Result<()> {
    for (c1, c2, k, complete, sol) in run_example()? {
        println!(
            "({c1:>5.2}, {c2:>6.3})  {k:<30} complete {:<5} {}",
            complete,
            sol.unwrap_or_default()
        );
    }
    Ok(())
}
