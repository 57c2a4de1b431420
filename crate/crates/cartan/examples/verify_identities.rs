// Check the algebroid identities on the built-in models, including one whose
// curvature has been scaled so that Jacobi fails.

use cartan::verifier::{verify, VerifyOptions};
use cartan::{builtin_model, ModelParams};

pub fn run_example() -> cartan::Result<Vec<(String, bool, f64)>> {
    let opts = VerifyOptions {
        points: 40,
        triples: 5,
        seed: 7,
        ..Default::default()
    };
    let mut out = Vec::new();
    for (name, scale) in [
        ("trivial", None),
        ("constant_curvature", None),
        ("extremal_kahler", None),
        ("ek_su21", None),
        ("extremal_kahler", Some(1.1)),
    ] {
        let params = ModelParams {
            n: Some(3).filter(|_| name != "extremal_kahler" && name != "ek_su21"),
            curvature_scale: scale,
        };
        let model = builtin_model(name, &params)?;
        let report = verify(&model, &opts)?;
        let label = match scale {
            Some(s) => format!("{name} (curvature x{s})"),
            None => name.to_string(),
        };
        out.push((label, report.passed(), report.jacobi_max_residual));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> cartan::Result<()> {
    for (name, pass, jac) in run_example()? {
        println!(
            "{name:<36} {}  jacobi {jac:.2e}",
            if pass { "ok  " } else { "FAIL" }
        );
    }
    Ok(())
}
