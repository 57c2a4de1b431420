// The transversal of `𝔰𝔲(2,1)`: invariant dictionary, algebroid transport to
// `(K, X, Y, U)`, and closedness of the kernel subgroup.

use cartan::ek::{
    su21_dictionary_residuals, su21_embed, su21_kernel_closed, su21_transport, SU21Kernel,
};
use cartan::rational::RationalityPolicy;
use cartan::{builtin_model, FiniteDiff, ModelParams};

pub struct Su21Summary {
    pub dictionary: f64,
    pub transport: f64,
    pub kernels: Vec<SU21Kernel>,
}

pub fn run_example() -> cartan::Result<Su21Summary> {
    let ek = builtin_model("extremal_kahler", &ModelParams::default())?;
    let fd = FiniteDiff::new(1e-4);
    let mut dictionary = 0.0_f64;
    let mut transport = 0.0_f64;
    for (a, b, u) in [
        (0.1, 0.3, (0.2, -0.4)),
        (0.9, -0.7, (1.3, 0.5)),
        (-1.2, 0.05, (0.0, 2.0)),
    ] {
        let (r1, r2) = su21_dictionary_residuals(&su21_embed(a, b, u));
        dictionary = dictionary.max(r1).max(r2);
        let t = su21_transport(&ek, &[a, b, u.0, u.1], &fd)?;
        transport = transport.max(t.anchor_residual).max(t.bracket_residual);
    }
    let kernels = [
        (0.0, 0.3),
        (0.4, 1.0),
        (1.0, 0.5),
        (2.5, 2.0 * 3.0_f64.sqrt()),
    ]
    .into_iter()
    .map(|(a, b)| su21_kernel_closed(a, b, RationalityPolicy::default()))
    .collect();
    Ok(Su21Summary {
        dictionary,
        transport,
        kernels,
    })
}

#[allow(dead_code)]
fn main() -> cartan::Result<()> {
    let s = run_example()?;
    println!("dictionary residual  {:.2e}", s.dictionary);
    println!("transport residual   {:.2e}", s.transport);
    for k in &s.kernels {
        println!(
            "a {:>5.2} b {:>6.3}  μ² {:>6.2}  closed {:?}  Δ {:>10.3e}  −(3/16)U²μ² {:>10.3e}",
            k.a, k.b, k.mu_squared, k.is_closed, k.delta, k.delta_displayed
        );
    }
    Ok(())
}
