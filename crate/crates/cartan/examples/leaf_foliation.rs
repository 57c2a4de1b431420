// Leaf dimension and isotropy of the extremal Kähler algebroid, and the drift
// of the two invariants along an anchor flow on a compact leaf.

use cartan::foliation::{flow, invariant_drift, IsotropyAlgebra, LeafProbe};
use cartan::linalg::RankPolicy;
use cartan::ode::OdeOptions;
use cartan::{builtin_model, ModelParams};

pub struct LeafSummary {
    pub generic_leaf_dim: usize,
    pub fixed_point_leaf_dim: usize,
    pub fixed_point_isotropy_dim: usize,
    pub max_drift: f64,
}

pub fn run_example() -> cartan::Result<LeafSummary> {
    let model = builtin_model("extremal_kahler", &ModelParams::default())?;
    let policy = RankPolicy::default();

    let generic = LeafProbe::at(&model, &[0.5, 0.2, -0.3, 0.1], policy)?;
    // (K, 0, 0, 0) is a point leaf; its isotropy is all of ℝ² ⋊ 𝔲(1)
    let fixed = LeafProbe::at(&model, &[1.0, 0.0, 0.0, 0.0], policy)?;
    let iso = IsotropyAlgebra::at(&model, &[1.0, 0.0, 0.0, 0.0], policy)?;
    assert_eq!(iso.dim(), fixed.isotropy_dim());

    // a point on the sphere leaf of (c1, c2) = (1, 0): K = 1, U = K²/4 − c1
    let (k, u) = (1.0_f64, 0.25 - 1.0);
    let t2 = 0.0 - k * u + k.powi(3) / 6.0;
    let x0 = [k, t2.sqrt(), 0.0, u];
    let mut max_drift = 0.0_f64;
    for dir in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.3], [0.7, -0.4, 1.0]] {
        let traj = flow(&model, &x0, &|_| dir.to_vec(), 3.0, &OdeOptions::default())?;
        for inv in &model.invariants {
            max_drift = max_drift.max(invariant_drift(inv, &traj));
        }
    }
    Ok(LeafSummary {
        generic_leaf_dim: generic.leaf_dim,
        fixed_point_leaf_dim: fixed.leaf_dim,
        fixed_point_isotropy_dim: fixed.isotropy_dim(),
        max_drift,
    })
}

#[allow(dead_code)]
fn main() -> cartan::Result<()> {
    let s = run_example()?;
    println!("generic leaf dimension      {}", s.generic_leaf_dim);
    println!("fixed point leaf dimension  {}", s.fixed_point_leaf_dim);
    println!("fixed point isotropy        {}", s.fixed_point_isotropy_dim);
    println!("invariant drift on flows    {:.2e}", s.max_drift);
    Ok(())
}
