// The adaptive quadrature and ODE integrator on problems with known answers.

use cartan::ode::{integrate, OdeOptions};
use cartan::quadrature::{integrate_1d, integrate_2d, QuadOptions};

pub fn run_example() -> cartan::Result<[f64; 3]> {
    let opts = QuadOptions::default();
    // area of the unit disk in polar coordinates
    let disk = integrate_2d(
        |r, _| vec![r],
        (0.0, 1.0),
        (0.0, 2.0 * std::f64::consts::PI),
        &opts,
    )?;
    let gauss = integrate_1d(|x: f64| (-x * x).exp(), -8.0, 8.0, &opts)?;
    // harmonic oscillator over one period returns to its start
    let traj = integrate(
        |_, y: &[f64]| vec![y[1], -y[0]],
        0.0,
        &[1.0, 0.0],
        2.0 * std::f64::consts::PI,
        &OdeOptions::default(),
        |_| true,
    )?;
    let end = traj.last();
    Ok([
        disk.value[0] - std::f64::consts::PI,
        gauss.value[0] - std::f64::consts::PI.sqrt(),
        (end[0] - 1.0).hypot(end[1]),
    ])
}

#[allow(dead_code)]
fn main() -> cartan::Result<()> {
    let [disk, gauss, osc] = run_example()?;
    println!("disk area error      {disk:.2e}");
    println!("gaussian error       {gauss:.2e}");
    println!("oscillator return    {osc:.2e}");
    Ok(())
}
