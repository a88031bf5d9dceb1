//! Equilibria near both poles: location against the first-order law and
//! stability from the linearization.
//!
//! cargo run --example equilibrium_branches

use nalgebra::Vector3;
use sphere_fsb::analysis::{find_equilibrium, Pole};
use sphere_fsb::fields::{PerturbationField, Polynomial};
use sphere_fsb::flows::Scenario;

fn main() -> sphere_fsb::Result<()> {
    let field = PerturbationField::new(
        Polynomial::zero(),
        Polynomial::from_terms([([0, 0, 0], 0.3), ([1, 0, 1], 1.0)]),
        Polynomial::from_terms([([0, 0, 0], 0.5), ([0, 1, 0], 0.7)]),
        0.1,
    )?;
    println!("{:>8} {:>6} {:>26} {:>26} {:>12} {:>10}", "eps", "pole", "chart", "eps * predicted", "Re lambda", "stability");
    for eps in [0.02, 0.01, 0.005] {
        let scn = Scenario::from_rates(Vector3::z(), Vector3::new(0.0, 0.6, 0.8), field.clone(), eps)?;
        for pole in [Pole::North, Pole::South] {
            let b = find_equilibrium(&scn, pole)?;
            println!(
                "{eps:>8} {:>6} [{:>11.3e}, {:>11.3e}] [{:>11.3e}, {:>11.3e}] {:>12.4e} {:>10}",
                format!("{pole:?}").to_lowercase(),
                b.chart[0],
                b.chart[1],
                eps * b.predicted_first_order[0],
                eps * b.predicted_first_order[1],
                b.eigenvalues[0].re,
                b.stability
            );
        }
    }
    Ok(())
}
