//! Continue zeros of the persistence integral to periodic orbits and read
//! their stability off the return-map multiplier.
//!
//! cargo run --example periodic_orbits

use nalgebra::Vector3;
use sphere_fsb::analysis::{continue_periodic_orbit, melnikov_roots};
use sphere_fsb::fields::{PerturbationField, Polynomial};
use sphere_fsb::flows::Scenario;

fn main() -> sphere_fsb::Result<()> {
    let g2 = Polynomial::from_terms([([1, 0, 2], 1.0), ([1, 0, 0], -0.25)]);
    let field = PerturbationField::new(Polynomial::zero(), g2, Polynomial::zero(), 0.1)?;
    for eps in [0.01, 0.005] {
        let scn = Scenario::from_rates(Vector3::new(0.0, 0.0, 1.5), Vector3::new(0.3, 0.0, 1.0), field.clone(), eps)?;
        println!("eps = {eps}");
        for root in melnikov_roots(&scn).roots {
            let o = continue_periodic_orbit(&scn, root.phi0)?;
            println!(
                "  phi0 {:.6} -> fixed point {:.9} (|P - phi| {:.1e}, {} Newton steps), period {:.6}, multiplier {:.6} ({}), I' {:+.4}",
                o.phi0, o.fixed_phi, o.fixed_point_residual, o.iterations, o.period_physical, o.multiplier, o.stability, o.integral_slope
            );
        }
    }
    Ok(())
}
