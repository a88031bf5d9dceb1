//! Lift equilibria to rotating waves and periodic orbits to modulated waves.
//!
//! cargo run --example reconstruct_waves

use std::f64::consts::PI;

use nalgebra::Vector3;
use sphere_fsb::analysis::{continue_periodic_orbit, find_equilibrium, Pole};
use sphere_fsb::fields::{PerturbationField, Polynomial};
use sphere_fsb::flows::Scenario;
use sphere_fsb::reconstruct::{lift_equilibrium, lift_periodic, project_frequency_circle, wave_angle_check};

fn main() -> sphere_fsb::Result<()> {
    let field = PerturbationField::new(
        Polynomial::from_terms([([0, 0, 0], 0.4), ([0, 1, 0], 0.3)]),
        Polynomial::monomial([1, 0, 1], 1.0),
        Polynomial::from_terms([([1, 1, 0], 0.2), ([0, 0, 1], 0.1)]),
        0.1,
    )?;
    for eps in [0.02, 0.01] {
        let scn = Scenario::from_rates(Vector3::new(0.3, -0.2, 0.9), Vector3::new(0.0, 0.6, 0.8), field.clone(), eps)?;
        println!("eps = {eps}, |X0| = {:.6}", scn.speed());
        for pole in [Pole::North, Pole::South] {
            let w = lift_equilibrium(&scn, &find_equilibrium(&scn, pole)?)?;
            println!(
                "  rotating wave ({pole:?}): frequency {:+.10} (measured {:+.10}), off-axis {:.1e}, orbit residence {:.1e}",
                w.frequency, w.measured_frequency, w.residual_off_axis, w.consistency_error
            );
        }
        let orbit = continue_periodic_orbit(&scn, PI / 2.0)?;
        let w = lift_periodic(&scn, &orbit)?;
        println!(
            "  modulated wave: drift {:+.3e}, relative period {:.8}, |B(T) - B(0)| {:.1e}",
            w.frequency,
            w.relative_period.unwrap(),
            w.consistency_error
        );
        let (lhs, rhs) = wave_angle_check(&scn, &w.base_rotation);
        println!("  angle identity at B(0): {lhs:+.15} vs {rhs:+.15}");
    }

    let scn = Scenario::from_rates(Vector3::z(), Vector3::new(1.0, 1.0, 0.0), PerturbationField::zero(), 0.0)?;
    for h in [0.3, 0.8] {
        let up = project_frequency_circle(&scn, h, 48, &[0.0, 1.0]);
        let down = project_frequency_circle(&scn, -h, 48, &[0.5]);
        println!(
            "frequency circles at +-{h}: image planes at {:+.12} and {:+.12}, same distance from 0: {:.1e}",
            up.signed_height(),
            down.signed_height(),
            (up.plane_distance() - down.plane_distance()).abs()
        );
    }
    Ok(())
}
