//! The persistence integral over colatitude and its simple zeros.
//!
//! cargo run --example melnikov_profile

use nalgebra::Vector3;
use sphere_fsb::analysis::melnikov_roots;
use sphere_fsb::fields::{PerturbationField, Polynomial};
use sphere_fsb::flows::Scenario;

fn main() -> sphere_fsb::Result<()> {
    // G2 = x1 (x3^2 - 1/4): zeros at pi/3 and 2 pi/3
    let g2 = Polynomial::from_terms([([1, 0, 2], 1.0), ([1, 0, 0], -0.25)]);
    let fields = [
        ("equatorial_trap", PerturbationField::equatorial_trap()),
        ("two_bands", PerturbationField::new(Polynomial::zero(), g2, Polynomial::zero(), 0.1)?),
        ("polar_shift", PerturbationField::polar_shift()),
    ];
    for (name, field) in fields {
        let scn = Scenario::from_rates(Vector3::z(), Vector3::z(), field, 0.0)?;
        let p = melnikov_roots(&scn);
        println!("{name}: degenerate = {}, {} simple zero(s)", p.degenerate, p.roots.len());
        for r in &p.roots {
            println!("  phi0 = {:.12}  I' = {:+.10} (finite difference {:+.10})", r.phi0, r.derivative, r.derivative_fd);
        }
        let step = p.phis.len() / 6;
        for k in (0..p.phis.len()).step_by(step) {
            println!("  I({:.4}) = {:+.6e}", p.phis[k], p.values[k]);
        }
    }
    Ok(())
}
