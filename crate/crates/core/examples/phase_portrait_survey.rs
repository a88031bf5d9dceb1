//! Where do quasi-uniform seeds end up?
//!
//! cargo run --release --example phase_portrait_survey

use std::collections::BTreeMap;

use nalgebra::Vector3;
use sphere_fsb::analysis::{continue_periodic_orbit, find_equilibrium, limit_set_survey, melnikov_roots, survey_horizon, Pole};
use sphere_fsb::fields::{PerturbationField, Polynomial};
use sphere_fsb::flows::Scenario;

fn main() -> sphere_fsb::Result<()> {
    // bands at pi/3 and 2 pi/3; the north pole repels and the band at pi/3 attracts
    let g2 = Polynomial::from_terms([([1, 0, 2], -1.0), ([1, 0, 0], 0.25)]);
    let cases = [
        ("equatorial_trap", PerturbationField::equatorial_trap()),
        ("two_bands", PerturbationField::new(Polynomial::zero(), g2, Polynomial::zero(), 0.1)?),
    ];
    for (name, field) in cases {
        let scn = Scenario::from_rates(Vector3::z(), Vector3::new(0.0, 0.6, 0.8), field, 0.02)?;
        let equilibria: Vec<_> = [Pole::North, Pole::South].iter().filter_map(|p| find_equilibrium(&scn, *p).ok()).collect();
        let profile = melnikov_roots(&scn);
        let orbits: Vec<_> = profile.roots.iter().filter_map(|r| continue_periodic_orbit(&scn, r.phi0).ok()).collect();
        for e in &equilibria {
            println!("{name}: equilibrium {:?} {}", e.pole, e.stability);
        }
        for (i, o) in orbits.iter().enumerate() {
            println!("{name}: orbit {i} at phi {:.6} {} (multiplier {:.5})", o.fixed_phi, o.stability, o.multiplier);
        }
        let survey = limit_set_survey(&scn, &equilibria, &orbits, profile.degenerate, 40)?;
        let mut counts = BTreeMap::new();
        for s in &survey {
            *counts.entry(format!("{:?}", s.limit)).or_insert(0) += 1;
        }
        println!("{name}: horizon {:.0}, limits {counts:?}", survey_horizon(&scn));
    }
    Ok(())
}
