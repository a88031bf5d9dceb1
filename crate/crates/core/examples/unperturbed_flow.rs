//! At eps = 0 the group flow is a one-parameter subgroup and every
//! orbit-space point circles the rotation axis once per period.
//!
//! cargo run --example unperturbed_flow

use nalgebra::Vector3;
use sphere_fsb::fields::PerturbationField;
use sphere_fsb::flows::{flow_group_sampled, flow_sphere, project, Scenario};
use sphere_fsb::liegroup::{exp_so3, AlgebraElement};

fn main() -> sphere_fsb::Result<()> {
    let scn = Scenario::from_rates(Vector3::new(0.0, 0.4, 1.1), Vector3::new(1.0, 0.0, 1.0), PerturbationField::equatorial_trap(), 0.0)?;
    let period = scn.period();
    println!("|X0| = {:.6}, period = {:.6}", scn.speed(), period);

    let a0 = exp_so3(&AlgebraElement::new(Vector3::new(0.2, -0.5, 0.3)), 1.0);
    let stops: Vec<f64> = (1..=10).map(|k| k as f64 * period).collect();
    let tr = flow_group_sampled(&scn, &a0, 10.0 * period, &stops)?;
    for t in stops.iter().step_by(3) {
        let err = tr.at(*t).unwrap().distance(&(a0 * exp_so3(scn.x0(), *t)));
        println!("t = {t:8.4}: |A(t) - A0 exp(X0 t)| = {err:.2e}");
    }

    let x0 = project(&a0, &scn);
    let orbit = flow_sphere(&scn, &x0, period)?;
    let (_, end) = orbit.last().unwrap();
    println!("sphere orbit: {} steps, return error {:.2e}", orbit.len(), end.distance(&x0));
    println!("height along the axis is conserved: {:.15} -> {:.15}", x0.dot(&scn.x1_0()), end.dot(&scn.x1_0()));
    Ok(())
}
