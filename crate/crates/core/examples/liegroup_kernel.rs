//! hat/vee, the exponential and logarithm, and the pole frame.
//!
//! cargo run --example liegroup_kernel

use std::f64::consts::PI;

use nalgebra::Vector3;
use sphere_fsb::liegroup::{conjugate_axis, exp_so3, frame_to_pole, hat, log_so3, vee, AlgebraElement, UnitVector};

fn main() -> sphere_fsb::Result<()> {
    let v = Vector3::new(0.3, -1.2, 0.5);
    println!("hat(v) =\n{}", hat(&v));
    println!("vee(hat(v)) - v = {:e}", (vee(&hat(&v))? - v).norm());

    let x = AlgebraElement::new(v);
    let r = exp_so3(&x, 0.7);
    println!("exp(0.7 X): orthogonality error {:e}, det {:.15}", r.orthogonality_error(), r.matrix().determinant());
    let back = log_so3(&r)?;
    println!("log(exp(0.7 X)) - 0.7 X = {:e}", (back.axis() - v * 0.7).norm());

    // conjugating moves the axis
    let a = exp_so3(&AlgebraElement::new(Vector3::new(0.0, 0.0, 1.0)), PI / 3.0);
    let c = conjugate_axis(&a, &x);
    let direct = a.matrix() * x.matrix() * a.matrix().transpose();
    println!("|A X A^-1 - hat(A x)| = {:e}", (direct - c.matrix()).norm());

    // near a half turn the logarithm refuses
    let half = exp_so3(&AlgebraElement::new(Vector3::x()), PI - 1e-9);
    println!("log near pi: {}", log_so3(&half).unwrap_err());

    let u = UnitVector::normalize(Vector3::new(1.0, 2.0, 2.0))?;
    let b = frame_to_pole(&u);
    println!("frame_to_pole(u) u = {:?}", b.apply(u.coords()).as_slice());
    Ok(())
}
