//! Exit-gate suite. Each criterion prints one PASS/FAIL line with the
//! measured quantities next to their bounds; any FAIL makes the target fail.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sphere_fsb::analysis::{
    continue_periodic_orbit, find_equilibrium, limit_set_survey, melnikov_i, melnikov_roots, poincare_map,
    LimitObject, Pole, Stability,
};
use sphere_fsb::cli::{analyze, to_json, write_outputs, ScenarioConfig};
use sphere_fsb::fields::{PerturbationField, Polynomial};
use sphere_fsb::flows::{flow_group_sampled, flow_sphere_sampled, project, Scenario};
use sphere_fsb::liegroup::{conjugate_axis, exp_so3, hat, vee, AlgebraElement, Rotation, UnitVector};
use sphere_fsb::reconstruct::{lift_equilibrium, lift_periodic, project_frequency_circle, wave_angle_check};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vector(r: &mut ChaCha8Rng, scale: f64) -> Vector3<f64> {
    Vector3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)) * scale
}

fn random_rotation(r: &mut ChaCha8Rng) -> Rotation {
    let axis = random_vector(r, 1.0);
    exp_so3(&AlgebraElement::new(axis.normalize()), r.random_range(-PI..PI))
}

/// Largest ratio between consecutive entries, either way round.
fn max_ratio(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[0] / w[1]).abs().max((w[1] / w[0]).abs())).fold(1.0, f64::max)
}

/// Largest growth factor between consecutive entries (bounded, may shrink).
fn max_growth(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[1].abs() / w[0].abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}

fn tilted(field: PerturbationField, eps: f64) -> Scenario {
    Scenario::from_rates(Vector3::new(0.3, -0.2, 0.9), Vector3::new(0.0, 0.6, 0.8), field, eps).unwrap()
}

fn unit_speed(field: PerturbationField, eps: f64) -> Scenario {
    Scenario::from_rates(Vector3::z(), Vector3::new(0.0, 0.6, 0.8), field, eps).unwrap()
}

/// The equatorial trap plus a shift of the rotation speed, so that every
/// first-order coefficient of the reconstruction is nonzero.
fn sped_up_trap() -> PerturbationField {
    PerturbationField::new(
        Polynomial::from_terms([([0, 0, 0], 0.4), ([0, 1, 0], 0.3)]),
        Polynomial::monomial([1, 0, 1], 1.0),
        Polynomial::from_terms([([1, 1, 0], 0.2), ([0, 0, 1], 0.1)]),
        0.1,
    )
    .unwrap()
}

fn algebra_kernel() -> Verdict {
    let mut r = rng(1);
    let (mut roundtrip, mut conj, mut group, mut invariants) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let v = random_vector(&mut r, 3.0);
        roundtrip = roundtrip.max((vee(&hat(&v)).unwrap() - v).amax());

        let a = random_rotation(&mut r);
        let x = AlgebraElement::new(v);
        let direct: Matrix3<f64> = a.matrix() * x.matrix() * a.matrix().transpose();
        conj = conj.max((direct - conjugate_axis(&a, &x).matrix()).amax());

        let (s, t) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        group = group.max(exp_so3(&x, s).compose(&exp_so3(&x, t)).distance(&exp_so3(&x, s + t)));

        let e = exp_so3(&x, t);
        invariants = invariants.max(e.orthogonality_error()).max((e.matrix().determinant() - 1.0).abs());
    }
    verdict(
        roundtrip == 0.0 && conj <= 1e-12 && group <= 1e-12 && invariants <= 1e-12,
        format!(
            "hat/vee {roundtrip:.1e} (exact), conjugation {conj:.1e}, group law {group:.1e}, orthogonality/det {invariants:.1e} (<= 1e-12)"
        ),
    )
}

/// Sphere-flow state at `t` (pole frame).
fn sphere_state(scn: &Scenario, x0: &UnitVector, t: f64) -> Vector3<f64> {
    let tr = flow_sphere_sampled(scn, x0, t, &[]).unwrap();
    *tr.last().unwrap().1.coords()
}

fn unperturbed_dynamics() -> Verdict {
    let scn = tilted(PerturbationField::equatorial_trap(), 0.0);
    let period = scn.period();
    let mut r = rng(2);
    let a0 = random_rotation(&mut r);
    let stops: Vec<f64> = (1..200).map(|k| 10.0 * period * k as f64 / 200.0).collect();
    let tr = flow_group_sampled(&scn, &a0, 10.0 * period, &stops).unwrap();
    let group_err = tr
        .iter()
        .map(|(t, a)| a.distance(&(a0 * exp_so3(scn.x0(), t))))
        .fold(0.0, f64::max);

    let (mut closure, mut period_err) = (0.0f64, 0.0f64);
    for k in 0..5 {
        let x0 = UnitVector::normalize(random_vector(&mut r, 1.0) + Vector3::new(0.0, 0.0, 0.1 * k as f64)).unwrap();
        let end = sphere_state(&scn, &x0, period);
        closure = closure.max((end - x0.coords()).norm());
        // first return: zero of the displacement along the initial velocity, by secant
        let v = x0.coords().cross(&scn.total_rate(x0.coords()));
        let g = |t: f64| (sphere_state(&scn, &x0, t) - x0.coords()).dot(&v);
        let (mut t0, mut t1) = (0.999 * period, 1.001 * period);
        let (mut g0, mut g1) = (g(t0), g(t1));
        for _ in 0..20 {
            if g1 == g0 || (t1 - t0).abs() < 1e-14 {
                break;
            }
            let t2 = t1 - g1 * (t1 - t0) / (g1 - g0);
            (t0, g0) = (t1, g1);
            t1 = t2;
            g1 = g(t1);
        }
        period_err = period_err.max((t1 - period).abs());
    }
    verdict(
        group_err <= 1e-8 && closure <= 1e-7 && period_err <= 1e-8,
        format!(
            "group vs closed form over 10 periods {group_err:.1e} (<= 1e-8), sphere return {closure:.1e} (<= 1e-7), period error {period_err:.1e} (<= 1e-8)"
        ),
    )
}

fn semi_conjugacy() -> Verdict {
    let scn = tilted(PerturbationField::equatorial_trap(), 0.02);
    let horizon = 5.0 * scn.period();
    let stops: Vec<f64> = (1..100).map(|k| horizon * k as f64 / 100.0).collect();
    let mut r = rng(3);
    let mut gap = 0.0f64;
    for _ in 0..20 {
        let a0 = random_rotation(&mut r);
        let group = flow_group_sampled(&scn, &a0, horizon, &stops).unwrap();
        let sphere = flow_sphere_sampled(&scn, &project(&a0, &scn), horizon, &stops).unwrap();
        for t in stops.iter().chain([horizon].iter()) {
            let a = group.at(*t).unwrap();
            let x = sphere.at(*t).unwrap();
            gap = gap.max(project(a, &scn).distance(x));
        }
    }
    verdict(gap <= 1e-6, format!("sup gap over 5 periods, 20 initial conditions {gap:.1e} (<= 1e-6)"))
}

fn equilibrium_branch_law() -> Verdict {
    let eps = [1e-2, 5e-3, 2.5e-3];
    let unit = |f: PerturbationField, e: f64| Scenario::from_rates(Vector3::z(), Vector3::z(), f, e).unwrap();
    let remainder = |f: &PerturbationField, pole: Pole| -> Vec<f64> {
        eps.iter()
            .map(|&e| {
                let b = find_equilibrium(&unit(f.clone(), e), pole).unwrap();
                let d = [b.chart[0] - e * b.predicted_first_order[0], b.chart[1] - e * b.predicted_first_order[1]];
                d[0].hypot(d[1]) / (e * e)
            })
            .collect()
    };
    let polar = remainder(&PerturbationField::polar_shift(), Pole::North);
    let polar_ok = polar.iter().all(|k| k.is_finite()) && max_growth(&polar) <= 2.0;

    // a field whose location has a genuine second-order term
    let curved = PerturbationField::new(
        Polynomial::zero(),
        Polynomial::from_terms([([0, 0, 0], 0.3), ([1, 0, 1], 1.0)]),
        Polynomial::from_terms([([0, 0, 0], 0.5), ([0, 1, 0], 0.7)]),
        0.1,
    )
    .unwrap();
    let curved_k = remainder(&curved, Pole::North);
    let curved_ok = max_ratio(&curved_k) <= 2.0;

    // eigenvalue real part against half the first-order trace
    let mut slope_err = 0.0f64;
    for f in [PerturbationField::polar_shift(), curved.clone(), PerturbationField::equatorial_trap()] {
        for pole in [Pole::North, Pole::South] {
            let e = 1e-3;
            let b = find_equilibrium(&unit(f.clone(), e), pole).unwrap();
            let predicted = 0.5 * b.trace_first_order;
            let measured = b.eigenvalues[0].re / e;
            let err = if predicted == 0.0 {
                (measured.abs() > 1e-9) as u8 as f64
            } else {
                ((measured - predicted) / predicted).abs()
            };
            slope_err = slope_err.max(err);
        }
    }
    verdict(
        polar_ok && curved_ok && slope_err <= 0.05,
        format!(
            "polar_shift K = [{:.2e}, {:.2e}, {:.2e}] (growth <= 2), two-sided K ratio {:.3} (<= 2), eigen-slope rel. error {slope_err:.1e} (<= 5%)",
            polar[0], polar[1], polar[2], max_ratio(&curved_k)
        ),
    )
}

fn melnikov_integral() -> Verdict {
    let scn = unit_speed(PerturbationField::equatorial_trap(), 0.0);
    let profile = melnikov_roots(&scn);
    let grid_err = profile
        .phis
        .iter()
        .zip(&profile.values)
        .map(|(p, v)| (v - PI * p.sin() * p.cos()).abs())
        .fold(0.0, f64::max);
    let n = profile.phis.len();
    let (root_err, slope_err) = match profile.roots.as_slice() {
        [r] => ((r.phi0 - PI / 2.0).abs(), (r.derivative + PI).abs()),
        _ => (f64::INFINITY, f64::INFINITY),
    };
    verdict(
        n == 720 && grid_err <= 1e-12 && root_err <= 1e-10 && slope_err <= 1e-8,
        format!(
            "{n}-point grid error {grid_err:.1e} (<= 1e-12), root offset {root_err:.1e} (<= 1e-10), slope error {slope_err:.1e} (<= 1e-8)"
        ),
    )
}

fn poincare_first_order() -> Verdict {
    let eps = 1e-3;
    let scn = unit_speed(PerturbationField::equatorial_trap(), eps);
    let mut worst = 0.0f64;
    for k in 1..=10 {
        // evenly spaced colatitudes; the integral's own zero at pi/2 is not among them
        let phi = k as f64 * PI / 11.0;
        let measured = (poincare_map(&scn, phi).unwrap().phi_return - phi) / eps;
        let predicted = melnikov_i(&scn, phi) / scn.speed();
        worst = worst.max((measured / predicted - 1.0).abs());
    }
    verdict(worst <= 0.02, format!("max relative deviation over 10 colatitudes {:.2}% (<= 2%)", 100.0 * worst))
}

fn periodic_persistence() -> Verdict {
    let eps = [0.02, 0.01, 0.005];
    let mut pin = 0.0f64;
    let mut trap_k = Vec::new();
    let mut consistent = true;
    let mut survey_note = String::new();
    for &e in &eps {
        let scn = unit_speed(PerturbationField::equatorial_trap(), e);
        let orbit = continue_periodic_orbit(&scn, PI / 2.0).unwrap();
        pin = pin.max((orbit.fixed_phi - PI / 2.0).abs());
        trap_k.push((orbit.period_physical - scn.period()).abs() / e);
        if e == 0.01 {
            let equilibria: Vec<_> = [Pole::North, Pole::South].iter().map(|p| find_equilibrium(&scn, *p).unwrap()).collect();
            let survey = limit_set_survey(&scn, &equilibria, std::slice::from_ref(&orbit), false, 50).unwrap();
            let on_orbit = survey.iter().filter(|s| matches!(s.limit, LimitObject::PeriodicOrbit { .. })).count();
            consistent = match orbit.stability {
                Stability::Unstable => on_orbit == 0,
                Stability::Stable => on_orbit > 0,
                Stability::Marginal => false,
            } && orbit.multiplier > 1.0;
            survey_note = format!("multiplier {:.4}, {on_orbit}/50 seeds on the orbit", orbit.multiplier);
        }
    }
    // the trap field vanishes on the equator, so its period shift is zero up to integration error;
    // the slope law is exercised on the sped-up variant, whose shift is genuinely first order
    let mut slopes = Vec::new();
    for &e in &eps {
        let scn = unit_speed(sped_up_trap(), e);
        // its extra terms break the equator's reflection symmetry, so this orbit is not pinned
        let orbit = continue_periodic_orbit(&scn, PI / 2.0).unwrap();
        slopes.push((orbit.period_physical - scn.period()) / e);
    }
    let trap_bounded = trap_k.iter().all(|k| *k <= 1e-6);
    verdict(
        pin <= 1e-9 && trap_bounded && max_ratio(&slopes) <= 2.0 && consistent,
        format!(
            "|phi - pi/2| {pin:.1e} (<= 1e-9), trap |T - T0|/eps {:.1e}, period slopes [{:.4}, {:.4}, {:.4}] (ratio <= 2), {survey_note}",
            trap_k.iter().fold(0.0f64, |m, k| m.max(*k)),
            slopes[0],
            slopes[1],
            slopes[2]
        ),
    )
}

fn reconstruction_asymptotics() -> Verdict {
    let eps = [0.02, 0.01, 0.005];
    let (mut north, mut south, mut beta) = (Vec::new(), Vec::new(), Vec::new());
    let (mut residual, mut closure, mut defect) = (0.0f64, 0.0f64, 0.0f64);
    for &e in &eps {
        let scn = tilted(sped_up_trap(), e);
        for (pole, slopes) in [(Pole::North, &mut north), (Pole::South, &mut south)] {
            let w = lift_equilibrium(&scn, &find_equilibrium(&scn, pole).unwrap()).unwrap();
            residual = residual.max(w.residual_off_axis);
            slopes.push((w.frequency - pole.sign() * scn.speed()) / e);
        }
        let orbit = continue_periodic_orbit(&scn, PI / 2.0).unwrap();
        let w = lift_periodic(&scn, &orbit).unwrap();
        closure = closure.max(w.consistency_error);
        defect = defect.max(w.residual_off_axis);
        beta.push(w.frequency / e);
    }
    verdict(
        max_ratio(&north) <= 2.0 && max_ratio(&south) <= 2.0 && residual <= 1e-9 && max_growth(&beta) <= 2.0
            && closure <= 1e-6,
        format!(
            "frequency slopes north [{:.4}, {:.4}, {:.4}] south [{:.4}, {:.4}, {:.4}] (ratio <= 2), off-axis {residual:.1e} (<= 1e-9), |beta|/eps [{:.1e}, {:.1e}, {:.1e}] (growth <= 2), closure {closure:.1e} (<= 1e-6), monodromy axis {defect:.1e}",
            north[0], north[1], north[2], south[0], south[1], south[2], beta[0].abs(), beta[1].abs(), beta[2].abs()
        ),
    )
}

fn geometry() -> Verdict {
    let mut r = rng(9);
    let scn = tilted(PerturbationField::zero(), 0.0);
    let mut angle = 0.0f64;
    for _ in 0..100 {
        let a0 = random_rotation(&mut r);
        let (lhs, rhs) = wave_angle_check(&scn, &a0);
        angle = angle.max((lhs - rhs).abs());
    }
    let (mut equal, mut spread, mut separation) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..10 {
        let h = r.random_range(0.05..0.95);
        let twists: Vec<f64> = (0..4).map(|_| r.random_range(-PI..PI)).collect();
        let up = project_frequency_circle(&scn, h, 36, &twists);
        let down = project_frequency_circle(&scn, -h, 36, &twists);
        equal = equal.max((up.plane_distance() - down.plane_distance()).abs());
        spread = spread.max(up.spread()).max(down.spread());
        separation = separation.min((up.signed_height() - down.signed_height()).abs());
    }
    verdict(
        angle <= 1e-12 && equal <= 1e-10 && spread <= 1e-10 && separation > 1e-3,
        format!(
            "angle identity {angle:.1e} (<= 1e-12), |d1 - d2| {equal:.1e} (<= 1e-10), in-plane spread {spread:.1e}, min circle separation {separation:.2}"
        ),
    )
}

fn phase_portrait() -> Verdict {
    let scn = unit_speed(PerturbationField::equatorial_trap(), 0.01);
    let equilibria: Vec<_> = [Pole::North, Pole::South].iter().map(|p| find_equilibrium(&scn, *p).unwrap()).collect();
    let profile = melnikov_roots(&scn);
    let orbits: Vec<_> = profile.roots.iter().map(|r| continue_periodic_orbit(&scn, r.phi0).unwrap()).collect();
    let survey = limit_set_survey(&scn, &equilibria, &orbits, profile.degenerate, 50).unwrap();
    let count = |f: &dyn Fn(&LimitObject) -> bool| survey.iter().filter(|s| f(&s.limit)).count();
    let unclassified = count(&|l| *l == LimitObject::Unclassified);
    let north = count(&|l| *l == LimitObject::Equilibrium { pole: Pole::North });
    let south = count(&|l| *l == LimitObject::Equilibrium { pole: Pole::South });
    verdict(
        survey.len() == 50 && unclassified == 0,
        format!("50 seeds: {north} north, {south} south, {} other, {unclassified} unclassified (== 0)", 50 - north - south - unclassified),
    )
}

fn determinism() -> Verdict {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/equatorial_trap.toml");
    let mut cfg = ScenarioConfig::load(&path).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    // once on the global pool, once on a single thread
    cfg.output_dir = dirs[0].path().to_path_buf();
    let first = write_outputs(&cfg.output_dir, &analyze(&cfg).unwrap()).unwrap();
    cfg.output_dir = dirs[1].path().to_path_buf();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let second_out = pool.install(|| analyze(&cfg)).unwrap();
    let second = write_outputs(&cfg.output_dir, &second_out).unwrap();
    let (a, b) = (std::fs::read(first).unwrap(), std::fs::read(second).unwrap());
    let same_json = to_json(&second_out.report).unwrap().into_bytes() == b;
    verdict(
        a == b && same_json,
        format!("report.json {} bytes, identical across runs and thread counts: {}", a.len(), a == b),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        ("algebra kernel", algebra_kernel),
        ("unperturbed dynamics", unperturbed_dynamics),
        ("projection semi-conjugacy", semi_conjugacy),
        ("equilibrium branch law", equilibrium_branch_law),
        ("persistence integral", melnikov_integral),
        ("return map first-order law", poincare_first_order),
        ("periodic persistence", periodic_persistence),
        ("reconstruction asymptotics", reconstruction_asymptotics),
        ("wave geometry", geometry),
        ("phase-portrait completeness", phase_portrait),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {} [{:.1}s]", i + 1, v.detail, start.elapsed().as_secs_f64());
        if !v.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
