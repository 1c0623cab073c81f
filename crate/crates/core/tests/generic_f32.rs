//! The library instantiated at `f32`, checked loosely against `f64`.

use legendre_core::amplitude::{HermiteTerm, SchwartzAmplitude};
use legendre_core::blowup::{from_chart, to_chart, Chart, XPoint};
use legendre_core::contact::SplittingData;
use legendre_core::oscillatory::{eval_intersecting_direct, eval_intersecting_reduced, eval_type1, EvalOptions, Intersecting, Type1};
use legendre_core::phase::{nondegeneracy_check, PhaseFunction};
use legendre_core::poly::Polynomial;
use legendre_core::scalar::{Cx, Scalar};

fn amplitude<T: Scalar>() -> SchwartzAmplitude<T> {
    let c = |re: f64, im: f64| Cx::new(T::lit(re), T::lit(im));
    SchwartzAmplitude::new(
        3,
        vec![
            HermiteTerm::simple(3, c(1.0, 0.0), 0, T::zero(), T::one()),
            HermiteTerm::simple(3, c(0.3, -0.2), 1, T::lit(0.4), T::lit(0.8)),
        ],
    )
    .unwrap()
}

fn intersecting_value<T: Scalar>(x: f64, z: f64) -> (Cx<T>, Cx<T>) {
    let d = Intersecting::hermite(SplittingData::new(2, 1).unwrap(), T::lit(0.25), amplitude::<T>()).unwrap();
    let (x, y) = (T::lit(x), [T::lit(x * z)]);
    let eo = EvalOptions::default();
    (
        eval_intersecting_reduced(&d, x, &y, &eo).unwrap().value,
        eval_intersecting_direct(&d, x, &y, &eo).unwrap().value,
    )
}

#[test]
fn intersecting_paths_agree_in_single_precision() {
    for (x, z) in [(0.1, -1.0), (0.05, 0.5), (0.01, 3.0)] {
        let (r32, d32) = intersecting_value::<f32>(x, z);
        let (r64, _) = intersecting_value::<f64>(x, z);
        let scale = r64.norm().max(1e-3);
        assert!(((r32.re as f64 - r64.re).abs() + (r32.im as f64 - r64.im).abs()) / scale < 1e-4);
        assert!((r32 - d32).norm() / r32.norm().max(1e-3) < 1e-3);
    }
}

#[test]
fn charts_and_phases_in_single_precision() {
    let split = SplittingData::new(3, 2).unwrap();
    let p = XPoint::new(0.1f32, vec![0.5, 0.25]).unwrap();
    let cp = to_chart(&p, Chart::FfProjective(2), split).unwrap();
    let back = from_chart(&cp, split).unwrap();
    assert!((back.x - p.x).abs() < 1e-6 && (back.y[0] - p.y[0]).abs() < 1e-6);

    // φ = v (y − 1)
    let phi = PhaseFunction::new(1, 1, Polynomial::from_terms(2, vec![(vec![1, 1], 1.0f32), (vec![0, 1], -1.0)]).unwrap()).unwrap();
    assert!(nondegeneracy_check(&phi, &[1.0], &[0.0], 1e-5).unwrap());

    let t = Type1::new(2, 0.0f32, PhaseFunction::new(1, 0, Polynomial::var(1, 0)).unwrap(), Polynomial::one(2)).unwrap();
    let u = eval_type1(&t, 0.5, &[0.25]).unwrap().value;
    assert!((u.norm() - 0.5f32.powf(0.5)).abs() < 1e-5);
    assert!((u.arg() - 0.5).abs() < 1e-5);
}
