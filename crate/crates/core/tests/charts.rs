use legendre_core::blowup::{boundary_defining_functions, face_function, from_chart, to_chart, transition, Chart, ChartPoint, Face, XPoint};
use legendre_core::contact::SplittingData;
use proptest::prelude::*;

fn split_strategy() -> impl Strategy<Value = SplittingData> {
    (2usize..=4).prop_flat_map(|n| (Just(n), 1..n)).prop_map(|(n, k)| SplittingData::new(n, k).unwrap())
}

/// Interior points with positive primed coordinates, so every chart contains them.
fn point(split: SplittingData) -> impl Strategy<Value = XPoint<f64>> {
    (0.01f64..1.0, proptest::collection::vec(0.05f64..2.0, split.k), proptest::collection::vec(-2.0f64..2.0, split.n - 1 - split.k))
        .prop_map(|(x, yp, ypp)| XPoint::new(x, yp.into_iter().chain(ypp).collect()).unwrap())
}

/// `x` and the primed `y_i` within a factor 2 of a common scale.
fn overlap_point(split: SplittingData) -> impl Strategy<Value = XPoint<f64>> {
    (1e-3f64..1.0, proptest::collection::vec(0.5f64..2.0, split.k + 1), proptest::collection::vec(-2.0f64..2.0, split.n - 1 - split.k))
        .prop_map(|(b, f, ypp)| XPoint::new(b * f[0], f[1..].iter().map(|v| b * v).chain(ypp).collect()).unwrap())
}

fn charts(split: SplittingData) -> Vec<Chart> {
    let mut c = vec![Chart::InteriorMf, Chart::FfX];
    c.extend((1..=split.k).map(Chart::FfProjective));
    c
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale
}

fn flat(p: &XPoint<f64>) -> Vec<f64> {
    std::iter::once(p.x).chain(p.y.iter().copied()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn charts_and_transitions_are_inverse((split, p) in split_strategy().prop_flat_map(|s| (Just(s), point(s)))) {
        for a in charts(split) {
            let ca = to_chart(&p, a, split).unwrap();
            prop_assert!(rel(&flat(&from_chart(&ca, split).unwrap()), &flat(&p)) < 1e-12);
            for b in charts(split) {
                let cb = transition(&ca, b, split).unwrap();
                prop_assert!(rel(&cb.coords, &to_chart(&p, b, split).unwrap().coords) < 1e-12);
                let back = transition(&cb, a, split).unwrap();
                prop_assert!(rel(&back.coords, &ca.coords) < 1e-12, "{:?} -> {:?} -> {:?}", a, b, a);
            }
        }
    }

    #[test]
    fn defining_functions_are_comparable_on_overlaps((split, p) in split_strategy().prop_flat_map(|s| (Just(s), overlap_point(s)))) {
        let mut ff = Vec::new();
        let mut mf = Vec::new();
        for c in charts(split).into_iter().filter(|&c| c != Chart::InteriorMf) {
            let cp = to_chart(&p, c, split).unwrap();
            let f = boundary_defining_functions(c);
            ff.push(f.eval_ff(&cp.coords).unwrap());
            if let Some(m) = f.eval_mf(&cp.coords) {
                mf.push(m);
            }
        }
        for set in [&ff, &mf] {
            for a in set.iter() {
                prop_assert!(*a > 0.0);
                for b in set.iter() {
                    prop_assert!(a / b >= 0.1 && a / b <= 10.0);
                }
            }
        }
    }
}

#[test]
fn faces_per_chart() {
    assert!(face_function(Chart::FfX, Face::Main).is_err());
    assert_eq!(face_function(Chart::FfProjective(1), Face::Front).unwrap(), 0);
    assert_eq!(face_function(Chart::FfProjective(1), Face::Main).unwrap(), 1);
    assert!(face_function(Chart::InteriorMf, Face::Front).is_err());
}

/// A Schwartz function of `y/x` pulled back to the projective chart vanishes
/// to every tested order at `σ = 0`, uniformly in `ρ`.
#[test]
fn schwartz_in_z_vanishes_at_sigma_zero() {
    let split = SplittingData::new(2, 1).unwrap();
    let g = |z: f64| (1.0 + z * z) * (-z * z).exp() * (0.3 * z).cos();
    let sigmas: Vec<f64> = (0..8).map(|i| 0.4 * 0.5f64.powi(i)).collect();
    for n in 1..=6 {
        let mut prev = f64::INFINITY;
        for &s in &sigmas[2..] {
            let sup = (0..=20)
                .map(|i| {
                    let rho = 1e-3 + i as f64 * 0.05;
                    let cp = ChartPoint { chart: Chart::FfProjective(1), coords: vec![rho, s] };
                    let p = from_chart(&cp, split).unwrap();
                    (g(p.y[0] / p.x) * (1.0 + p.x + p.y[0])).abs() / s.powi(n)
                })
                .fold(0.0, f64::max);
            assert!(sup <= prev, "order {n}: not decreasing at σ = {s}");
            prev = sup;
        }
        assert!(prev < 1e-6, "order {n}: {prev}");
    }
}
