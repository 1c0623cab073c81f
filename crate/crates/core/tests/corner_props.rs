use legendre_core::amplitude::{HermiteTerm, SchwartzAmplitude};
use legendre_core::blowup::{Chart, ChartPoint};
use legendre_core::corner::{check_membership, extract_coefficients, CornerGrid, MembershipRule, Prefactor, Verdict};
use legendre_core::error::Result;
use legendre_core::Cx64;
use proptest::prelude::*;

const Q: f64 = 0.75;

fn cx() -> impl Strategy<Value = Cx64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Cx64::new(a, b))
}

/// Coefficients `c[j][l]` of `σ^j ρ^l`, `j, l ≤ 4`.
fn table() -> impl Strategy<Value = Vec<Vec<Cx64>>> {
    proptest::collection::vec(proptest::collection::vec(cx(), 5), 5)
}

/// Polynomial in `(x, y)` as `(a, b, c)` for `c x^a y^b`, total degree ≤ 2.
fn poly_xy() -> impl Strategy<Value = Vec<(i32, i32, Cx64)>> {
    proptest::collection::vec(((0i32..=2), (0i32..=2), cx()), 1..5)
        .prop_map(|v| v.into_iter().filter(|(a, b, _)| a + b <= 2).collect())
}

fn eval_xy(p: &[(i32, i32, Cx64)], x: f64, y: f64) -> Cx64 {
    p.iter().map(|&(a, b, c)| c * x.powi(a) * y.powi(b)).sum()
}

fn taylor(c: &[Vec<Cx64>], s: f64, r: f64) -> Cx64 {
    let mut out = Cx64::new(0.0, 0.0);
    for (j, row) in c.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            out += v * s.powi(j as i32) * r.powi(l as i32);
        }
    }
    out
}

fn fit(u: impl Fn(f64, f64) -> Cx64 + Sync) -> legendre_core::AsymptoticTable64 {
    let f = move |cp: &ChartPoint<f64>| -> Result<Cx64> { Ok(u(cp.coords[1], cp.coords[0])) };
    extract_coefficients(&f, Chart::FfProjective(1), Prefactor::power_of_x(Q), &CornerGrid::new(vec![])).unwrap()
}

/// `x^q α(y/x) f(x, y)` in the chart `ρ = y`, `σ = x/y`, where `α ≡ 1`.
fn in_class(f: Vec<(i32, i32, Cx64)>) -> impl Fn(f64, f64) -> Cx64 + Sync {
    move |s, r| eval_xy(&f, r * s, r) * (r * s).powf(Q)
}

/// Narrow Hermite–Gaussian profile in `Z = y/x`, negligible for `Z ≥ 1/σ0`.
fn g_part() -> impl Strategy<Value = SchwartzAmplitude<f64>> {
    proptest::collection::vec((cx(), 0u32..=3, -0.5f64..0.5, 0.2f64..0.35), 1..3).prop_map(|v| {
        let terms = v
            .into_iter()
            .map(|(c, index, center, width)| HermiteTerm::simple(0, c, index, center, width))
            .collect();
        SchwartzAmplitude::new(0, terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn fit_recovers_taylor_coefficients(c in table(), tail in cx()) {
        let tail = tail * 1e-3;
        let t = fit(|s, r| (taylor(&c, s, r) + tail * s.powi(5) * (1.0 + r) + tail * r.powi(5)) * (r * s).powf(Q));
        for j in 0..=4 {
            for l in 0..=4 {
                let err = (t.c[j][l] - c[j][l]).norm();
                prop_assert!(err <= 3.0 * t.unc[j][l] + 1e-9, "c[{}][{}] off by {:e}, unc {:e}", j, l, err, t.unc[j][l]);
            }
        }
    }

    #[test]
    fn smooth_multipliers_keep_the_class(f in poly_xy(), h in poly_xy()) {
        let base = in_class(f);
        let t = fit(move |s, r| base(s, r) * eval_xy(&h, r * s, r));
        prop_assert_eq!(check_membership(&t, &MembershipRule::default()).verdict, Verdict::Intersecting);
    }

    #[test]
    fn sigma_multiplier_is_detected(f in poly_xy(), f00 in 1.0f64..2.0) {
        let mut f = f;
        f.retain(|&(a, b, _)| a + b > 0);
        f.push((0, 0, Cx64::new(f00, 0.0)));
        let base = in_class(f);
        let t = fit(move |s, r| base(s, r) * s);
        prop_assert!(t.c[1][0].norm() >= 0.5);
        prop_assert_eq!(check_membership(&t, &MembershipRule::default()).verdict, Verdict::NotIntersecting);
    }

    #[test]
    fn g_part_leaves_the_table_unchanged(f in poly_xy(), g in g_part()) {
        let base = in_class(f);
        let plain = fit(&base);
        let with_g = fit(|s, r| base(s, r) + g.eval(&[], 1.0 / s) * (r * s).powf(Q));
        for j in 0..=4 {
            for l in 0..=4 {
                let d = (plain.c[j][l] - with_g.c[j][l]).norm();
                prop_assert!(d <= 3.0 * plain.unc[j][l].max(with_g.unc[j][l]) + 1e-9, "c[{}][{}] moved by {:e}", j, l, d);
            }
        }
    }
}
