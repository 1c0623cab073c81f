//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::sync::Arc;
use std::io::Write;
use std::time::Instant;

use common::*;
use legendre_core::amplitude::{alpha, SchwartzAmplitude};
use legendre_core::blowup::{from_chart, Chart, ChartPoint};
use legendre_core::contact::{conormal_tangent, is_legendre_subspace, transversal_coordinate_index};
use legendre_core::corner::{check_membership, extract_coefficients, CornerGrid, MembershipRule, Multiplier, Prefactor, Verdict};
use legendre_core::decompose::{decompose_converse, decompose_forward, type2_roundtrip, DecomposeOptions, Decomposition};
use legendre_core::linalg::Matrix;
use legendre_core::oscillatory::{
    eval_intersecting_direct, eval_intersecting_reduced, eval_type1, eval_type2, CutoffSpectrumTable, EvalOptions,
    Intersecting, Type1, Type2,
};
use legendre_core::phase::{
    build_model_phase, estimate_tangent_space, induced_legendrian_sample, legendrian_tangent, SampleOptions,
};
use legendre_core::poly::Polynomial;
use legendre_core::scalar::Cx;
use legendre_core::PhaseFunction64;
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn dyadic_x() -> Vec<f64> {
    (0..9).map(|i| 0.3 * 0.5f64.powi(i)).collect()
}

const GRID_Z: [f64; 14] = [-10.0, -6.0, -3.0, -1.5, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 3.0, 6.0, 10.0];

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn criterion_1(decomps: &mut Vec<Decomposition<f64>>) -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let xs = dyadic_x();
    let eo = EvalOptions::default();
    let opts = DecomposeOptions { x_slices: xs.clone(), ..Default::default() };
    let mut worst = 0.0f64;
    let mut unconverged = 0;
    let mut failures = Vec::new();
    for inst in 0..20 {
        let d = random_intersecting_n2(&mut r);
        let dec = match decompose_forward(&d, &opts) {
            Ok(dec) => dec,
            Err(e) => {
                failures.push(format!("instance {inst}: {e}"));
                continue;
            }
        };
        let pts: Vec<(f64, f64)> = xs.iter().flat_map(|&x| GRID_Z.iter().map(move |&z| (x, z))).collect();
        let errs: Vec<(f64, bool)> = pts
            .par_iter()
            .map(|&(x, z)| {
                let y = [x * z];
                let u = eval_intersecting_direct(&d, x, &y, &eo).expect("direct evaluation");
                let rec = dec.reconstruct(x, &y);
                let scale = u.value.norm().max(x.powf(d.m + 0.5));
                ((rec - u.value).norm() / scale, u.converged)
            })
            .collect();
        for (e, ok) in errs {
            worst = worst.max(e);
            if !ok {
                unconverged += 1;
            }
        }
        decomps.push(dec);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && worst <= 1e-5 && secs <= 300.0;
    Outcome {
        id: 1,
        title: "forward decomposition reconstructs direct quadrature",
        pass,
        detail: format!(
            "instances=20 grid={}x{} max_rel_err={worst:.3e} (tol 1e-5) unconverged_direct={unconverged} runtime={secs:.1}s (limit 300s){}",
            xs.len(),
            GRID_Z.len(),
            if failures.is_empty() { String::new() } else { format!(" errors={failures:?}") }
        ),
    }
}

fn criterion_2(table: &Arc<CutoffSpectrumTable<f64>>) -> Outcome {
    let m = 0.25;
    let d = decompose_converse(split(2, 1), Polynomial::one(2), m, table.clone()).unwrap();
    let eo = EvalOptions::default();
    let pts: Vec<(f64, f64)> = dyadic_x().into_iter().flat_map(|x| GRID_Z.iter().map(move |&z| (x, z))).collect();
    let errs: Vec<f64> = pts
        .par_iter()
        .map(|&(x, z)| {
            let u = eval_intersecting_direct(&d, x, &[x * z], &eo).expect("direct evaluation");
            (u.value / x.powf(m + 0.5) - Cx::new(alpha(z), 0.0)).norm()
        })
        .collect();
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Outcome {
        id: 2,
        title: "converse synthesis of f = 1 gives x^{m+1/2} alpha(y/x)",
        pass: worst <= 1e-6,
        detail: format!("points={} max_abs_err={worst:.3e} (tol 1e-6, prefactor stripped)", errs.len()),
    }
}

fn criterion_3(decomps: &[Decomposition<f64>]) -> Outcome {
    let mut decay_ok = !decomps.is_empty();
    let mut worst_exp = f64::NEG_INFINITY;
    let mut min_points = usize::MAX;
    let mut cancel = 0.0f64;
    for d in decomps {
        decay_ok &= d.diagnostics.decay_passes(6);
        cancel = cancel.max(d.diagnostics.max_b_cancellation());
        for s in &d.diagnostics.slices {
            worst_exp = worst_exp.max(s.decay.exponents[6]);
            min_points = min_points.min(s.decay.fitted_points);
        }
    }
    let mut r = rng(303);
    let pts = [(0.1, 0.05), (0.02, -0.03), (0.3, 0.6), (0.001, 0.002), (0.05, -0.4)];
    let eo = EvalOptions::default();
    let mut amps = vec![
        SchwartzAmplitude::gaussian(1),
        SchwartzAmplitude::zero(1),
        SchwartzAmplitude::single(1, c(1.0, 0.0), 1, 0.0, 1.0),
    ];
    amps.extend((0..5).map(|_| random_profile(&mut r, 1)));
    let mut roundtrip = 0.0f64;
    for v in &amps {
        let (_, res) = type2_roundtrip(v, 0.3, &pts, &eo).unwrap();
        roundtrip = roundtrip.max(res);
    }
    Outcome {
        id: 3,
        title: "g decays to order 6, b integrates to zero, type-2 round trip closes",
        pass: decay_ok && cancel <= 1e-10 && roundtrip <= 1e-8,
        detail: format!(
            "decay_N<=6={decay_ok} worst_exponent_N6={worst_exp:.2} (tol 0.2) min_fit_points={min_points} max_b_integral={cancel:.2e} (tol 1e-10) type2_residual={roundtrip:.2e} (tol 1e-8)"
        ),
    }
}

fn criterion_4(table: &Arc<CutoffSpectrumTable<f64>>) -> Outcome {
    let mut r = rng(404);
    let s = split(2, 1);
    let grid = CornerGrid::new(vec![]);
    let chart = Chart::FfProjective(1);
    let tol = 1e-8;
    let mut ok = true;
    let mut notes = Vec::new();
    let mut max_unc = 0.0f64;
    let mut min_c10 = f64::INFINITY;
    for inst in 0..5 {
        let m: f64 = r.gen_range(-0.25..0.75);
        // f = 1 + a x + b y + c x y, plus an odd (so f-free) g-part concentrated in |Z| < 2
        let f = Polynomial::from_terms(
            2,
            vec![
                (vec![0, 0], c(1.0, 0.0)),
                (vec![1, 0], c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))),
                (vec![0, 1], c(r.gen_range(-1.0..1.0), 0.0)),
                (vec![1, 1], c(r.gen_range(-1.0..1.0), 0.0)),
            ],
        )
        .unwrap();
        let u1 = decompose_converse(s, f, m, table.clone()).unwrap();
        let narrow = SchwartzAmplitude::single(3, c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)), if r.gen_bool(0.5) { 1 } else { 3 }, 0.0, 8.0);
        let u0 = Intersecting::hermite(s, m, narrow).unwrap();
        let eo = EvalOptions::default();
        let u = |cp: &ChartPoint<f64>| {
            let p = from_chart(cp, s)?;
            Ok(eval_intersecting_reduced(&u1, p.x, &p.y, &eo)?.value + eval_intersecting_reduced(&u0, p.x, &p.y, &eo)?.value)
        };
        let pre = Prefactor::power_of_x(m + 0.5);
        let mut cases: Vec<(String, Option<Multiplier<f64>>)> = vec![("1".into(), None)];
        let sigma = Multiplier::on_chart("x/y", Polynomial::var(2, 1));
        for (name, h) in [
            ("y", Polynomial::var(2, 1)),
            ("x^2", Polynomial::from_terms(2, vec![(vec![2, 0], 1.0)]).unwrap()),
            ("x*y", Polynomial::from_terms(2, vec![(vec![1, 1], 1.0)]).unwrap()),
        ] {
            cases.push((name.into(), Some(Multiplier::on_x(name, &h, s, 1).unwrap())));
        }
        cases.push(("x/y".into(), Some(sigma)));
        for (name, h) in cases {
            let hu = |cp: &ChartPoint<f64>| -> legendre_core::Result<Cx<f64>> {
                let v = u(cp)?;
                Ok(match &h {
                    Some(h) => v * h.eval(&cp.coords),
                    None => v,
                })
            };
            let t = match extract_coefficients(&hu, chart, pre, &grid) {
                Ok(t) => t,
                Err(e) => {
                    ok = false;
                    notes.push(format!("inst {inst} h={name}: {e}"));
                    continue;
                }
            };
            let mem = check_membership(&t, &MembershipRule::with_tol(tol));
            for j in 1..=t.order {
                for l in 0..j {
                    max_unc = max_unc.max(t.unc[j][l]);
                }
            }
            if name == "x/y" {
                let c10 = t.c[1][0].norm();
                min_c10 = min_c10.min(c10);
                let found = mem.violations.iter().any(|v| (v.j, v.l) == (1, 0));
                if !(mem.verdict == Verdict::NotIntersecting && found && c10 >= 0.5) {
                    ok = false;
                    notes.push(format!("inst {inst}: sigma multiplier verdict {:?} c10={c10:.3}", mem.verdict));
                }
            } else if mem.verdict != Verdict::Intersecting {
                ok = false;
                notes.push(format!("inst {inst} h={name}: verdict {:?} violations {:?}", mem.verdict, mem.violations));
            }
        }
    }
    ok &= max_unc <= 1e-4;
    Outcome {
        id: 4,
        title: "Taylor criterion at the corner, with properness witness",
        pass: ok,
        detail: format!(
            "instances=5 N=4 max_unc(l<j)={max_unc:.2e} (tol 1e-4) min|c10| under x/y={min_c10:.3} (need >= 0.5){}",
            if notes.is_empty() { String::new() } else { format!(" notes={notes:?}") }
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut r = rng(505);
    let mut succeeded = 0;
    let mut weakest = f64::INFINITY;
    let mut rejected = 0;
    let mut notes = Vec::new();
    let mut tangent_checked = 0;
    let mut tangent_failed = 0;
    let mut pairs = 0;
    while pairs < 100 {
        let n = 2 + pairs % 3;
        let k = r.gen_range(1..n);
        let s = split(n, k);
        let data = random_model_data(&mut r, s);
        let phi = build_model_phase(&data);
        let mut y = vec![0.0; n - 1];
        for yi in y.iter_mut().skip(k) {
            *yi = r.gen_range(-0.5..0.5);
        }
        let v: Vec<f64> = (0..k - 1).map(|_| r.gen_range(-1.0..1.0)).collect();
        let v1 = match legendrian_tangent(&phi, &y, &v) {
            Ok(t) => t,
            Err(_) => {
                rejected += 1;
                continue;
            }
        };
        // full-rank y'' projection of V1
        let rows: Vec<Vec<f64>> = v1.basis().iter().map(|b| b.dy[k..].to_vec()).collect();
        if n - 1 > k {
            let rank = Matrix::from_rows(n - 1 - k, &rows).unwrap().svd().rank(1e-8);
            if rank < n - 1 - k {
                rejected += 1;
                continue;
            }
        }
        pairs += 1;
        let v2 = conormal_tangent(v1.base(), s).unwrap();
        match transversal_coordinate_index(&v1, &v2, s, 1e-10) {
            Ok(rep) if (1..=k).contains(&rep.index) && rep.strengths[rep.index - 1] > 1e-8 => {
                succeeded += 1;
                weakest = weakest.min(rep.strengths[rep.index - 1]);
            }
            Ok(rep) => notes.push(format!("n={n} k={k}: weak index {:?}", rep.strengths)),
            Err(e) => notes.push(format!("n={n} k={k}: {e}")),
        }
        sample_tangents(&mut r, &phi, n, k, &mut tangent_checked, &mut tangent_failed);
    }
    Outcome {
        id: 5,
        title: "transversal coordinate exists; sampled tangent spaces are Legendre",
        pass: succeeded == 100 && tangent_failed == 0 && tangent_checked > 0,
        detail: format!(
            "pairs=100 succeeded={succeeded} min_strength={weakest:.2e} (need > 1e-8) rejected_generations={rejected} tangent_spaces={tangent_checked} non_legendre={tangent_failed} (tol 1e-6){}",
            if notes.is_empty() { String::new() } else { format!(" notes={notes:?}") }
        ),
    }
}

fn sample_tangents(r: &mut impl Rng, phi: &PhaseFunction64, n: usize, k: usize, checked: &mut usize, failed: &mut usize) {
    let grid: Vec<Vec<f64>> = (0..3).map(|_| (0..n - 1).map(|_| r.gen_range(-0.3..0.3)).collect()).collect();
    let seeds: Vec<Vec<f64>> = (0..2).map(|_| (0..k - 1).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
    let seeds = if k == 1 { Vec::new() } else { seeds };
    let sample = induced_legendrian_sample(phi, &grid, &seeds, &SampleOptions::default()).unwrap();
    for p in &sample.points {
        if let Ok(ts) = estimate_tangent_space(phi, &p.y, &p.v, 1e-5) {
            *checked += 1;
            if !is_legendre_subspace(&ts, 1e-6) {
                *failed += 1;
            }
        }
    }
}

fn criterion_6() -> Outcome {
    let xs: Vec<f64> = (0..6).map(|i| 0.1 * 0.5f64.powi(i)).collect();
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let fit = |f: &dyn Fn(f64) -> f64| slope(&lx, &xs.iter().map(|&x| f(x).ln()).collect::<Vec<_>>());
    let mut rows = Vec::new();

    let phase = PhaseFunction64::new(1, 0, Polynomial::from_terms(1, vec![(vec![2], 1.0), (vec![1], 0.3)]).unwrap()).unwrap();
    let t = Type1::new(2, 0.3, phase, Polynomial::constant(2, c(1.5, 0.0))).unwrap();
    rows.push(("type1 n=2", fit(&|x| eval_type1(&t, x, &[0.4]).unwrap().value.norm()), t.exponent()));

    let phase = PhaseFunction64::new(2, 0, Polynomial::from_terms(2, vec![(vec![2, 0], 1.0), (vec![0, 1], -1.0)]).unwrap()).unwrap();
    let t = Type1::new(3, -0.2, phase, Polynomial::constant(3, c(0.5, 0.5))).unwrap();
    rows.push(("type1 n=3", fit(&|x| eval_type1(&t, x, &[0.2, 0.1]).unwrap().value.norm()), t.exponent()));

    let t = Type2::new(split(2, 1), 0.4, vec![SchwartzAmplitude::gaussian(1)]).unwrap();
    rows.push(("type2 n=2 k=1", fit(&|x| eval_type2(&t, x, &[0.7 * x]).unwrap().value.norm()), t.exponent()));

    let t = Type2::new(split(3, 2), 0.1, vec![SchwartzAmplitude::gaussian(1), SchwartzAmplitude::single(1, c(1.0, 0.0), 1, 0.2, 1.0)]).unwrap();
    rows.push(("type2 n=3 k=2", fit(&|x| eval_type2(&t, x, &[0.3 * x, -0.4 * x]).unwrap().value.norm()), t.exponent()));

    let t = Type2::new(split(3, 1), 0.0, vec![SchwartzAmplitude::gaussian(2)]).unwrap();
    rows.push(("type2 n=3 k=1", fit(&|x| eval_type2(&t, x, &[0.5 * x, 0.3]).unwrap().value.norm()), t.exponent()));

    let eo = EvalOptions::default();
    let m = 0.35;
    let a = SchwartzAmplitude::gaussian(3).add(&SchwartzAmplitude::single(3, c(0.3, 0.2), 2, 0.5, 1.3));
    let d = Intersecting::hermite(split(2, 1), m, a).unwrap();
    for z in [0.5, 2.0] {
        let s = fit(&|x| eval_intersecting_direct(&d, x, &[z * x], &eo).unwrap().value.norm());
        rows.push((if z < 1.0 { "intersecting n=2 Z=0.5" } else { "intersecting n=2 Z=2" }, s, m + 0.5));
    }
    let worst = rows.iter().map(|(_, s, q)| (s - q).abs()).fold(0.0, f64::max);
    let detail = rows.iter().map(|(n, s, q)| format!("{n}: slope={s:.5} q={q:.4}")).collect::<Vec<_>>().join("; ");
    Outcome {
        id: 6,
        title: "x-scaling exponents",
        pass: worst <= 0.01,
        detail: format!("max_dev={worst:.2e} (tol 0.01) {detail}"),
    }
}

fn criterion_7() -> Outcome {
    let xs = [0.1, 0.05, 0.025, 0.0125];
    let lx: Vec<f64> = xs.iter().map(|x: &f64| x.ln()).collect();
    let mut r = rng(707);
    let mut instances = vec![Intersecting::hermite(split(2, 1), 0.0, SchwartzAmplitude::gaussian(3)).unwrap()];
    while instances.len() < 6 {
        let a = random_hermite(&mut r, 3, false);
        instances.push(Intersecting::hermite(split(2, 1), r.gen_range(-0.5..1.0), a).unwrap());
    }
    let eo = EvalOptions::default();
    let mut worst = f64::INFINITY;
    let mut all = Vec::new();
    for d in &instances {
        for y in [-0.2, -0.35] {
            let vals: Vec<f64> = xs.iter().map(|&x| eval_intersecting_reduced(d, x, &[y], &eo).unwrap().value.norm().ln()).collect();
            let s = slope(&lx, &vals);
            worst = worst.min(s);
            all.push(s);
        }
    }
    Outcome {
        id: 7,
        title: "decay off the front face for y < 0",
        pass: worst >= 5.0,
        detail: format!(
            "instances={} y in {{-0.2,-0.35}} min_fitted_exponent={worst:.2} (need >= 5) exponents={:?}",
            instances.len(),
            all.iter().map(|s| (s * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    }
}

fn criterion_8(table: &Arc<CutoffSpectrumTable<f64>>) -> Outcome {
    let mut r = rng(808);
    let mut instances: Vec<Intersecting<f64>> = (0..8).map(|i| random_intersecting_any(&mut r, i)).collect();
    let f = Polynomial::from_terms(2, vec![(vec![0, 0], c(1.0, 0.3)), (vec![0, 1], c(-0.5, 0.0))]).unwrap();
    instances.push(decompose_converse(split(2, 1), f, 0.2, table.clone()).unwrap());
    let pts: Vec<(usize, f64, Vec<f64>)> = (0..100)
        .map(|i| {
            let d = &instances[i % instances.len()];
            let x = 10f64.powf(r.gen_range(-2.0..(0.3f64).log10()));
            let y = (0..d.n - 1).map(|_| r.gen_range(-0.5..0.5)).collect();
            (i % instances.len(), x, y)
        })
        .collect();
    let eo = EvalOptions::default();
    let errs: Vec<f64> = pts
        .par_iter()
        .map(|(i, x, y)| {
            let d = &instances[*i];
            let a = eval_intersecting_direct(d, *x, y, &eo).unwrap();
            let b = eval_intersecting_reduced(d, *x, y, &eo).unwrap();
            let scale = b.value.norm().max(x.powf(d.exponent() + 1.0));
            (a.value - b.value).norm() / scale
        })
        .collect();
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Outcome {
        id: 8,
        title: "direct and Fourier-reduced evaluation agree",
        pass: worst <= 1e-6,
        detail: format!("points=100 instances={} max_rel_err={worst:.2e} (tol 1e-6)", instances.len()),
    }
}

fn report(o: &Outcome, secs: f64) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {} {tag} [{:.1}s] {}: {}", o.id, secs, o.title, o.detail);
    let _ = std::io::stdout().flush();
}

fn main() {
    let table = Arc::new(CutoffSpectrumTable::new().expect("cutoff table"));
    let mut decomps = Vec::new();
    let mut failed = 0;
    let mut total = 0;
    let mut run = |f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        report(&o, t.elapsed().as_secs_f64());
        total += 1;
        if !o.pass {
            failed += 1;
        }
    };
    run(&mut || criterion_1(&mut decomps));
    run(&mut || criterion_2(&table));
    run(&mut || criterion_3(&decomps));
    run(&mut || criterion_4(&table));
    run(&mut criterion_5);
    run(&mut criterion_6);
    run(&mut criterion_7);
    run(&mut || criterion_8(&table));
    println!("acceptance: {} passed, {failed} failed", total - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
