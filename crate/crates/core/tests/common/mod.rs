#![allow(dead_code)]

use legendre_core::amplitude::{HermiteTerm, SchwartzAmplitude};
use legendre_core::contact::SplittingData;
use legendre_core::oscillatory::{Intersecting, SpectralAmplitude, YbarCutoff};
use legendre_core::phase::ModelPhaseData;
use legendre_core::poly::Polynomial;
use legendre_core::scalar::Cx;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Cx<f64> {
    Cx::new(re, im)
}

fn rand_cx(r: &mut ChaCha8Rng, scale: f64) -> Cx<f64> {
    c(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
}

/// Random coefficient in `n_total` passive variables, affine in the first
/// `n_active` ones, optionally with a square of `quad_slot`.
pub fn random_coefficient(r: &mut ChaCha8Rng, n_active: usize, n_total: usize, quad_slot: Option<usize>) -> Polynomial<Cx<f64>> {
    let mut terms = vec![(vec![0; n_total], c(1.0, 0.0) + rand_cx(r, 0.5))];
    for i in 0..n_active {
        let mut e = vec![0; n_total];
        e[i] = 1;
        terms.push((e, rand_cx(r, 0.5)));
    }
    if let Some(b) = quad_slot {
        if r.gen_bool(0.3) {
            let mut e = vec![0; n_total];
            e[b] = 2;
            terms.push((e, rand_cx(r, 0.3)));
        }
    }
    Polynomial::from_terms(n_total, terms).unwrap()
}

/// Hermite–Gaussian amplitude; with `with_ybar` the last passive variable
/// (`ȳ`) enters the coefficients, otherwise they are free of it.
pub fn random_hermite(r: &mut ChaCha8Rng, n_passive: usize, with_ybar: bool) -> SchwartzAmplitude<f64> {
    let count = r.gen_range(1..=3);
    let terms = (0..count)
        .map(|_| {
            let coeff = if with_ybar {
                random_coefficient(r, n_passive, n_passive, Some(n_passive - 1))
            } else {
                random_coefficient(r, n_passive - 1, n_passive, None)
            };
            HermiteTerm {
                coeff,
                index: r.gen_range(0..=3),
                center: r.gen_range(-1.0..1.0),
                width: r.gen_range(0.6..2.0),
                modulation: if r.gen_bool(0.5) { 0.0 } else { r.gen_range(-1.0..1.0) },
            }
        })
        .collect();
    SchwartzAmplitude::new(n_passive, terms).unwrap()
}

/// Profile in all passive variables (no `ȳ` slot).
pub fn random_profile(r: &mut ChaCha8Rng, n_passive: usize) -> SchwartzAmplitude<f64> {
    let count = r.gen_range(1..=2);
    let terms = (0..count)
        .map(|_| HermiteTerm {
            coeff: random_coefficient(r, n_passive, n_passive, None),
            index: r.gen_range(0..=2),
            center: r.gen_range(-0.5..0.5),
            width: r.gen_range(0.6..2.0),
            modulation: 0.0,
        })
        .collect();
    SchwartzAmplitude::new(n_passive, terms).unwrap()
}

pub fn split(n: usize, k: usize) -> SplittingData {
    SplittingData::new(n, k).unwrap()
}

/// `n = 2` Hermite–Gaussian instance, `ȳ`-dependent with probability one half.
pub fn random_intersecting_n2(r: &mut ChaCha8Rng) -> Intersecting<f64> {
    let with_ybar = r.gen_bool(0.5);
    let a = random_hermite(r, 3, with_ybar);
    let m = r.gen_range(-0.5..1.0);
    Intersecting::hermite(split(2, 1), m, a).unwrap()
}

/// Instances across the supported `(n, k)` and amplitude kinds.
pub fn random_intersecting_any(r: &mut ChaCha8Rng, kind: usize) -> Intersecting<f64> {
    let m = r.gen_range(-0.5..1.0);
    match kind % 4 {
        0 => random_intersecting_n2(r),
        1 => {
            let a = random_hermite(r, 3, true);
            let cut = YbarCutoff { start: r.gen_range(0.1..0.5), width: r.gen_range(0.1..0.4) };
            Intersecting::new(split(2, 1), m, SpectralAmplitude::HermiteGaussian(a), None, Some(cut)).unwrap()
        }
        2 => {
            let a = random_hermite(r, 4, true);
            Intersecting::hermite(split(3, 1), m, a).unwrap()
        }
        _ => {
            let a = random_hermite(r, 4, true);
            let p = random_profile(r, 3);
            Intersecting::new(split(3, 2), m, SpectralAmplitude::HermiteGaussian(a), Some(p), None).unwrap()
        }
    }
}

/// Random polynomial of total degree ≤ `deg` in `n` variables with coefficients in `[−s, s]`.
pub fn random_poly(r: &mut ChaCha8Rng, n: usize, deg: u32, s: f64) -> Polynomial<f64> {
    let mut terms = Vec::new();
    let mut e = vec![0u32; n];
    loop {
        if e.iter().sum::<u32>() <= deg && r.gen_bool(0.7) {
            terms.push((e.clone(), r.gen_range(-s..s)));
        }
        let mut i = 0;
        loop {
            if i == n {
                return Polynomial::from_terms(n, terms).unwrap();
            }
            e[i] += 1;
            if e[i] <= deg {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

/// `T' = y_k·T`, `Ỹ = y_k·Y` with random quadratic `T`, `Y`.
pub fn random_model_data(r: &mut ChaCha8Rng, s: SplittingData) -> ModelPhaseData<f64> {
    let nv = ModelPhaseData::<f64>::local_nvars(s);
    let t = random_poly(r, nv, 2, 1.0);
    let y = (0..s.k - 1).map(|_| random_poly(r, nv, 2, 1.0)).collect();
    ModelPhaseData::from_reduced(s, t, y).unwrap()
}
