mod common;

use std::sync::Arc;

use common::*;
use legendre_core::decompose::{decompose_converse, decompose_forward, DecomposeOptions};
use legendre_core::oscillatory::{eval_intersecting_direct, eval_intersecting_reduced, CutoffSpectrumTable, EvalOptions};

const XS: [f64; 5] = [0.3, 0.075, 0.01875, 0.0046875, 0.001171875];
const ZS: [f64; 9] = [-10.0, -3.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0, 10.0];

/// Re-synthesises `f` through the converse construction and adds back
/// `x^{e+1} (g + r)`; the sum must reproduce the original distribution.
#[test]
fn forward_then_converse_reproduces_u() {
    let table = Arc::new(CutoffSpectrumTable::new().unwrap());
    let eo = EvalOptions::default();
    let opts = DecomposeOptions { x_slices: XS.to_vec(), ..Default::default() };
    let mut r = rng(7);
    for inst in 0..4 {
        let d = random_intersecting_n2(&mut r);
        let dec = decompose_forward(&d, &opts).unwrap();
        let conv = decompose_converse(d.split(), dec.f_polynomial().clone(), d.m, table.clone()).unwrap();
        let e1 = dec.exponent();
        for &x in &XS {
            for &z in &ZS {
                let y = [x * z];
                let u = eval_intersecting_direct(&d, x, &y, &eo).unwrap().value;
                let f_part = eval_intersecting_reduced(&conv, x, &y, &eo).unwrap().value;
                let rest = (dec.g(x, &y) + dec.remainder_part(x, &y)) * x.powf(e1);
                let scale = u.norm().max(x.powf(e1));
                let err = (f_part + rest - u).norm() / scale;
                assert!(err <= 1e-5, "instance {inst} x={x} Z={z}: {err:e}");
            }
        }
    }
}

#[test]
fn b_cancellation_holds_on_every_slice() {
    let opts = DecomposeOptions { x_slices: XS.to_vec(), ..Default::default() };
    let mut r = rng(8);
    for _ in 0..4 {
        let dec = decompose_forward(&random_intersecting_n2(&mut r), &opts).unwrap();
        assert!(dec.diagnostics.max_b_cancellation() <= 1e-10);
        assert!(dec.diagnostics.decay_passes(6));
    }
}
