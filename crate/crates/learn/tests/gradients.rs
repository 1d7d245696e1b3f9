//! Every tape operation against central finite differences.

use std::rc::Rc;

use flipforge_learn::gradcheck::finite_diff_check;
use flipforge_learn::params::glorot;
use flipforge_learn::{ParamStore, Sparse, Tape, Tensor, Var};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-4;

fn store(shapes: &[(usize, usize)], seed: u64) -> ParamStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ParamStore::new();
    for (i, &(r, c)) in shapes.iter().enumerate() {
        s.add(format!("p{i}"), glorot(&mut rng, r, c, 2.0));
    }
    s
}

fn check<F>(shapes: &[(usize, usize)], tol: f64, f: F)
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    for seed in 0..3 {
        let s = store(shapes, seed);
        let report = finite_diff_check(
            &s,
            |tape, st| {
                let vars: Vec<Var> = (0..st.len()).map(|i| tape.param(st, i)).collect();
                f(tape, &vars)
            },
            12,
            seed,
        );
        assert!(report.checked > 0);
        assert!(report.passed(tol), "seed {seed}: {report:?}");
    }
}

/// A fixed, non-symmetric readout so that every output entry matters.
fn readout<'t>(tape: &'t Tape, x: Var<'t>) -> Var<'t> {
    let v = x.value();
    let w = Tensor::new(v.rows(), v.cols(), (0..v.len()).map(|i| ((i * 7 + 3) % 11) as f64 / 5.0 - 1.0).collect());
    x.mul(tape.leaf(w)).sum()
}

#[test]
fn linear_layer() {
    check(&[(5, 4), (4, 3), (1, 3)], 1e-7, |t, p| readout(t, p[0].matmul(p[1]).add_row(p[2])));
}

#[test]
fn elementwise_ops() {
    check(&[(3, 4), (3, 4)], TOL, |t, p| readout(t, p[0].mul(p[1]).add(p[0].sub(p[1]))));
    check(&[(3, 4)], TOL, |t, p| readout(t, p[0].silu()));
    check(&[(3, 4)], TOL, |t, p| readout(t, p[0].sigmoid()));
    check(&[(3, 4)], TOL, |t, p| readout(t, p[0].exp()));
    check(&[(3, 4)], TOL, |t, p| readout(t, p[0].square().scale(-0.7)));
    check(&[(3, 4)], TOL, |t, p| readout(t, p[0].square().add(t.leaf(Tensor::new(3, 4, vec![0.5; 12]))).log()));
}

#[test]
fn reductions_and_reshaping() {
    check(&[(3, 4)], TOL, |_, p| p[0].square().mean());
    check(&[(3, 4)], TOL, |t, p| readout(t, p[0].sum_cols()));
    check(&[(3, 4)], TOL, |t, p| readout(t, p[0].transpose()));
    check(&[(3, 2), (3, 4)], TOL, |t, p| readout(t, Var::concat_cols(&[p[0], p[1]])));
    check(&[(3, 4)], TOL, |t, p| p[0].pick(2, 1).mul(p[0].pick(0, 3)).add(readout(t, p[0])));
    check(&[(4, 3), (4, 1)], TOL, |t, p| readout(t, p[0].mul_col(p[1])));
}

#[test]
fn row_indexing_ops() {
    let idx: Rc<[usize]> = vec![2, 0, 2, 1, 3].into();
    let idx2 = Rc::clone(&idx);
    check(&[(4, 3)], TOL, move |t, p| readout(t, p[0].gather_rows(Rc::clone(&idx))));
    check(&[(5, 3)], TOL, move |t, p| readout(t, p[0].scatter_add_rows(Rc::clone(&idx2), 4)));
    let w: Rc<[f64]> = vec![0.5, -1.0, 2.0].into();
    check(&[(3, 2)], TOL, move |t, p| readout(t, p[0].row_scale(Rc::clone(&w))));
    check(&[(5, 3)], TOL, |t, p| readout(t, p[0].max_pool_rows(&[vec![0, 1, 4], vec![2], vec![3, 2]])));
}

#[test]
fn softmax_family() {
    let mask: Rc<[usize]> = vec![0, 2, 3].into();
    let m2 = Rc::clone(&mask);
    check(&[(1, 5)], TOL, move |t, p| readout(t, p[0].softmax_masked(Rc::clone(&mask))));
    check(&[(1, 5)], TOL, move |t, p| readout(t, p[0].log_softmax_masked(Rc::clone(&m2))));
}

#[test]
fn clamp_and_minimum() {
    check(&[(3, 4)], TOL, |t, p| readout(t, p[0].clamp(-0.3, 0.3)));
    check(&[(3, 4), (3, 4)], TOL, |t, p| readout(t, p[0].minimum(p[1])));
}

#[test]
fn sparse_product() {
    let s = Rc::new(Sparse::new(3, 4, vec![(0, 1, 0.5), (0, 3, -1.0), (2, 0, 2.0), (1, 1, 0.25), (2, 3, 1.5)]));
    let dense = s.to_dense();
    let s2 = Rc::clone(&s);
    check(&[(4, 2)], TOL, move |t, p| readout(t, p[0].sparse_matmul(Rc::clone(&s))));
    let st = store(&[(4, 2)], 9);
    let tape = Tape::new();
    let x = tape.param(&st, 0);
    let a = x.sparse_matmul(s2).value();
    let b = dense.matmul(&x.value());
    assert!(a.max_abs_diff(&b) < 1e-12);
}

#[test]
fn backward_is_deterministic() {
    let st = store(&[(6, 5), (5, 4)], 4);
    let run = || {
        let tape = Tape::new();
        let out = tape.param(&st, 0).matmul(tape.param(&st, 1)).silu().max_pool_rows(&[vec![0, 3, 5], vec![1, 2]]);
        let loss = out.square().sum();
        tape.backward(loss).unwrap().for_params(&st)
    };
    let (a, b) = (run(), run());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.data(), y.data());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matmul_gradients_match_finite_differences(r in 1usize..5, k in 1usize..5, c in 1usize..5, seed in 0u64..1000) {
        let s = store(&[(r, k), (k, c)], seed);
        let report = finite_diff_check(&s, |tape, st| readout(tape, tape.param(st, 0).matmul(tape.param(st, 1))), 6, seed);
        prop_assert!(report.passed(1e-5), "{:?}", report);
    }
}
