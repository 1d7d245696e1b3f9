//! Central-difference verification of tape gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::params::ParamStore;
use crate::tape::{Tape, Var};

/// Roundoff in the difference grows like eps·|loss|/STEP; at 1e-5 it swamps
/// gradient entries near 1e-6 of an O(10) loss.
pub const STEP: f64 = 1e-4;
/// Gradients smaller than this are compared absolutely.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Parameter name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
}

impl GradReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares tape gradients of the scalar `loss` with central differences on
/// up to `per_param` randomly chosen coordinates of every parameter.
pub fn finite_diff_check<F>(store: &ParamStore, loss: F, per_param: usize, seed: u64) -> GradReport
where
    F: for<'t> Fn(&'t Tape, &ParamStore) -> Var<'t>,
{
    let tape = Tape::new();
    let out = loss(&tape, store);
    let grads = tape.backward(out).expect("loss is scalar").for_params(store);
    let eval = |s: &ParamStore| {
        let t = Tape::new();
        loss(&t, s).item()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe = store.clone();
    let mut report = GradReport { max_rel_error: 0.0, checked: 0, worst: None };
    for p in 0..store.len() {
        let n = store.value(p).len();
        for i in sample(&mut rng, n, per_param.min(n)) {
            let x = store.value(p).data()[i];
            probe.value_mut(p).data_mut()[i] = x + STEP;
            let up = eval(&probe);
            probe.value_mut(p).data_mut()[i] = x - STEP;
            let down = eval(&probe);
            probe.value_mut(p).data_mut()[i] = x;
            let numeric = (up - down) / (2.0 * STEP);
            let err = relative_error(grads[p].data()[i], numeric);
            report.checked += 1;
            if err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = Some((store.name(p).to_string(), i));
            }
        }
    }
    report
}
