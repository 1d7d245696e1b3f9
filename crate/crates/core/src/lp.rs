//! Exact feasibility for systems `A w ≥ 1, w ≥ 0`.
//!
//! Phase-1 simplex on an integer-preserving tableau: every entry is stored as
//! an integer over a shared positive denominator (the previous pivot), and
//! each pivot divides exactly. Bland's rule picks both entering and leaving
//! variables, so the method terminates.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::exact::Rational;

/// Returns a point of `{w ≥ 0 : A w ≥ 1}` or `None` when the system is
/// infeasible. Every row of `rows` must have `nvars` entries.
pub fn feasible_point(rows: &[Vec<BigInt>], nvars: usize) -> Option<Vec<Rational>> {
    let m = rows.len();
    let n = nvars;
    if m == 0 {
        return Some(vec![Rational::zero(); n]);
    }
    // Columns: w (0..n), surplus s (n..n+m), rhs. Artificial variables are
    // implicit: once one leaves the basis it never re-enters.
    let width = n + m + 1;
    let rhs = n + m;
    let mut t: Vec<Vec<BigInt>> = Vec::with_capacity(m + 1);
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        let mut r = vec![BigInt::zero(); width];
        r[..n].clone_from_slice(row);
        r[n + i] = BigInt::from(-1);
        r[rhs] = BigInt::from(1);
        t.push(r);
    }
    // Reduced costs of the phase-1 objective (sum of artificials).
    let mut obj = vec![BigInt::zero(); width];
    for r in &t {
        for j in 0..rhs {
            obj[j] -= &r[j];
        }
        obj[rhs] -= &r[rhs];
    }
    t.push(obj);
    let mut basis: Vec<usize> = (0..m).map(|i| n + m + i).collect();
    let mut denom = BigInt::from(1);

    loop {
        let Some(col) = (0..rhs).find(|&j| t[m][j].is_negative()) else {
            break;
        };
        let mut pivot: Option<usize> = None;
        for i in 0..m {
            if !t[i][col].is_positive() {
                continue;
            }
            pivot = match pivot {
                None => Some(i),
                Some(k) => {
                    let lhs = &t[i][rhs] * &t[k][col];
                    let rhs_v = &t[k][rhs] * &t[i][col];
                    if lhs < rhs_v || (lhs == rhs_v && basis[i] < basis[k]) {
                        Some(i)
                    } else {
                        Some(k)
                    }
                }
            };
        }
        // Phase 1 is bounded below by zero, so a pivot row always exists.
        let r = pivot.expect("phase-1 objective is bounded");
        let p = t[r][col].clone();
        for i in 0..=m {
            if i == r {
                continue;
            }
            let f = t[i][col].clone();
            for j in 0..width {
                let v = &t[i][j] * &p - &f * &t[r][j];
                t[i][j] = v / &denom;
            }
        }
        denom = p;
        basis[r] = col;
    }

    if !t[m][rhs].is_zero() {
        return None;
    }
    let mut w = vec![Rational::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            w[b] = Rational::new(t[i][rhs].clone(), denom.clone());
        }
    }
    Some(w)
}
