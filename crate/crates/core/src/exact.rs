//! Exact integer and rational linear algebra used by every geometric predicate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::GeomError;

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Default snapping denominator exponent (`2^20`).
pub const SNAP_BITS: u32 = 20;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, an integer, or a finite decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_digits}{frac}");
        let mut n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        if neg {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Some(Rational::new(n, d));
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rounds `x` to the nearest multiple of `2^-bits`.
pub fn snap_to_rational(x: f64, bits: u32) -> Result<Rational, GeomError> {
    if !x.is_finite() {
        return Err(GeomError::NonFinite(x));
    }
    let scale = (1u64 << bits) as f64;
    let n = (x * scale).round();
    let n = BigInt::from(n as i128);
    Ok(Rational::new(n, BigInt::one() << bits))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large components: fall back to a ratio of floats.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Scales each column of a rational matrix by the lcm of its denominators.
///
/// Returns the integer matrix and the per-column scale factors. Affine
/// dependences and orientation signs are unchanged by positive column scaling.
pub fn scale_columns(rows: &[Vec<Rational>], ncols: usize) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let mut scales = vec![BigInt::one(); ncols];
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            scales[j] = scales[j].lcm(v.denom());
        }
    }
    let ints = rows
        .iter()
        .map(|row| row.iter().enumerate().map(|(j, v)| v.numer() * (&scales[j] / v.denom())).collect())
        .collect();
    (ints, scales)
}

/// Determinant of a square integer matrix by fraction-free elimination.
pub fn det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Fraction-free determinant in `i128`; `None` on overflow.
pub fn det_i128(mut m: Vec<Vec<i128>>) -> Option<i128> {
    let n = m.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = false;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Some(0);
            };
            m.swap(k, p);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let a = m[i][j].checked_mul(m[k][k])?;
                let b = m[i][k].checked_mul(m[k][j])?;
                m[i][j] = a.checked_sub(b)? / prev;
            }
        }
        prev = m[k][k];
    }
    let d = m[n - 1][n - 1];
    Some(if sign { -d } else { d })
}

/// Rank of an integer matrix (rows of equal length).
pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..nrows {
            if m[i][c].is_zero() {
                continue;
            }
            let (a, b) = (m[r][c].clone(), m[i][c].clone());
            for j in c..ncols {
                let v = &m[i][j] * &a - &m[r][j] * &b;
                m[i][j] = v;
            }
            normalize_row(&mut m[i]);
        }
        r += 1;
        if r == nrows {
            break;
        }
    }
    r
}

fn normalize_row(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

/// Divides an integer vector by the gcd of its entries.
pub fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    normalize_row(&mut v);
    v
}

/// Integer basis of the right nullspace of `rows` (matrix with `ncols` columns).
///
/// One primitive vector per free column, in order of the free columns.
pub fn nullspace(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<Rational>> =
        rows.iter().map(|r| r.iter().cloned().map(Rational::from_integer).collect()).collect();
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..ncols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..nrows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..ncols {
                    let v = &m[r][j] * &f;
                    m[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
            primitive(v.iter().map(|x| x.numer() * (&l / x.denom())).collect())
        })
        .collect()
}

/// Normal `a` of the hyperplane through `d` points in `R^d` (integer coords),
/// returned with offset `b` so that `a·p = b` on the points. `None` if the
/// points do not span a hyperplane.
pub fn hyperplane_through(points: &[&[BigInt]]) -> Option<(Vec<BigInt>, BigInt)> {
    let d = points.len();
    let base = points[0];
    let diffs: Vec<Vec<BigInt>> =
        points[1..].iter().map(|p| p.iter().zip(base).map(|(x, y)| x - y).collect()).collect();
    let mut normal = Vec::with_capacity(d);
    for j in 0..d {
        let minor: Vec<Vec<BigInt>> = diffs
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let m = det(minor);
        normal.push(if j % 2 == 0 { m } else { -m });
    }
    if normal.iter().all(Zero::is_zero) {
        return None;
    }
    let normal = primitive(normal);
    let offset = dot(&normal, base);
    Some((normal, offset))
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
