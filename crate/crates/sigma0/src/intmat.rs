//! Small exact integer helpers: square roots, factorization and Hermite
//! normal form over the integers.

use alloc::vec;
use alloc::vec::Vec;
use num_integer::Integer;

use crate::{Error, Result};

/// Floor of the square root of `n`.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = num_traits::Float::sqrt(n as f64) as u128;
    // float seed can be off by a few ulps for large n
    while x.checked_mul(x).is_none_or(|s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

pub fn is_square(n: i128) -> bool {
    n >= 0 && {
        let r = isqrt(n as u128);
        r * r == n as u128
    }
}

pub fn is_squarefree(n: i128) -> bool {
    if n == 0 {
        return false;
    }
    factorize(n.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

/// Trial-division factorization, sorted by prime.
pub fn factorize(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    let mut p = 2u128;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    (e.gcd, e.x, e.y)
}

pub(crate) fn ck(v: Option<i128>) -> Result<i128> {
    v.ok_or(Error::Overflow)
}

fn combine(r: &[i128], s: &[i128], x: i128, y: i128) -> Result<Vec<i128>> {
    r.iter()
        .zip(s)
        .map(|(&a, &b)| ck(ck(a.checked_mul(x))?.checked_add(ck(b.checked_mul(y))?)))
        .collect()
}

/// Row-style Hermite normal form of the lattice spanned by `rows` in Z^w.
///
/// Returns `w` rows forming an upper-triangular basis with positive diagonal
/// and entries above each pivot reduced into `[0, pivot)`. When `modulus` is
/// given the lattice must contain `modulus * Z^w`; entries are then kept
/// reduced, which stops coefficient growth.
pub fn hnf(rows: &[Vec<i128>], w: usize, modulus: Option<i128>) -> Result<Vec<Vec<i128>>> {
    let mut rows: Vec<Vec<i128>> = rows.to_vec();
    if let Some(m) = modulus {
        let m = m.abs();
        for i in 0..w {
            let mut r = vec![0i128; w];
            r[i] = m;
            rows.push(r);
        }
    }
    let reduce = |r: &mut Vec<i128>, from: usize| {
        if let Some(m) = modulus {
            for v in r.iter_mut().skip(from) {
                *v = v.rem_euclid(m.abs());
            }
        }
    };
    for col in 0..w {
        let k = col;
        // bring some nonzero entry into position k
        let Some(first) = (k..rows.len()).find(|&i| rows[i][col] != 0) else {
            return Err(Error::pre("lattice is not of full rank"));
        };
        rows.swap(k, first);
        for i in k + 1..rows.len() {
            if rows[i][col] == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(rows[k][col], rows[i][col]);
            let a = rows[k][col] / g;
            let b = rows[i][col] / g;
            let mut nk = combine(&rows[k], &rows[i], x, y)?;
            let mut ni = combine(&rows[k], &rows[i], -b, a)?;
            reduce(&mut nk, col + 1);
            reduce(&mut ni, col + 1);
            rows[k] = nk;
            rows[i] = ni;
        }
        if rows[k][col] < 0 {
            for v in rows[k].iter_mut() {
                *v = -*v;
            }
            reduce(&mut rows[k], col + 1);
        }
    }
    rows.truncate(w);
    for j in 0..w {
        let p = rows[j][j];
        for r in 0..j {
            let q = Integer::div_floor(&rows[r][j], &p);
            if q != 0 {
                let src = rows[j].clone();
                for (c, v) in rows[r].iter_mut().enumerate() {
                    *v = ck(v.checked_sub(ck(q.checked_mul(src[c]))?))?;
                }
            }
        }
    }
    Ok(rows)
}

/// Reduce `v` modulo the lattice with upper-triangular basis `h`; returns the
/// canonical representative (zero iff `v` lies in the lattice).
pub fn reduce_mod_hnf(h: &[Vec<i128>], v: &[i128]) -> Result<Vec<i128>> {
    let mut v = v.to_vec();
    for (j, row) in h.iter().enumerate() {
        let q = Integer::div_floor(&v[j], &row[j]);
        if q != 0 {
            for (c, x) in v.iter_mut().enumerate().skip(j) {
                *x = ck(x.checked_sub(ck(q.checked_mul(row[c]))?))?;
            }
        }
    }
    Ok(v)
}

pub fn hnf_det(h: &[Vec<i128>]) -> Result<i128> {
    h.iter()
        .enumerate()
        .try_fold(1i128, |acc, (i, r)| ck(acc.checked_mul(r[i])))
}
