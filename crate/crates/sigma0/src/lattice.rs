//! Short-vector enumeration in a lattice given by integer coordinates and a
//! real embedding. Used for every bounded search over ring elements.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use crate::intmat::ck;
use crate::{Error, Result};

/// A lattice basis: integer coordinates in some fixed Z-module and the real
/// images defining the quadratic form `|image|^2`.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub coords: Vec<Vec<i128>>,
    pub images: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Lattice {
    pub fn new(coords: Vec<Vec<i128>>, images: Vec<Vec<f64>>) -> Self {
        assert_eq!(coords.len(), images.len());
        Lattice { coords, images }
    }

    fn gso(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.images.len();
        let mut mu = vec![vec![0.0; n]; n];
        let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut bn = vec![0.0; n];
        for i in 0..n {
            let mut v = self.images[i].clone();
            for j in 0..i {
                mu[i][j] = dot(&self.images[i], &bstar[j]) / bn[j];
                for (x, y) in v.iter_mut().zip(&bstar[j]) {
                    *x -= mu[i][j] * y;
                }
            }
            bn[i] = dot(&v, &v);
            bstar.push(v);
        }
        (mu, bn)
    }

    fn sub_mul(&mut self, i: usize, j: usize, q: i128) -> Result<()> {
        let (ci, cj) = (self.coords[j].clone(), self.images[j].clone());
        for (x, y) in self.coords[i].iter_mut().zip(&ci) {
            *x = ck(x.checked_sub(ck(q.checked_mul(*y))?))?;
        }
        for (x, y) in self.images[i].iter_mut().zip(&cj) {
            *x -= q as f64 * y;
        }
        Ok(())
    }

    /// In-place LLL reduction with parameter 0.99.
    pub fn lll(&mut self) -> Result<()> {
        let n = self.images.len();
        let mut k = 1;
        let mut guard = 0u32;
        while k < n {
            guard += 1;
            if guard > 100_000 {
                return Err(Error::Inconsistent("LLL did not terminate".into()));
            }
            for j in (0..k).rev() {
                let (mu, _) = self.gso();
                let q = mu[k][j].round();
                if q != 0.0 {
                    self.sub_mul(k, j, q as i128)?;
                }
            }
            let (mu, bn) = self.gso();
            if bn[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * bn[k - 1] {
                k += 1;
            } else {
                self.coords.swap(k, k - 1);
                self.images.swap(k, k - 1);
                k = (k - 1).max(1);
            }
        }
        Ok(())
    }

    /// Visit every nonzero lattice vector with `|image|^2 <= r2` (and some
    /// slightly longer ones; callers re-check exactly). Each vector and its
    /// negative are both visited.
    pub fn enumerate(
        &self,
        r2: f64,
        node_limit: u64,
        mut visit: impl FnMut(&[i128]) -> Result<()>,
    ) -> Result<u64> {
        let mut red = self.clone();
        red.lll()?;
        let (mu, bn) = red.gso();
        let n = bn.len();
        let r2 = r2 * (1.0 + 1e-9) + 1e-12;
        let mut x = vec![0i128; n];
        let mut nodes = 0u64;
        // iterative Fincke-Pohst with explicit stack of (level, upper bound)
        let mut centers = vec![0.0; n];
        let mut partial = vec![0.0; n + 1];
        let mut hi = vec![0i128; n];
        let mut level = n;
        let mut descending = true;
        loop {
            if descending {
                if level == 0 {
                    if x.iter().any(|&v| v != 0) {
                        let mut v = vec![0i128; red.coords[0].len()];
                        for (i, &xi) in x.iter().enumerate() {
                            if xi != 0 {
                                for (a, b) in v.iter_mut().zip(&red.coords[i]) {
                                    *a = ck(a.checked_add(ck(xi.checked_mul(*b))?))?;
                                }
                            }
                        }
                        visit(&v)?;
                    }
                    descending = false;
                    continue;
                }
                let i = level - 1;
                nodes += 1;
                if nodes > node_limit {
                    return Err(Error::SearchExhausted {
                        what: "lattice enumeration".into(),
                        bound: node_limit,
                    });
                }
                let c: f64 = -(i + 1..n).map(|j| mu[j][i] * x[j] as f64).sum::<f64>();
                centers[i] = c;
                let rem = r2 - partial[i + 1];
                if rem < 0.0 {
                    descending = false;
                    continue;
                }
                let w = (rem / bn[i]).sqrt();
                let lo = (c - w).ceil() as i128;
                hi[i] = (c + w).floor() as i128;
                if lo > hi[i] {
                    descending = false;
                    continue;
                }
                x[i] = lo;
                let d = x[i] as f64 - c;
                partial[i] = partial[i + 1] + bn[i] * d * d;
                level = i;
            } else {
                // advance at current level
                let i = level;
                if i >= n {
                    break;
                }
                if x[i] < hi[i] {
                    nodes += 1;
                    if nodes > node_limit {
                        return Err(Error::SearchExhausted {
                            what: "lattice enumeration".into(),
                            bound: node_limit,
                        });
                    }
                    x[i] += 1;
                    let d = x[i] as f64 - centers[i];
                    partial[i] = partial[i + 1] + bn[i] * d * d;
                    descending = true;
                } else {
                    x[i] = 0;
                    level = i + 1;
                }
            }
        }
        Ok(nodes)
    }
}
