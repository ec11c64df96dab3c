//! Composite Gauss-Legendre quadrature with panel doubling.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Reusable quadrature rule.
#[derive(Clone, Debug)]
pub struct Quadrature {
    rule: Vec<(f64, f64)>,
    pub max_doublings: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { rule: gauss_legendre(20), max_doublings: 14 }
    }
}

impl Quadrature {
    /// Fixed composite rule with `panels` equal panels.
    pub fn fixed<T, F>(&self, f: &mut F, a: f64, b: f64, panels: usize) -> T
    where
        T: Copy + core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let h = (b - a) / panels as f64;
        let mut s = T::default();
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            for &(x, w) in &self.rule {
                s = s + f(mid + 0.5 * h * x) * (0.5 * h * w);
            }
        }
        s
    }

    /// Integrate a real function, doubling panels until two successive
    /// values agree to `tol` (absolute, scaled by max(1, |I|)).
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        let mut panels = 1usize;
        let mut prev = self.fixed(&mut f, a, b, panels);
        for _ in 0..self.max_doublings {
            panels *= 2;
            let cur = self.fixed(&mut f, a, b, panels);
            if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
                return cur;
            }
            prev = cur;
        }
        prev
    }

    pub fn integrate_c(
        &self,
        mut f: impl FnMut(f64) -> Complex64,
        a: f64,
        b: f64,
        tol: f64,
    ) -> Complex64 {
        let mut panels = 1usize;
        let mut prev = self.fixed(&mut f, a, b, panels);
        for _ in 0..self.max_doublings {
            panels *= 2;
            let cur = self.fixed(&mut f, a, b, panels);
            if (cur - prev).norm() <= tol * cur.norm().max(1.0) {
                return cur;
            }
            prev = cur;
        }
        prev
    }

    /// Tensorized rule over a box in R^n (n small), fixed panel count per axis.
    pub fn fixed_box(
        &self,
        f: &mut impl FnMut(&[f64]) -> Complex64,
        lo: &[f64],
        hi: &[f64],
        panels: usize,
    ) -> Complex64 {
        let n = lo.len();
        let mut pts: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n);
        for j in 0..n {
            let h = (hi[j] - lo[j]) / panels as f64;
            let mut axis = Vec::with_capacity(panels * self.rule.len());
            for p in 0..panels {
                let mid = lo[j] + h * (p as f64 + 0.5);
                for &(x, w) in &self.rule {
                    axis.push((mid + 0.5 * h * x, 0.5 * h * w));
                }
            }
            pts.push(axis);
        }
        let mut idx = alloc::vec![0usize; n];
        let mut theta = alloc::vec![0.0; n];
        let mut s = Complex64::new(0.0, 0.0);
        let len = pts[0].len();
        'outer: loop {
            let mut w = 1.0;
            for j in 0..n {
                theta[j] = pts[j][idx[j]].0;
                w *= pts[j][idx[j]].1;
            }
            s += f(&theta) * w;
            for i in idx.iter_mut() {
                *i += 1;
                if *i < len {
                    continue 'outer;
                }
                *i = 0;
            }
            break;
        }
        s
    }

    pub fn integrate_box(
        &self,
        mut f: impl FnMut(&[f64]) -> Complex64,
        lo: &[f64],
        hi: &[f64],
        tol: f64,
    ) -> Complex64 {
        let mut panels = 1usize;
        let mut prev = self.fixed_box(&mut f, lo, hi, panels);
        for _ in 0..self.max_doublings.min(6) {
            panels *= 2;
            let cur = self.fixed_box(&mut f, lo, hi, panels);
            if (cur - prev).norm() <= tol * cur.norm().max(1.0) {
                return cur;
            }
            prev = cur;
        }
        prev
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let s: f64 = gauss_legendre(20).iter().map(|p| p.1).sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_smooth_functions() {
        let q = Quadrature::default();
        let v = q.integrate(|x| x.exp(), 0.0, 1.0, 1e-14);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
        let v = q.integrate(|x| 1.0 / x.ln(), 2.0, 10.0, 1e-13);
        assert!((v - 5.120435724669805).abs() < 1e-10);
        let c = q.integrate_c(|x| Complex64::new(0.0, x).exp(), 0.0, PI, 1e-14);
        assert!((c - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }
}
