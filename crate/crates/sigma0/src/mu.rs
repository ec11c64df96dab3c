//! The limiting holonomy measure mu = prod sin^2(t_j/2) dt_j / pi on
//! [-pi, pi]^n, the functions H_m and F_m, and the coefficient functional
//! a_f(m) with its cost C(f).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;
use crate::quad::Quadrature;
use crate::{Error, Result};

/// Reduce an angle into [-pi, pi].
pub fn reduce_angle(t: f64) -> f64 {
    let tau = 2.0 * PI;
    let x = t + PI;
    let r = x - tau * (x / tau).floor() - PI;
    if r == -PI && t > 0.0 { PI } else { r }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleVector(Vec<f64>);

impl AngleVector {
    pub fn new(theta: &[f64]) -> Self {
        AngleVector(theta.iter().map(|&t| if (-PI..=PI).contains(&t) { t } else { reduce_angle(t) }).collect())
    }

    pub fn theta(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightIndex(Vec<i64>);

impl WeightIndex {
    pub fn new(m: &[i64]) -> Result<Self> {
        if m.is_empty() || m.contains(&0) {
            return Err(Error::pre("weight index entries must be nonzero"));
        }
        Ok(WeightIndex(m.to_vec()))
    }

    pub fn m(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&v| v > 0)
    }

    /// `|m|* = prod (2|m_j| - 1)`.
    pub fn m_star(&self) -> u64 {
        self.0.iter().map(|&v| 2 * v.unsigned_abs() - 1).product()
    }

    /// Componentwise product with a sign vector.
    pub fn signed(&self, s: &[i8]) -> WeightIndex {
        WeightIndex(self.0.iter().zip(s).map(|(&v, &e)| v * e as i64).collect())
    }
}

pub fn m_star(m: &WeightIndex) -> u64 {
    m.m_star()
}

/// Finite Fourier sum `sum_k c_k e^{i k.theta}` on (R / 2 pi Z)^n.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigFunction {
    n: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl TrigFunction {
    pub fn zero(n: usize) -> Self {
        TrigFunction { n, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut f = Self::zero(n);
        f.add_term(vec![0; n], Complex64::new(c, 0.0));
        f
    }

    pub fn from_coeffs(n: usize, coeffs: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Result<Self> {
        let mut f = Self::zero(n);
        for (k, c) in coeffs {
            if k.len() != n {
                return Err(Error::pre(format!("frequency {k:?} has wrong dimension")));
            }
            f.add_term(k, c);
        }
        Ok(f)
    }

    pub fn add_term(&mut self, k: Vec<i64>, c: Complex64) {
        let e = self.coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
    }

    /// F_m written as a product of Dirichlet kernels sum_{|k| < m_j} e^{i k t}.
    pub fn fm(m: &WeightIndex) -> Result<Self> {
        if !m.is_positive() {
            return Err(Error::pre("F_m needs positive weights"));
        }
        let mut f = TrigFunction::constant(0, 1.0);
        for &mj in m.m() {
            let mut d = TrigFunction::zero(1);
            for k in -(mj - 1)..=(mj - 1) {
                d.add_term(vec![k], Complex64::new(1.0, 0.0));
            }
            f = f.tensor(&d);
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<Vec<i64>, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> i64 {
        self.coeffs.keys().flat_map(|k| k.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    pub fn eval(&self, theta: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let ph: f64 = k.iter().zip(theta).map(|(&a, &t)| a as f64 * t).sum();
                c * Complex64::new(ph.cos(), ph.sin())
            })
            .sum()
    }

    /// `sum |c_k|`, an upper bound for the sup norm.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Product in separate variables: (f tensor g)(s, t) = f(s) g(t).
    pub fn tensor(&self, g: &TrigFunction) -> TrigFunction {
        let mut out = TrigFunction::zero(self.n + g.n);
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &g.coeffs {
                let mut k = k1.clone();
                k.extend_from_slice(k2);
                out.add_term(k, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> TrigFunction {
        TrigFunction { n: self.n, coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), c * s)).collect() }
    }

    pub fn add(&self, g: &TrigFunction) -> TrigFunction {
        let mut out = self.clone();
        for (k, c) in &g.coeffs {
            out.add_term(k.clone(), *c);
        }
        out
    }

    /// Real-valuedness: c_{-k} = conj(c_k) to within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(k, c)| {
            let nk: Vec<i64> = k.iter().map(|v| -v).collect();
            (self.coeff(&nk) - c.conj()).norm() <= tol
        })
    }

    /// Invariance under flipping the sign of every coordinate subset.
    pub fn is_sign_invariant(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(k, c)| {
            (0..1u32 << self.n).all(|bits| {
                let fk: Vec<i64> =
                    k.iter().enumerate().map(|(j, &v)| if bits >> j & 1 == 1 { -v } else { v }).collect();
                (self.coeff(&fk) - c).norm() <= tol
            })
        })
    }
}

/// Closed-form mu of a rectangle given as (lo, hi) per coordinate.
pub fn mu_rect(rect: &[(f64, f64)]) -> Result<f64> {
    let g = |t: f64| (t - t.sin()) / (2.0 * PI);
    let mut v = 1.0;
    for &(lo, hi) in rect {
        if !(-PI..=PI).contains(&lo) || !(-PI..=PI).contains(&hi) || lo > hi {
            return Err(Error::pre(format!("interval [{lo}, {hi}] not inside [-pi, pi]")));
        }
        v *= g(hi) - g(lo);
    }
    Ok(v)
}

/// Exact mu of a trigonometric polynomial: mu(e^{ikt}) = 1, -1/2 at |k| = 0, 1.
pub fn mu_trig(f: &TrigFunction) -> Complex64 {
    f.coeffs
        .iter()
        .map(|(k, c)| {
            let w: f64 = k
                .iter()
                .map(|&v| match v.abs() {
                    0 => 1.0,
                    1 => -0.5,
                    _ => 0.0,
                })
                .product();
            c * w
        })
        .sum()
}

/// Density of mu with respect to Lebesgue measure.
pub fn mu_density(theta: &[f64]) -> f64 {
    theta.iter().map(|&t| (t / 2.0).sin().powi(2) / PI).product()
}

/// H_m(theta) = prod e^{i m_j t_j} / (1 - e^{i sgn(m_j) t_j}).
pub fn eval_hm(m: &WeightIndex, theta: &AngleVector) -> Result<Complex64> {
    if m.dim() != theta.dim() {
        return Err(Error::pre("dimension mismatch"));
    }
    let mut v = Complex64::new(1.0, 0.0);
    for (&mj, &t) in m.m().iter().zip(theta.theta()) {
        if t == 0.0 {
            return Err(Error::pre("H_m has a pole at theta_j = 0"));
        }
        // 1 - e^{ix} = -2i sin(x/2) e^{ix/2} keeps full relative accuracy near the pole
        let s = mj.signum() as f64;
        let phase = Complex64::new(0.0, (mj as f64 - s / 2.0) * t).exp();
        v *= Complex64::new(0.0, 1.0) * phase / (2.0 * (s * t / 2.0).sin());
    }
    Ok(v)
}

/// F_m(theta) = prod sin((m_j - 1/2) t_j) / sin(t_j / 2) for positive m.
pub fn eval_fm(m: &WeightIndex, theta: &AngleVector) -> Result<f64> {
    if !m.is_positive() {
        return Err(Error::pre("F_m needs positive weights"));
    }
    if m.dim() != theta.dim() {
        return Err(Error::pre("dimension mismatch"));
    }
    Ok(m.m().iter().zip(theta.theta()).map(|(&mj, &t)| fm_1d(mj, t)).product())
}

pub(crate) fn fm_1d(mj: i64, t: f64) -> f64 {
    let a = mj as f64 - 0.5;
    if t.abs() < 1e-6 {
        // sin(a t)/sin(t/2) = 2a (1 - (a^2 - 1/4) t^2 / 6 + O(t^4))
        2.0 * a * (1.0 - (a * a - 0.25) * t * t / 6.0)
    } else {
        (a * t).sin() / (t / 2.0).sin()
    }
}

/// a_f(m) = integral of f * conj(H_m) d mu, exactly from Fourier data:
/// 2^-n sum over S of (-1)^|S| c_{m - sum_{j in S} sgn(m_j) e_j}.
pub fn coeff_af(f: &TrigFunction, m: &WeightIndex) -> Complex64 {
    let n = m.dim();
    let mut s = Complex64::new(0.0, 0.0);
    let mut k = vec![0i64; n];
    for bits in 0..1u32 << n {
        let mut sign = 1.0;
        for (j, (kj, &mj)) in k.iter_mut().zip(m.m()).enumerate() {
            *kj = mj;
            if bits >> j & 1 == 1 {
                *kj -= mj.signum();
                sign = -sign;
            }
        }
        s += f.coeff(&k) * sign;
    }
    s / (1u64 << n) as f64
}

/// a_f(m) for an arbitrary function by tensor quadrature.
pub fn coeff_af_quad(
    f: impl Fn(&[f64]) -> Complex64,
    m: &WeightIndex,
    tol: f64,
) -> Complex64 {
    let n = m.dim();
    mu_integral(
        |t| {
            let h = eval_hm(m, &AngleVector::new(t)).unwrap_or(Complex64::new(0.0, 0.0));
            f(t) * h.conj()
        },
        n,
        tol,
    )
}

/// Integral against mu by tensor Gauss-Legendre; node sets never touch 0,
/// so removable singularities there are harmless.
pub fn mu_integral(f: impl Fn(&[f64]) -> Complex64, n: usize, tol: f64) -> Complex64 {
    let q = Quadrature::default();
    let lo = vec![-PI; n];
    let hi = vec![PI; n];
    q.integrate_box(|t| f(t) * mu_density(t), &lo, &hi, tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    /// sum over 1 <= |m_j| <= M
    pub partial: f64,
    /// exact remainder beyond M (finite for trigonometric polynomials)
    pub tail: f64,
    pub truncation: i64,
}

impl CostReport {
    pub fn total(&self) -> f64 {
        self.partial + self.tail
    }
}

/// C(f) = sum_m |m|* |a_f(m)|, split at the truncation radius.
pub fn cost_cf(f: &TrigFunction, truncation: i64) -> Result<CostReport> {
    if truncation < 1 {
        return Err(Error::pre("truncation must be >= 1"));
    }
    let n = f.dim();
    // a_f(m) vanishes once some |m_j| exceeds degree + 1
    let r = (f.degree() + 1).max(truncation);
    let mut partial = 0.0;
    let mut tail = 0.0;
    let mut m = vec![-r; n];
    loop {
        if m.iter().all(|&v| v != 0) {
            let w = WeightIndex(m.clone());
            let a = coeff_af(f, &w).norm();
            if a != 0.0 {
                let c = w.m_star() as f64 * a;
                if m.iter().all(|v| v.abs() <= truncation) {
                    partial += c;
                } else {
                    tail += c;
                }
            }
        }
        let mut j = 0;
        loop {
            if j == n {
                return Ok(CostReport { partial, tail, truncation });
            }
            m[j] += 1;
            if m[j] <= r {
                break;
            }
            m[j] = -r;
            j += 1;
        }
    }
}

/// All sign vectors in {±1}^n.
pub fn sign_vectors(n: usize) -> Vec<Vec<i8>> {
    (0..1u32 << n)
        .map(|bits| (0..n).map(|j| if bits >> j & 1 == 1 { -1 } else { 1 }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(m: &[i64]) -> WeightIndex {
        WeightIndex::new(m).unwrap()
    }

    #[test]
    fn hm_matches_quotient_form() {
        for m in [-3i64, -1, 1, 2, 4] {
            for t in [-2.9, -1.0, -0.2, 0.05, 0.7, 3.1] {
                let one = Complex64::new(1.0, 0.0);
                let q = Complex64::new(0.0, m as f64 * t).exp() / (one - Complex64::new(0.0, m.signum() as f64 * t).exp());
                let h = eval_hm(&w(&[m]), &AngleVector::new(&[t])).unwrap();
                assert!((h - q).norm() <= 1e-12 * q.norm(), "m = {m}, t = {t}");
            }
        }
    }

    #[test]
    fn rectangles() {
        assert!((mu_rect(&[(-PI, PI)]).unwrap() - 1.0).abs() < 1e-15);
        assert!((mu_rect(&[(-PI, PI), (-PI, PI)]).unwrap() - 1.0).abs() < 1e-15);
        let v = mu_rect(&[(-PI / 2.0, PI / 2.0)]).unwrap();
        assert!((v - (0.5 - 1.0 / PI)).abs() < 1e-15);
        assert!((mu_rect(&[(0.0, PI)]).unwrap() - 0.5).abs() < 1e-15);
        assert!(mu_rect(&[(-4.0, 0.0)]).is_err());
    }

    #[test]
    fn hm_values() {
        let pi = AngleVector::new(&[PI]);
        assert!((eval_hm(&w(&[1]), &pi).unwrap() - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((eval_hm(&w(&[-1]), &pi).unwrap() - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        let v = eval_hm(&w(&[2]), &AngleVector::new(&[PI / 2.0])).unwrap();
        let want = Complex64::new(-1.0, 0.0) / Complex64::new(1.0, -1.0);
        assert!((v - want).norm() < 1e-15);
        assert!(eval_hm(&w(&[1]), &AngleVector::new(&[0.0])).is_err());
    }

    #[test]
    fn fm_values() {
        let t = AngleVector::new(&[0.7, -2.1]);
        assert!((eval_fm(&w(&[1, 1]), &t).unwrap() - 1.0).abs() < 1e-15);
        assert!((eval_fm(&w(&[2]), &AngleVector::new(&[1e-9])).unwrap() - 3.0).abs() < 1e-12);
        assert!((eval_fm(&w(&[2]), &AngleVector::new(&[PI])).unwrap() + 1.0).abs() < 1e-15);
        assert!(eval_fm(&w(&[-2]), &AngleVector::new(&[1.0])).is_err());
    }

    #[test]
    fn m_star_values() {
        assert_eq!(w(&[1]).m_star(), 1);
        assert_eq!(w(&[3]).m_star(), 5);
        assert_eq!(w(&[2, -2]).m_star(), 9);
    }

    #[test]
    fn mu_of_hm_is_signed_half_power() {
        for m in [[1i64], [-1], [2], [-3]] {
            let wm = w(&m);
            let v = mu_integral(|t| eval_hm(&wm, &AngleVector::new(t)).unwrap(), 1, 1e-12);
            let want = if m[0].abs() == 1 { -0.5 } else { 0.0 };
            assert!((v - Complex64::new(want, 0.0)).norm() < 1e-8, "m={m:?} v={v}");
        }
        let wm = w(&[1, -1]);
        let v = mu_integral(|t| eval_hm(&wm, &AngleVector::new(t)).unwrap(), 2, 1e-12);
        assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn af_of_constant_and_zero() {
        let one = TrigFunction::constant(1, 1.0);
        // conj(mu(H_m)) = -1/2 for m = ±1
        assert!((coeff_af(&one, &w(&[1])) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((coeff_af(&one, &w(&[-1])) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert_eq!(coeff_af(&one, &w(&[2])).norm(), 0.0);
        let c = cost_cf(&one, 5).unwrap();
        assert!((c.total() - 1.0).abs() < 1e-15);
        assert_eq!(cost_cf(&TrigFunction::zero(1), 3).unwrap().total(), 0.0);
        // quadrature cross-check of the constant's expansion
        let q = coeff_af_quad(|_| Complex64::new(1.0, 0.0), &w(&[1]), 1e-12);
        assert!((q - Complex64::new(-0.5, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn af_exact_matches_quadrature() {
        let f = TrigFunction::from_coeffs(
            1,
            [
                (vec![0], Complex64::new(0.3, 0.0)),
                (vec![2], Complex64::new(0.1, -0.4)),
                (vec![-3], Complex64::new(-0.7, 0.2)),
            ],
        )
        .unwrap();
        for m in [-4i64, -3, -2, -1, 1, 2, 3, 4] {
            let wm = w(&[m]);
            let exact = coeff_af(&f, &wm);
            let q = coeff_af_quad(|t| f.eval(t), &wm, 1e-13);
            assert!((exact - q).norm() < 1e-10, "m={m}");
        }
    }

    #[test]
    fn hm_gram_matrix_is_half_identity() {
        // integral of H_m conj(H_m') d mu = 2^-n delta
        for m in -4i64..=4 {
            for mp in -4i64..=4 {
                if m == 0 || mp == 0 {
                    continue;
                }
                let (a, b) = (w(&[m]), w(&[mp]));
                let v = mu_integral(
                    |t| {
                        let t = AngleVector::new(t);
                        eval_hm(&a, &t).unwrap() * eval_hm(&b, &t).unwrap().conj()
                    },
                    1,
                    1e-13,
                );
                let want = if m == mp { 0.5 } else { 0.0 };
                assert!((v - Complex64::new(want, 0.0)).norm() < 1e-8, "{m} {mp} {v}");
            }
        }
    }

    #[test]
    fn fm_trig_form_matches_closed_form() {
        for m in 1..5 {
            let f = TrigFunction::fm(&w(&[m])).unwrap();
            for t in [-3.0, -1.2, 0.4, 2.9] {
                let v = eval_fm(&w(&[m]), &AngleVector::new(&[t])).unwrap();
                assert!((f.eval(&[t]).re - v).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn fm_is_signed_sum_of_hm(m1 in 1i64..6, m2 in 1i64..6, t1 in -3.1f64..3.1, t2 in -3.1f64..3.1, two in any::<bool>()) {
            prop_assume!(t1.abs() > 1e-3 && t2.abs() > 1e-3);
            let (m, t): (Vec<i64>, Vec<f64>) = if two { (vec![m1, m2], vec![t1, t2]) } else { (vec![m1], vec![t1]) };
            let wm = w(&m);
            let th = AngleVector::new(&t);
            let n = m.len();
            let s: Complex64 = sign_vectors(n).iter().map(|s| eval_hm(&wm.signed(s), &th).unwrap()).sum();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let f = eval_fm(&wm, &th).unwrap();
            prop_assert!((s * sign - Complex64::new(f, 0.0)).norm() < 1e-12);
            prop_assert!(f.abs() <= wm.m_star() as f64 + 1e-12);
        }

        #[test]
        fn rect_additivity(a in -3.1f64..3.1, b in -3.1f64..3.1, c in -3.1f64..3.1) {
            let mut v = [a, b, c];
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let whole = mu_rect(&[(v[0], v[2])]).unwrap();
            let parts = mu_rect(&[(v[0], v[1])]).unwrap() + mu_rect(&[(v[1], v[2])]).unwrap();
            prop_assert!((whole - parts).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&whole));
        }

        #[test]
        fn mu_trig_matches_quadrature(c0 in -1.0f64..1.0, c1 in -1.0f64..1.0, c2 in -1.0f64..1.0) {
            let f = TrigFunction::from_coeffs(1, [
                (vec![0], Complex64::new(c0, 0.0)),
                (vec![1], Complex64::new(c1, 0.0)),
                (vec![-1], Complex64::new(c1, 0.0)),
                (vec![2], Complex64::new(c2, 0.0)),
            ]).unwrap();
            let q = mu_integral(|t| f.eval(t), 1, 1e-13);
            prop_assert!((q - mu_trig(&f)).norm() < 1e-10);
        }
    }
}
