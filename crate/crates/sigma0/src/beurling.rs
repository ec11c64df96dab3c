//! Trigonometric majorants and minorants of interval indicators on the circle
//! (Vaaler's finite construction), and their products over rectangles.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;
use crate::mu::{cost_cf, mu_rect, mu_trig, CostReport, TrigFunction};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Majorant,
    Minorant,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Majorant => 1.0,
            Side::Minorant => -1.0,
        }
    }
}

/// Degree-N polynomial `sum_{|k| <= N} c_k e^{i k t}` approximating the
/// indicator of `interval` from one side.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    pub degree: usize,
    /// c_{-N}, ..., c_N
    pub coeffs: Vec<Complex64>,
    pub interval: (f64, f64),
    pub side: Side,
}

/// Vaaler's weight J(u) = pi u (1 - u) cot(pi u) + u on (0, 1).
fn vaaler_j(u: f64) -> f64 {
    PI * u * (1.0 - u) / (PI * u).tan() + u
}

fn e(x: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * x).exp()
}

impl TrigPolynomial {
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.degree as i64;
        if k.abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.degree as i64;
        let mut s = self.coeff(0).re;
        for k in 1..=n {
            // real-valued: c_{-k} = conj(c_k)
            s += 2.0 * (self.coeff(k) * Complex64::new(0.0, k as f64 * t).exp()).re;
        }
        s
    }

    /// Integral over [-pi, pi].
    pub fn integral(&self) -> f64 {
        2.0 * PI * self.coeff(0).re
    }

    pub fn to_trig(&self) -> TrigFunction {
        let n = self.degree as i64;
        TrigFunction::from_coeffs(1, (-n..=n).map(|k| (vec![k], self.coeff(k))))
            .expect("one-dimensional frequencies")
    }

    pub fn indicator(&self, t: f64) -> f64 {
        if self.interval.0 <= t && t <= self.interval.1 { 1.0 } else { 0.0 }
    }
}

/// Majorant or minorant of the indicator of [lo, hi] subset [-pi, pi].
pub fn build_sb(interval: (f64, f64), degree: usize, side: Side) -> Result<TrigPolynomial> {
    let (lo, hi) = interval;
    if degree < 1 {
        return Err(Error::pre("degree must be >= 1"));
    }
    if !(lo < hi) || lo < -PI || hi > PI {
        return Err(Error::pre("interval must be nonempty and inside [-pi, pi]"));
    }
    let (alpha, beta) = (lo / (2.0 * PI), hi / (2.0 * PI));
    let n1 = (degree + 1) as f64;
    let s = side.sign();
    let nd = degree as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * degree + 1];
    coeffs[degree] = Complex64::new(beta - alpha + s / n1, 0.0);
    for k in 1..=nd {
        let kf = k as f64;
        let (ea, eb) = (e(-kf * alpha), e(-kf * beta));
        // sawtooth part from V(alpha - x) + V(x - beta)
        let g = -vaaler_j(kf / n1) / (PI * kf);
        let saw = g * (eb - ea) / Complex64::new(0.0, 2.0);
        // Fejer correction at both endpoints
        let fej = (1.0 - kf / n1) / (2.0 * n1) * (ea + eb) * s;
        let c = saw + fej;
        coeffs[(nd + k) as usize] = c;
        coeffs[(nd - k) as usize] = c.conj();
    }
    Ok(TrigPolynomial { degree, coeffs, interval, side })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichCheck {
    /// min over grid of (S - 1_J) for majorants, (1_J - S) for minorants
    pub min_slack: f64,
    pub sup: f64,
    pub points: usize,
}

/// Evaluate the one-sided inequality on an equispaced grid including both
/// endpoints of [-pi, pi] and of the interval.
pub fn check_sandwich(p: &TrigPolynomial, points: usize) -> SandwichCheck {
    let mut grid: Vec<f64> =
        (0..points).map(|i| -PI + 2.0 * PI * i as f64 / (points - 1) as f64).collect();
    grid.push(p.interval.0);
    grid.push(p.interval.1);
    let mut min_slack = f64::INFINITY;
    let mut sup: f64 = 0.0;
    for &t in &grid {
        let v = p.eval(t);
        let ind = p.indicator(t);
        let slack = match p.side {
            Side::Majorant => v - ind,
            Side::Minorant => ind - v,
        };
        min_slack = min_slack.min(slack);
        sup = sup.max(v.abs());
    }
    SandwichCheck { min_slack, sup, points: grid.len() }
}

/// Largest violation of |c_k| <= 1/(N+1) + 1/|k| (<= 0 means satisfied).
pub fn coefficient_excess(p: &TrigPolynomial) -> f64 {
    let n1 = (p.degree + 1) as f64;
    (1..=p.degree as i64)
        .flat_map(|k| [k, -k])
        .map(|k| p.coeff(k).norm() - (1.0 / n1 + 1.0 / k.abs() as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RectMeta {
    pub degree: usize,
    pub side: Side,
    pub cost: CostReport,
    /// mu(f_N)
    pub mu_poly: f64,
    /// mu(1_A)
    pub mu_rect: f64,
    /// |mu(f_N) - mu(1_A)|
    pub deviation: f64,
    /// n / (N + 1)
    pub stated_bound: f64,
    /// 2n / (N + 1), implied by the integral defect and sup |density| <= 2/(2 pi)
    pub provable_bound: f64,
}

/// Product majorant (or the standard minorant combination) of a rectangle.
pub fn rect_majorant(rect: &[(f64, f64)], degree: usize, side: Side) -> Result<(TrigFunction, RectMeta)> {
    if rect.is_empty() {
        return Err(Error::pre("empty rectangle"));
    }
    let ups: Vec<TrigFunction> = rect
        .iter()
        .map(|&j| build_sb(j, degree, Side::Majorant).map(|p| p.to_trig()))
        .collect::<Result<_>>()?;
    let n = rect.len();
    let prod = |skip: Option<(usize, &TrigFunction)>| {
        let mut f = TrigFunction::constant(0, 1.0);
        for (j, u) in ups.iter().enumerate() {
            let g = match skip {
                Some((s, low)) if s == j => low,
                _ => u,
            };
            f = f.tensor(g);
        }
        f
    };
    let f = match side {
        Side::Majorant => prod(None),
        Side::Minorant => {
            // sum_j S-_j prod_{i != j} S+_i - (n - 1) prod S+_i
            let mut acc = prod(None).scale(-((n - 1) as f64));
            for (j, &iv) in rect.iter().enumerate() {
                let low = build_sb(iv, degree, Side::Minorant)?.to_trig();
                acc = acc.add(&prod(Some((j, &low))));
            }
            acc
        }
    };
    let cost = cost_cf(&f, degree as i64 + 1)?;
    let mu_poly = mu_trig(&f).re;
    let mr = mu_rect(rect)?;
    let nb = (degree + 1) as f64;
    let meta = RectMeta {
        degree,
        side,
        cost,
        mu_poly,
        mu_rect: mr,
        deviation: (mu_poly - mr).abs(),
        stated_bound: n as f64 / nb,
        provable_bound: 2.0 * n as f64 / nb,
    };
    Ok((f, meta))
}
