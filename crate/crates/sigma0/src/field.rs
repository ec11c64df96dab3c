//! Exact arithmetic in a real quadratic field K = Q(sqrt m) and its ring of
//! integers, rigorous embeddings, unit signs and element-level factorization.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

#[allow(unused_imports)]
use num_traits::Float;
use crate::intmat::{self, ck, factorize, hnf, isqrt};
use crate::lattice::Lattice;
use crate::{Error, Result};

/// Element `(a + b*w) / den` of K, with `den > 0` and `gcd(a, b, den) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    pub a: i128,
    pub b: i128,
    pub den: i128,
}

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement { a: 0, b: 0, den: 1 };
    pub const ONE: FieldElement = FieldElement { a: 1, b: 0, den: 1 };

    pub fn int(a: i128, b: i128) -> Self {
        FieldElement { a, b, den: 1 }
    }

    pub fn rational(n: i128, d: i128) -> Result<Self> {
        Self::new(n, 0, d)
    }

    pub fn new(a: i128, b: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::pre("zero denominator"));
        }
        let g = a.gcd(&b).gcd(&den);
        let s = den.signum();
        Ok(FieldElement { a: s * a / g, b: s * b / g, den: s * den / g })
    }

    fn norm_rep(a: i128, b: i128, den: i128) -> Self {
        Self::new(a, b, den).expect("nonzero denominator")
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    pub fn is_rational(&self) -> bool {
        self.b == 0
    }

    /// Canonical text form `a+b*w` (components may be fractions `n/d`).
    pub fn to_text(&self) -> String {
        let comp = |n: i128| {
            let g = n.gcd(&self.den).max(1);
            let (n, d) = (n / g, self.den / g);
            if d == 1 {
                format!("{}", n.abs())
            } else {
                format!("{}/{}", n.abs(), d)
            }
        };
        let a = if self.a < 0 { format!("-{}", comp(self.a)) } else { comp(self.a) };
        let sep = if self.b < 0 { '-' } else { '+' };
        format!("{a}{sep}{}*w", comp(self.b))
    }

    /// Parse `a+b*w`, `a-b*w`, `a`, `b*w`, `w`, with optional `n/d` parts.
    pub fn parse(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::pre("empty element"));
        }
        let bad = || Error::pre(format!("cannot parse field element {s:?}"));
        // split into signed terms
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (i, c) in s.chars().enumerate() {
            if (c == '+' || c == '-') && i > 0 {
                terms.push(core::mem::take(&mut cur));
            }
            cur.push(c);
        }
        terms.push(cur);
        let frac = |t: &str| -> Result<(i128, i128)> {
            let (n, d) = match t.split_once('/') {
                Some((n, d)) => (n, d),
                None => (t, "1"),
            };
            let n: i128 = n.parse().map_err(|_| bad())?;
            let d: i128 = d.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok((n, d))
        };
        let mut acc = FieldElement::ZERO;
        for t in terms {
            let (neg, body) = match t.strip_prefix('-') {
                Some(r) => (true, r),
                None => (false, t.strip_prefix('+').unwrap_or(&t)),
            };
            let (is_w, coef) = if body == "w" {
                (true, "1")
            } else if let Some(c) = body.strip_suffix("*w") {
                (true, c)
            } else {
                (false, body)
            };
            let (mut n, d) = frac(coef)?;
            if neg {
                n = -n;
            }
            let term = if is_w {
                FieldElement::new(0, n, d)?
            } else {
                FieldElement::new(n, 0, d)?
            };
            acc = acc + term;
        }
        Ok(acc)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn oflow<T>(v: Option<T>) -> T {
    v.expect("exact arithmetic overflow")
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, o: FieldElement) -> FieldElement {
        let l = self.den.lcm(&o.den);
        let (s1, s2) = (l / self.den, l / o.den);
        let a = oflow(self.a.checked_mul(s1).and_then(|x| x.checked_add(o.a.checked_mul(s2)?)));
        let b = oflow(self.b.checked_mul(s1).and_then(|x| x.checked_add(o.b.checked_mul(s2)?)));
        FieldElement::norm_rep(a, b, l)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { a: -self.a, b: -self.b, den: self.den }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, o: FieldElement) -> FieldElement {
        self + (-o)
    }
}

/// Sign of `x + y*sqrt(m)` for integers x, y and squarefree m > 1.
pub fn sign_surd(x: &BigInt, y: &BigInt, m: i128) -> i8 {
    let sx = x.sign();
    let sy = y.sign();
    let to_i = |s: Sign| match s {
        Sign::Minus => -1i8,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    };
    let (ix, iy) = (to_i(sx), to_i(sy));
    if iy == 0 {
        return ix;
    }
    if ix == 0 || ix == iy {
        return iy;
    }
    // opposite signs: compare x^2 with y^2 m
    let lhs = x * x;
    let rhs = y * y * BigInt::from(m);
    match lhs.cmp(&rhs) {
        Ordering::Greater => ix,
        Ordering::Less => iy,
        Ordering::Equal => 0,
    }
}

fn sign_surd_i(x: i128, y: i128, m: i128) -> i8 {
    if y == 0 {
        return x.signum() as i8;
    }
    if x == 0 || x.signum() == y.signum() {
        return y.signum() as i8;
    }
    match (x.checked_mul(x), y.checked_mul(y).and_then(|v| v.checked_mul(m))) {
        (Some(l), Some(r)) => match l.cmp(&r) {
            Ordering::Greater => x.signum() as i8,
            Ordering::Less => y.signum() as i8,
            Ordering::Equal => 0,
        },
        _ => sign_surd(&BigInt::from(x), &BigInt::from(y), m),
    }
}

/// Decompose a finite f64 into `mant * 2^exp` exactly.
pub fn dyadic(v: f64) -> (BigInt, i32) {
    if v == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = v.to_bits();
    let neg = bits >> 63 == 1;
    let e = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if e == 0 { (frac, -1074) } else { (frac | (1u64 << 52), e - 1075) };
    let m = BigInt::from(mant);
    (if neg { -m } else { m }, exp)
}

/// Closed rational interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    pub fn exact(v: BigRational) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN)
    }

    pub fn mul(&self, o: &Enclosure) -> Enclosure {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Enclosure { lo, hi }
    }
}

/// HNF basis `[[a, b], [0, c]]` (rows are coordinates of `x + y*w`) of a
/// nonzero integral ideal of O_K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdealK {
    pub h: [[i128; 2]; 2],
}

impl IdealK {
    pub const UNIT: IdealK = IdealK { h: [[1, 0], [0, 1]] };

    pub fn norm(&self) -> i128 {
        self.h[0][0] * self.h[1][1]
    }

    fn from_rows(rows: &[Vec<i128>]) -> IdealK {
        IdealK { h: [[rows[0][0], rows[0][1]], [rows[1][0], rows[1][1]]] }
    }

    fn rows(&self) -> Vec<Vec<i128>> {
        self.h.iter().map(|r| r.to_vec()).collect()
    }

    /// Z-basis as field elements.
    pub fn basis(&self) -> [FieldElement; 2] {
        [FieldElement::int(self.h[0][0], self.h[0][1]), FieldElement::int(0, self.h[1][1])]
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        x.is_integral()
            && intmat::reduce_mod_hnf(&self.rows(), &[x.a, x.b])
                .map(|r| r.iter().all(|&v| v == 0))
                .unwrap_or(false)
    }
}

impl fmt::Display for IdealK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.h[0][0], self.h[0][1], self.h[1][0], self.h[1][1])
    }
}

/// Decomposition `(D) = d f^2` with generators (h_K = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub d: IdealK,
    pub f: IdealK,
    /// generator of d, equal to `D / f_gen^2`
    pub d_gen: FieldElement,
    pub f_gen: FieldElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignReport {
    pub sign_images: Vec<(i8, i8)>,
    pub narrow_equals_class: bool,
    /// Sign-change vectors in {±1}^n (n = degree - 1) under which holonomy
    /// statistics are guaranteed invariant; always contains the identity.
    pub guaranteed_sign_changes: Vec<Vec<i8>>,
}

/// Real quadratic field Q(sqrt m) with w^2 = p*w + q.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseField {
    pub m: i128,
    pub degree: u32,
    pub p: i128,
    pub q: i128,
    pub disc: i128,
    pub h_k: u32,
    pub eps_k: FieldElement,
    pub eps_norm: i8,
    sqrt_m: f64,
}

/// Largest coordinate bound handled by the continued-fraction unit search.
const CF_MAX_STEPS: usize = 10_000;

impl BaseField {
    pub fn new(m: i128) -> Result<Self> {
        if m <= 1 {
            return Err(Error::pre(format!("m must be > 1, got {m}")));
        }
        if !intmat::is_squarefree(m) {
            return Err(Error::pre(format!("m = {m} is not squarefree")));
        }
        let (p, q, disc) = if m % 4 == 1 { (1, (m - 1) / 4, m) } else { (0, m, 4 * m) };
        let mut f = BaseField {
            m,
            degree: 2,
            p,
            q,
            disc,
            h_k: 0,
            eps_k: FieldElement::ONE,
            eps_norm: 1,
            sqrt_m: (m as f64).sqrt(),
        };
        f.eps_k = f.cf_fundamental_unit()?;
        f.eps_norm = f.norm_int(&f.eps_k) as i8;
        f.h_k = f.compute_class_number()?;
        Ok(f)
    }

    pub fn omega(&self) -> FieldElement {
        FieldElement::int(0, 1)
    }

    /// Human-readable description of w.
    pub fn omega_text(&self) -> String {
        if self.p == 0 {
            format!("sqrt({})", self.m)
        } else {
            format!("(1+sqrt({}))/2", self.m)
        }
    }

    pub fn sqrt_m(&self) -> f64 {
        self.sqrt_m
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let c = |v: Option<i128>| oflow(v);
        let aa = c(x.a.checked_mul(y.a));
        let bb = c(x.b.checked_mul(y.b));
        let a = c(aa.checked_add(c(bb.checked_mul(self.q))));
        let b = c(c(c(x.a.checked_mul(y.b)).checked_add(c(x.b.checked_mul(y.a))))
            .checked_add(c(bb.checked_mul(self.p))));
        FieldElement::norm_rep(a, b, c(x.den.checked_mul(y.den)))
    }

    pub fn pow(&self, x: &FieldElement, k: i64) -> Result<FieldElement> {
        let base = if k < 0 { self.inv(x)? } else { *x };
        let mut r = FieldElement::ONE;
        for _ in 0..k.unsigned_abs() {
            r = self.mul(&r, &base);
        }
        Ok(r)
    }

    pub fn conj(&self, x: &FieldElement) -> FieldElement {
        FieldElement::norm_rep(oflow(x.a.checked_add(oflow(x.b.checked_mul(self.p)))), -x.b, x.den)
    }

    /// Norm as a reduced fraction (num, den).
    pub fn norm(&self, x: &FieldElement) -> (i128, i128) {
        let n = self.norm_num(x);
        let d = oflow(x.den.checked_mul(x.den));
        let g = n.gcd(&d).max(1);
        (n / g, d / g)
    }

    fn norm_num(&self, x: &FieldElement) -> i128 {
        let c = |v: Option<i128>| oflow(v);
        let aa = c(x.a.checked_mul(x.a));
        let ab = c(c(x.a.checked_mul(x.b)).checked_mul(self.p));
        let bb = c(c(x.b.checked_mul(x.b)).checked_mul(self.q));
        c(c(aa.checked_add(ab)).checked_sub(bb))
    }

    /// Norm of an integral element.
    pub fn norm_int(&self, x: &FieldElement) -> i128 {
        debug_assert!(x.is_integral());
        self.norm_num(x)
    }

    pub fn trace(&self, x: &FieldElement) -> (i128, i128) {
        let t = oflow(oflow(x.a.checked_mul(2)).checked_add(oflow(x.b.checked_mul(self.p))));
        let g = t.gcd(&x.den).max(1);
        (t / g, x.den / g)
    }

    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement> {
        if x.is_zero() {
            return Err(Error::pre("division by zero"));
        }
        let (n, d) = self.norm(x);
        let c = self.conj(x);
        Ok(self.mul(&c, &FieldElement::new(d, 0, n)?))
    }

    pub fn div(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    /// `x / y` if the quotient is in O_K.
    pub fn div_exact(&self, x: &FieldElement, y: &FieldElement) -> Option<FieldElement> {
        let q = self.div(x, y).ok()?;
        q.is_integral().then_some(q)
    }

    /// 2*den*iota_j(x) = A + C*sqrt(m).
    fn surd_parts(&self, x: &FieldElement, place: usize) -> (i128, i128) {
        let a = oflow(oflow(x.a.checked_mul(2)).checked_add(oflow(x.b.checked_mul(self.p))));
        let c = oflow(x.b.checked_mul(2 - self.p));
        (a, if place == 0 { c } else { -c })
    }

    /// Exact sign of iota_place(x).
    pub fn sign_at(&self, x: &FieldElement, place: usize) -> i8 {
        let (a, c) = self.surd_parts(x, place);
        sign_surd_i(a, c, self.m)
    }

    /// Exact comparison of iota_place(x) with a finite f64 threshold.
    pub fn cmp_at(&self, x: &FieldElement, place: usize, t: f64) -> Ordering {
        let (a, c) = self.surd_parts(x, place);
        let (mant, e) = dyadic(t);
        let two_den = BigInt::from(x.den) * 2;
        let (mut a, mut c) = (BigInt::from(a), BigInt::from(c));
        let mut tv = mant * two_den;
        if e >= 0 {
            tv <<= e as usize;
        } else {
            a <<= (-e) as usize;
            c <<= (-e) as usize;
        }
        match sign_surd(&(a - tv), &c, self.m) {
            1 => Ordering::Greater,
            0 => Ordering::Equal,
            _ => Ordering::Less,
        }
    }

    /// Exact comparison of |iota_place(x)| with a nonnegative threshold.
    pub fn cmp_abs_at(&self, x: &FieldElement, place: usize, t: f64) -> Ordering {
        if self.sign_at(x, place) < 0 {
            self.cmp_at(&-*x, place, t)
        } else {
            self.cmp_at(x, place, t)
        }
    }

    /// Floating-point embedding, avoiding cancellation via the norm.
    pub fn embed_f64(&self, x: &FieldElement, place: usize) -> f64 {
        let (a, c) = self.surd_parts(x, place);
        let two_den = 2.0 * x.den as f64;
        let s = self.sqrt_m;
        if a.signum() * c.signum() < 0 {
            if let Some(n) = a
                .checked_mul(a)
                .and_then(|aa| c.checked_mul(c)?.checked_mul(self.m).map(|cc| aa - cc))
            {
                return n as f64 / (a as f64 - c as f64 * s) / two_den;
            }
        }
        (a as f64 + c as f64 * s) / two_den
    }

    pub fn embed_both(&self, x: &FieldElement) -> [f64; 2] {
        [self.embed_f64(x, 0), self.embed_f64(x, 1)]
    }

    /// Rational enclosure of iota_place(x) of width at most 2^(1 - prec).
    pub fn embed(&self, x: &FieldElement, place: usize, prec: u32) -> Enclosure {
        let prec = prec.max(32);
        let (a, c) = self.surd_parts(x, place);
        let den = BigInt::from(x.den) * 2;
        if c == 0 {
            return Enclosure::exact(BigRational::new(BigInt::from(a), den));
        }
        // sqrt(m) in [s, s+1] / 2^k
        let k = prec as usize + 2 + (128 - c.unsigned_abs().leading_zeros()) as usize;
        let scaled = BigInt::from(self.m) << (2 * k);
        let s = scaled.sqrt();
        let one = BigInt::one() << k;
        let lo_s = BigRational::new(s.clone(), one.clone());
        let hi_s = BigRational::new(s + 1, one);
        let av = BigRational::from_integer(BigInt::from(a));
        let cv = BigRational::from_integer(BigInt::from(c));
        let (l, h) = if c > 0 {
            (&av + &cv * &lo_s, &av + &cv * &hi_s)
        } else {
            (&av + &cv * &hi_s, &av + &cv * &lo_s)
        };
        let d = BigRational::from_integer(den);
        Enclosure { lo: l / &d, hi: h / d }
    }

    /// log iota_0(eps_K), the regulator of K.
    pub fn regulator(&self) -> f64 {
        self.embed_f64(&self.eps_k, 0).ln()
    }

    fn cf_fundamental_unit(&self) -> Result<FieldElement> {
        let m = self.m;
        let r = isqrt(m as u128) as i128;
        // w = (P + sqrt m)/Q
        let (mut pp, mut qq) = if self.p == 0 { (0i128, 1i128) } else { (1, 2) };
        let (mut h0, mut h1) = (0i128, 1i128);
        let (mut k0, mut k1) = (1i128, 0i128);
        for _ in 0..CF_MAX_STEPS {
            let a = Integer::div_floor(&(pp + r), &qq);
            let h2 = ck(ck(a.checked_mul(h1))?.checked_add(h0))?;
            let k2 = ck(ck(a.checked_mul(k1))?.checked_add(k0))?;
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            // candidate h1 - k1*w
            let cand = FieldElement::int(h1, -k1);
            let n = self.norm_int(&cand);
            if n.abs() == 1 {
                return Ok(self.normalize_unit(&cand));
            }
            pp = ck(a.checked_mul(qq))? - pp;
            qq = (m - ck(pp.checked_mul(pp))?) / qq;
        }
        Err(Error::SearchExhausted { what: "continued fraction unit".into(), bound: CF_MAX_STEPS as u64 })
    }

    /// The unique element of {±u, ±u^-1} with iota_0 > 1.
    pub fn normalize_unit(&self, u: &FieldElement) -> FieldElement {
        let inv = self.inv(u).expect("unit is nonzero");
        for c in [*u, -*u, inv, -inv] {
            if self.cmp_at(&c, 0, 1.0) == Ordering::Greater {
                return c;
            }
        }
        *u
    }

    /// Whether `u` is a unit of O_K.
    pub fn is_unit(&self, u: &FieldElement) -> bool {
        u.is_integral() && self.norm_int(u).abs() == 1
    }

    /// Write a unit as sign * eps^k.
    pub fn unit_log(&self, u: &FieldElement) -> Result<(i8, i64)> {
        if !self.is_unit(u) {
            return Err(Error::pre(format!("{u} is not a unit")));
        }
        let sign = self.sign_at(u, 0);
        let k = (self.embed_f64(u, 0).abs().ln() / self.regulator()).round() as i64;
        for kk in [k, k - 1, k + 1] {
            let e = self.pow(&self.eps_k, kk)?;
            if e == *u {
                return Ok((1, kk));
            }
            if -e == *u {
                return Ok((-1, kk));
            }
        }
        Err(Error::Inconsistent(format!("unit {u} is not ±eps^k (sign {sign})")))
    }

    /// R(x) = iota_0(x)^2 - iota_1(x)^2 has the sign of b * Tr(x).
    fn ratio_sign(&self, x: &FieldElement) -> i8 {
        let t = self.trace(x).0;
        (x.b.signum() * t.signum()) as i8
    }

    /// Canonical representative of the associate class of `x != 0`: the
    /// unique ±eps^k * x with iota_0 > 0 and 1 <= iota_0/|iota_1| < iota_0(eps)^2.
    pub fn canonical_associate(&self, x: &FieldElement) -> FieldElement {
        let e = self.eps_k;
        let einv = self.inv(&e).expect("unit");
        let mut y = *x;
        let [a0, a1] = self.embed_both(&y);
        if a0 != 0.0 && a1 != 0.0 {
            let k = ((a0.abs() / a1.abs()).ln() / (2.0 * self.regulator())).floor() as i64;
            y = self.mul(&y, &self.pow(&e, -k).expect("unit"));
        }
        loop {
            if self.ratio_sign(&y) < 0 {
                y = self.mul(&y, &e);
                continue;
            }
            let down = self.mul(&y, &einv);
            if self.ratio_sign(&down) >= 0 {
                y = down;
                continue;
            }
            break;
        }
        if self.sign_at(&y, 0) < 0 {
            y = -y;
        }
        y
    }

    /// HNF of the principal ideal (x), x integral and nonzero.
    pub fn principal(&self, x: &FieldElement) -> IdealK {
        let xw = self.mul(x, &self.omega());
        let n = self.norm_int(x).abs();
        let h = hnf(&[vec![x.a, x.b], vec![xw.a, xw.b]], 2, Some(n)).expect("small ideal");
        IdealK::from_rows(&h)
    }

    pub fn ideal_mul(&self, i: &IdealK, j: &IdealK) -> IdealK {
        let mut gens = Vec::with_capacity(4);
        for x in i.basis() {
            for y in j.basis() {
                let z = self.mul(&x, &y);
                gens.push(vec![z.a, z.b]);
            }
        }
        let h = hnf(&gens, 2, Some(i.norm() * j.norm())).expect("small ideal");
        IdealK::from_rows(&h)
    }

    pub fn is_ideal(&self, h: &IdealK) -> bool {
        let w = self.omega();
        h.h[1][0] == 0
            && h.h[0][0] > 0
            && h.h[1][1] > 0
            && h.basis().iter().all(|x| h.contains(&self.mul(x, &w)))
    }

    fn ideal_lattice(&self, basis: &[FieldElement], s0: f64, s1: f64) -> Lattice {
        let coords = basis.iter().map(|x| vec![x.a, x.b]).collect();
        let images = basis
            .iter()
            .map(|x| vec![self.embed_f64(x, 0) / s0, self.embed_f64(x, 1) / s1])
            .collect();
        Lattice::new(coords, images)
    }

    /// Visit canonical associates of elements of the ideal with |N| <= bound
    /// (each visited at least once; duplicates possible).
    pub fn for_each_associate_class(
        &self,
        ideal: &IdealK,
        bound: i128,
        mut visit: impl FnMut(FieldElement),
    ) -> Result<()> {
        let e0 = self.embed_f64(&self.eps_k, 0);
        let r = (bound as f64).sqrt();
        let lat = self.ideal_lattice(&ideal.basis(), r * e0, r);
        lat.enumerate(2.0, 50_000_000, |v| {
            let x = FieldElement::int(v[0], v[1]);
            let n = self.norm_int(&x).abs();
            if n <= bound {
                visit(self.canonical_associate(&x));
            }
            Ok(())
        })?;
        Ok(())
    }

    /// A generator of the ideal if it is principal.
    pub fn principal_generator(&self, ideal: &IdealK) -> Result<Option<FieldElement>> {
        let n = ideal.norm();
        let mut found = None;
        self.for_each_associate_class(ideal, n, |x| {
            if found.is_none() && self.norm_int(&x).abs() == n {
                found = Some(x);
            }
        })?;
        Ok(found)
    }

    /// All integral ideals of norm <= bound (brute force over HNFs).
    pub fn ideals_up_to(&self, bound: i128) -> Vec<IdealK> {
        let mut out = Vec::new();
        for a in 1..=bound {
            for c in 1..=bound / a {
                for b in 0..c {
                    let i = IdealK { h: [[a, b], [0, c]] };
                    if self.is_ideal(&i) {
                        out.push(i);
                    }
                }
            }
        }
        out
    }

    fn compute_class_number(&self) -> Result<u32> {
        // Minkowski bound sqrt(disc)/2 for real quadratic fields
        let mk = ((self.disc as f64).sqrt() / 2.0).floor() as i128;
        let ideals = self.ideals_up_to(mk.max(1));
        let mut reps: Vec<IdealK> = Vec::new();
        for i in ideals {
            let mut new = true;
            for r in &reps {
                // i ~ r iff i * conj(r) is principal
                let prod = self.ideal_mul(&i, &self.ideal_conj(r));
                if self.principal_generator(&prod)?.is_some() {
                    new = false;
                    break;
                }
            }
            if new {
                reps.push(i);
            }
        }
        Ok(reps.len() as u32)
    }

    pub fn ideal_conj(&self, i: &IdealK) -> IdealK {
        let gens: Vec<Vec<i128>> = i
            .basis()
            .iter()
            .map(|x| {
                let c = self.conj(x);
                vec![c.a, c.b]
            })
            .collect();
        IdealK::from_rows(&hnf(&gens, 2, Some(i.norm())).expect("small ideal"))
    }

    /// Prime elements above the rational prime p (one per prime ideal).
    pub fn primes_above(&self, p: i128) -> Result<Vec<FieldElement>> {
        if self.h_k != 1 {
            return Err(Error::Unsupported("prime elements need class number one".into()));
        }
        let mut found: Option<FieldElement> = None;
        let pi = IdealK::UNIT;
        self.for_each_associate_class(&pi, p, |x| {
            if found.is_none() && self.norm_int(&x).abs() == p {
                found = Some(x);
            }
        })?;
        Ok(match found {
            None => vec![FieldElement::int(p, 0)],
            Some(pi) => {
                let c = self.canonical_associate(&self.conj(&pi));
                if c == pi {
                    vec![pi]
                } else {
                    let mut v = vec![pi, c];
                    v.sort();
                    v
                }
            }
        })
    }

    /// Factor a nonzero integral element as unit * prod pi_i^e_i.
    pub fn factor(&self, x: &FieldElement) -> Result<Vec<(FieldElement, u32)>> {
        if x.is_zero() || !x.is_integral() {
            return Err(Error::pre("factor needs a nonzero integral element"));
        }
        let n = self.norm_int(x).unsigned_abs();
        let mut out = Vec::new();
        let mut rest = *x;
        for (p, _) in factorize(n) {
            for pi in self.primes_above(p as i128)? {
                let mut e = 0;
                while let Some(q) = self.div_exact(&rest, &pi) {
                    rest = q;
                    e += 1;
                }
                if e > 0 {
                    out.push((pi, e));
                }
            }
        }
        if !self.is_unit(&rest) {
            return Err(Error::Inconsistent(format!("factorization of {x} left {rest}")));
        }
        Ok(out)
    }

    /// All decompositions (D) = d f^2, sorted by N(f).
    pub fn square_divisor_splits(&self, d: &FieldElement) -> Result<Vec<Split>> {
        if self.h_k > 1 {
            return Err(Error::Unsupported(format!(
                "square_divisor_splits needs h_K = 1 (m = {} has h_K = {})",
                self.m, self.h_k
            )));
        }
        let fac = self.factor(d)?;
        let mut fs = vec![FieldElement::ONE];
        for (pi, e) in &fac {
            let mut next = Vec::new();
            for f in &fs {
                let mut pk = FieldElement::ONE;
                for _ in 0..=(e / 2) {
                    next.push(self.mul(f, &pk));
                    pk = self.mul(&pk, pi);
                }
            }
            fs = next;
        }
        let mut out: Vec<Split> = fs
            .into_iter()
            .map(|f| {
                let f2 = self.mul(&f, &f);
                let dg = self.div_exact(d, &f2).expect("f^2 divides D");
                Split { d: self.principal(&dg), f: self.principal(&f), d_gen: dg, f_gen: f }
            })
            .collect();
        out.sort_by_key(|s| (s.f.norm(), s.f));
        Ok(out)
    }

    pub fn sign_data(&self) -> SignReport {
        let e = self.eps_k;
        let s = (self.sign_at(&e, 0), self.sign_at(&e, 1));
        let mut imgs = vec![(1, 1), (-1, -1), s, (-s.0, -s.1)];
        imgs.sort();
        imgs.dedup();
        let narrow = imgs.len() == 4;
        let n = (self.degree - 1) as usize;
        let guaranteed = if narrow {
            // all of {±1}^n
            (0..1u32 << n)
                .map(|bits| (0..n).map(|j| if bits >> j & 1 == 1 { -1 } else { 1 }).collect())
                .collect()
        } else {
            vec![vec![1; n], vec![-1; n]]
        };
        let mut guaranteed: Vec<Vec<i8>> = guaranteed;
        guaranteed.sort();
        guaranteed.dedup();
        SignReport { sign_images: imgs, narrow_equals_class: narrow, guaranteed_sign_changes: guaranteed }
    }

    /// Square root in O_K of an integral element, if it exists.
    pub fn sqrt_elem(&self, y: &FieldElement) -> Option<FieldElement> {
        if y.is_zero() {
            return Some(FieldElement::ZERO);
        }
        if !y.is_integral() || self.sign_at(y, 0) < 0 || self.sign_at(y, 1) < 0 {
            return None;
        }
        let [y0, y1] = self.embed_both(y);
        let (r0, r1) = (y0.sqrt(), y1.sqrt());
        for (s0, s1) in [(1.0, 1.0), (1.0, -1.0)] {
            let g = self.from_embeddings(s0 * r0, s1 * r1)?;
            for c in [g, FieldElement::int(g.a + 1, g.b), FieldElement::int(g.a - 1, g.b)] {
                if self.mul(&c, &c) == *y {
                    return Some(if self.sign_at(&c, 0) < 0 { -c } else { c });
                }
            }
        }
        None
    }

    /// Nearest integral element to the given pair of embeddings.
    pub fn from_embeddings(&self, e0: f64, e1: f64) -> Option<FieldElement> {
        let [w0, w1] = self.omega_embeddings();
        let b = ((e0 - e1) / (w0 - w1)).round();
        let a = (e0 - b * w0).round();
        if !a.is_finite() || !b.is_finite() || a.abs() > 1e30 || b.abs() > 1e30 {
            return None;
        }
        Some(FieldElement::int(a as i128, b as i128))
    }

    /// Superset of the integral elements with |iota_0| <= b0 and |iota_1| <= b1,
    /// in lexicographic coordinate order. Callers filter exactly.
    pub fn elements_in_box(&self, b0: f64, b1: f64) -> Vec<FieldElement> {
        let [w0, w1] = self.omega_embeddings();
        let dw = w0 - w1;
        let bmax = ((b0 + b1) / dw).floor() as i128 + 1;
        let mut out = Vec::new();
        for b in -bmax..=bmax {
            let bf = b as f64;
            let lo = (-b0 - bf * w0).max(-b1 - bf * w1).floor() as i128 - 1;
            let hi = (b0 - bf * w0).min(b1 - bf * w1).ceil() as i128 + 1;
            for a in lo..=hi {
                out.push(FieldElement::int(a, b));
            }
        }
        out
    }

    /// Representative of x modulo squares of units: x * eps^(2k) with
    /// 1 <= |iota_0| / |iota_1| < iota_0(eps)^4.
    pub fn canonical_mod_unit_squares(&self, x: &FieldElement) -> FieldElement {
        let e2 = self.mul(&self.eps_k, &self.eps_k);
        let e2inv = self.inv(&e2).expect("unit");
        let mut y = *x;
        let [a0, a1] = self.embed_both(&y);
        if a0 != 0.0 && a1 != 0.0 {
            let k = ((a0.abs() / a1.abs()).ln() / (4.0 * self.regulator())).floor() as i64;
            y = self.mul(&y, &self.pow(&e2, -k).expect("unit"));
        }
        loop {
            if self.ratio_sign(&y) < 0 {
                y = self.mul(&y, &e2);
                continue;
            }
            let down = self.mul(&y, &e2inv);
            if self.ratio_sign(&down) >= 0 {
                y = down;
                continue;
            }
            return y;
        }
    }

    /// Residue representatives of O_K modulo an ideal.
    pub fn residues(&self, i: &IdealK) -> Vec<FieldElement> {
        let mut out = Vec::with_capacity(i.norm() as usize);
        for x in 0..i.h[0][0] {
            for y in 0..i.h[1][1] {
                out.push(FieldElement::int(x, y));
            }
        }
        out
    }

    /// Ideal generated by a list of integral elements (not all zero).
    pub fn ideal_from_elements(&self, gens: &[FieldElement]) -> Result<IdealK> {
        let w = self.omega();
        let mut rows = Vec::new();
        let mut modulus = 0i128;
        for g in gens {
            if g.is_zero() {
                continue;
            }
            let gw = self.mul(g, &w);
            rows.push(vec![g.a, g.b]);
            rows.push(vec![gw.a, gw.b]);
            modulus = modulus.gcd(&self.norm_int(g));
        }
        if rows.is_empty() {
            return Err(Error::pre("zero ideal"));
        }
        Ok(IdealK::from_rows(&hnf(&rows, 2, Some(modulus))?))
    }

    /// iota_0 of w and its conjugate, for coordinate inversion.
    pub fn omega_embeddings(&self) -> [f64; 2] {
        self.embed_both(&self.omega())
    }
}

impl fmt::Display for BaseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt({}))", self.m)
    }
}

/// Parse an ideal HNF written as `[[a,b],[0,c]]` or `a,b;0,c`.
pub fn parse_ideal(s: &str) -> Result<IdealK> {
    let nums: Vec<i128> = s
        .split(|c: char| !(c.is_ascii_digit() || c == '-'))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i128>())
        .collect::<core::result::Result<_, _>>()
        .map_err(|_| Error::pre(format!("cannot parse ideal {s:?}")))?;
    if nums.len() != 4 {
        return Err(Error::pre(format!("ideal needs 4 entries, got {}", nums.len())));
    }
    Ok(IdealK { h: [[nums[0], nums[1]], [nums[2], nums[3]]] })
}

pub(crate) fn sgn_text(s: i8) -> &'static str {
    if s < 0 { "-" } else { "+" }
}

impl SignReport {
    pub fn images_text(&self) -> String {
        let v: Vec<String> = self
            .sign_images
            .iter()
            .map(|&(a, b)| format!("({},{})", sgn_text(a), sgn_text(b)))
            .collect();
        v.join(",")
    }
}
