//! Relative quadratic orders O_{D,d} = O_K[omega] inside L = K(sqrt D), their
//! unit groups, Picard numbers and optimal-embedding counts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
use num_rational::Ratio;

#[allow(unused_imports)]
use num_traits::Float;
use crate::field::{BaseField, FieldElement, IdealK, Split};
use crate::intmat::{hnf, hnf_det};
use crate::lattice::Lattice;
use crate::{Error, Result};

pub type Q = Ratio<i128>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signature {
    /// iota_0(D) > 0 > iota_1(D)
    HyperbolicElliptic,
    /// both embeddings of D negative
    TotallyElliptic,
    Other,
}

impl Signature {
    pub fn as_str(&self) -> &'static str {
        match self {
            Signature::HyperbolicElliptic => "hyperbolic-elliptic",
            Signature::TotallyElliptic => "totally-elliptic",
            Signature::Other => "other",
        }
    }
}

/// Element `u + v*omega` of an order, u, v in O_K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OElem {
    pub u: FieldElement,
    pub v: FieldElement,
}

impl OElem {
    pub const ONE: OElem = OElem { u: FieldElement::ONE, v: FieldElement::ZERO };

    pub fn coords(&self) -> [i128; 4] {
        [self.u.a, self.u.b, self.v.a, self.v.b]
    }

    pub fn from_coords(c: &[i128]) -> OElem {
        OElem { u: FieldElement::int(c[0], c[1]), v: FieldElement::int(c[2], c[3]) }
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn neg(&self) -> OElem {
        OElem { u: -self.u, v: -self.v }
    }
}

/// One place of L: the K-place below it and the image of omega.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Place {
    kplace: usize,
    omega: Complex64,
    real: bool,
}

/// The order of relative discriminant d in K(sqrt D).
#[derive(Clone, Debug, PartialEq)]
pub struct RelativeQuadraticOrder {
    pub field: BaseField,
    /// D as supplied
    pub d_input: FieldElement,
    /// relative discriminant ideal
    pub d: IdealK,
    /// D' = D / f^2, a generator of d
    pub dprime: FieldElement,
    pub f_gen: FieldElement,
    /// omega = (r + k sqrt D') / 2 with k a unit
    pub r: FieldElement,
    pub k: FieldElement,
    /// trace and norm of omega
    pub s: FieldElement,
    pub n: FieldElement,
    pub signature: Signature,
    /// D' normalized modulo squares of units (cache key component)
    pub canonical_d: FieldElement,
    /// conductor relative to the maximal order of L
    pub conductor: IdealK,
    /// D' of the maximal order, and its omega's trace and norm
    pub max_dprime: FieldElement,
    pub max_s: FieldElement,
    pub max_n: FieldElement,
    places: Vec<Place>,
}

fn mod4(x: &FieldElement) -> FieldElement {
    FieldElement::int(x.a.rem_euclid(4), x.b.rem_euclid(4))
}

/// Find (r, k) with (r^2 - k^2 D') / 4 in O_K, r mod 2, k = eps^j. Only k mod 4
/// matters, so j runs over one period of eps in (O_K / 4)^*.
fn realize(field: &BaseField, dp: &FieldElement) -> Option<(FieldElement, FieldElement, FieldElement)> {
    let dp4 = mod4(dp);
    let eps4 = mod4(&field.eps_k);
    let mut k4 = FieldElement::ONE;
    for j in 0..=16 {
        let k2d = mod4(&field.mul(&mod4(&field.mul(&k4, &k4)), &dp4));
        for (x, y) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let r = FieldElement::int(x, y);
            if mod4(&(field.mul(&r, &r) - k2d)) == FieldElement::ZERO {
                let k = field.pow(&field.eps_k, j).ok()?;
                let num = field.mul(&r, &r) - field.mul(&field.mul(&k, &k), dp);
                let n = field.mul(&num, &FieldElement::rational(1, 4).expect("nonzero"));
                debug_assert!(n.is_integral());
                return Some((r, k, n));
            }
        }
        k4 = mod4(&field.mul(&k4, &eps4));
        if j > 0 && k4 == FieldElement::ONE {
            break;
        }
    }
    None
}

impl RelativeQuadraticOrder {
    /// O_{D,d} for an ideal d with d || (D).
    pub fn build(field: &BaseField, d_elem: &FieldElement, d: &IdealK) -> Result<Self> {
        let splits = field.square_divisor_splits(d_elem)?;
        let split = splits
            .iter()
            .find(|s| s.d == *d)
            .ok_or_else(|| Error::pre(format!("{d} does not satisfy d || ({d_elem})")))?;
        Self::from_split(field, d_elem, split, &splits)?
            .ok_or_else(|| Error::pre(format!("no order of relative discriminant {d} in K(sqrt({d_elem}))")))
    }

    /// Build the order for one split; `None` when no order of that
    /// relative discriminant exists.
    pub fn from_split(
        field: &BaseField,
        d_elem: &FieldElement,
        split: &Split,
        all: &[Split],
    ) -> Result<Option<Self>> {
        if !d_elem.is_integral() || d_elem.is_zero() {
            return Err(Error::pre("D must be a nonzero integral element"));
        }
        if field.h_k != 1 {
            return Err(Error::Unsupported(format!("relative orders over a base field of class number {}", field.h_k)));
        }
        if field.sqrt_elem(d_elem).is_some() {
            return Err(Error::pre(format!("D = {d_elem} is a square in K")));
        }
        let Some((r, k, n)) = realize(field, &split.d_gen) else {
            return Ok(None);
        };
        // maximal order: realized split with largest f
        let mut best: Option<(&Split, FieldElement, FieldElement)> = None;
        for s in all {
            if let Some((r2, _, n2)) = realize(field, &s.d_gen) {
                if best.as_ref().is_none_or(|b| s.f.norm() > b.0.f.norm()) {
                    best = Some((s, r2, n2));
                }
            }
        }
        let (ms, mr, mn) = best.expect("the split itself is realized");
        let cgen = field
            .div_exact(&ms.f_gen, &split.f_gen)
            .ok_or_else(|| Error::Inconsistent("conductor is not integral".into()))?;
        let dp = split.d_gen;
        let signature = match (field.sign_at(&dp, 0), field.sign_at(&dp, 1)) {
            (1, -1) => Signature::HyperbolicElliptic,
            (-1, -1) => Signature::TotallyElliptic,
            _ => Signature::Other,
        };
        let mut o = RelativeQuadraticOrder {
            field: field.clone(),
            d_input: *d_elem,
            d: split.d,
            dprime: dp,
            f_gen: split.f_gen,
            r,
            k,
            s: r,
            n,
            signature,
            canonical_d: field.canonical_mod_unit_squares(&dp),
            conductor: field.principal(&cgen),
            max_dprime: ms.d_gen,
            max_s: mr,
            max_n: mn,
            places: Vec::new(),
        };
        o.places = o.compute_places();
        o.check_closure()?;
        Ok(Some(o))
    }

    fn compute_places(&self) -> Vec<Place> {
        let f = &self.field;
        let mut out = Vec::new();
        for j in 0..2 {
            let dj = f.embed_f64(&self.dprime, j);
            let rj = f.embed_f64(&self.r, j);
            let kj = f.embed_f64(&self.k, j);
            if dj > 0.0 {
                let sq = dj.sqrt();
                out.push(Place { kplace: j, omega: Complex64::new((rj + kj * sq) / 2.0, 0.0), real: true });
                out.push(Place { kplace: j, omega: Complex64::new((rj - kj * sq) / 2.0, 0.0), real: true });
            } else {
                let sq = (-dj).sqrt();
                out.push(Place { kplace: j, omega: Complex64::new(rj / 2.0, kj * sq / 2.0), real: false });
            }
        }
        out
    }

    /// The four Z-basis elements 1, w, omega, w*omega.
    pub fn z_basis(&self) -> [OElem; 4] {
        let w = self.field.omega();
        let z = FieldElement::ZERO;
        [
            OElem { u: FieldElement::ONE, v: z },
            OElem { u: w, v: z },
            OElem { u: z, v: FieldElement::ONE },
            OElem { u: z, v: w },
        ]
    }

    /// x as X + Y sqrt(D') with X, Y in K.
    pub fn to_surd(&self, x: &OElem) -> (FieldElement, FieldElement) {
        let f = &self.field;
        let half = FieldElement::rational(1, 2).expect("nonzero");
        let x0 = x.u + f.mul(&f.mul(&x.v, &self.r), &half);
        let y0 = f.mul(&f.mul(&x.v, &self.k), &half);
        (x0, y0)
    }

    /// Inverse of `to_surd`; `None` if the element is not in the order.
    pub fn from_surd(&self, x: &FieldElement, y: &FieldElement) -> Option<OElem> {
        let f = &self.field;
        let v = f.div(&f.mul(y, &FieldElement::int(2, 0)), &self.k).ok()?;
        let u = *x - f.div(&f.mul(&v, &self.r), &FieldElement::int(2, 0)).ok()?;
        (u.is_integral() && v.is_integral()).then_some(OElem { u, v })
    }

    /// Multiplicative closure of the Z-basis, checked through surd arithmetic.
    fn check_closure(&self) -> Result<()> {
        let f = &self.field;
        let b = self.z_basis();
        for x in &b {
            for y in &b {
                let (x0, x1) = self.to_surd(x);
                let (y0, y1) = self.to_surd(y);
                let p0 = f.mul(&x0, &y0) + f.mul(&f.mul(&x1, &y1), &self.dprime);
                let p1 = f.mul(&x0, &y1) + f.mul(&x1, &y0);
                let Some(p) = self.from_surd(&p0, &p1) else {
                    return Err(Error::Inconsistent("basis product left the order".into()));
                };
                if p != self.mul(x, y) {
                    return Err(Error::Inconsistent("order multiplication mismatch".into()));
                }
            }
        }
        Ok(())
    }

    pub fn mul(&self, x: &OElem, y: &OElem) -> OElem {
        let f = &self.field;
        let vv = f.mul(&x.v, &y.v);
        OElem {
            u: f.mul(&x.u, &y.u) - f.mul(&self.n, &vv),
            v: f.mul(&x.u, &y.v) + f.mul(&x.v, &y.u) + f.mul(&self.s, &vv),
        }
    }

    pub fn pow(&self, x: &OElem, e: u32) -> OElem {
        let mut r = OElem::ONE;
        for _ in 0..e {
            r = self.mul(&r, x);
        }
        r
    }

    /// Image under the nontrivial automorphism of L/K.
    pub fn conj(&self, x: &OElem) -> OElem {
        OElem { u: x.u + self.field.mul(&x.v, &self.s), v: -x.v }
    }

    pub fn rel_norm(&self, x: &OElem) -> FieldElement {
        let f = &self.field;
        f.mul(&x.u, &x.u) + f.mul(&f.mul(&self.s, &x.u), &x.v) + f.mul(&self.n, &f.mul(&x.v, &x.v))
    }

    pub fn rel_trace(&self, x: &OElem) -> FieldElement {
        x.u + x.u + self.field.mul(&x.v, &self.s)
    }

    pub fn abs_norm(&self, x: &OElem) -> i128 {
        self.field.norm_int(&self.rel_norm(x))
    }

    pub fn scale(&self, c: &FieldElement, x: &OElem) -> OElem {
        OElem { u: self.field.mul(c, &x.u), v: self.field.mul(c, &x.v) }
    }

    pub fn div_k(&self, x: &OElem, c: &FieldElement) -> Option<OElem> {
        Some(OElem { u: self.field.div_exact(&x.u, c)?, v: self.field.div_exact(&x.v, c)? })
    }

    /// Images at the places of L (real places carry zero imaginary part).
    pub fn embed(&self, x: &OElem) -> Vec<Complex64> {
        self.places
            .iter()
            .map(|p| {
                let u = self.field.embed_f64(&x.u, p.kplace);
                let v = self.field.embed_f64(&x.v, p.kplace);
                Complex64::new(u, 0.0) + p.omega * v
            })
            .collect()
    }

    /// The real place used for lengths: iota_0 with the + square root.
    pub fn iota0(&self, x: &OElem) -> f64 {
        self.embed(x)[0].re
    }

    /// Absolute discriminant |d_K|^2 |N(d)|.
    pub fn abs_disc(&self) -> f64 {
        let nd = self.field.norm_int(&self.dprime).unsigned_abs() as f64;
        (self.field.disc as f64).powi(2) * nd
    }

    /// Minkowski bound for invertible ideal classes of this order.
    pub fn minkowski_bound(&self) -> f64 {
        let r2 = self.places.iter().filter(|p| !p.real).count() as i32;
        (4.0 / PI).powi(r2) * (3.0 / 32.0) * self.abs_disc().sqrt()
    }

    pub fn key(&self) -> OrderKey {
        OrderKey { m: self.field.m, d: self.canonical_d, d_hnf: self.d }
    }

    /// alpha = (t + sqrt D)/2 in order coordinates (with D = d_input).
    pub fn trace_element(&self, t: &FieldElement) -> Option<OElem> {
        // sqrt D = f_gen sqrt D'
        let half = FieldElement::rational(1, 2).expect("nonzero");
        let f = &self.field;
        self.from_surd(&f.mul(t, &half), &f.mul(&self.f_gen, &half))
    }

    /// Lattice of an O-submodule with basis `b` in the box with the given
    /// per-place bounds.
    fn box_lattice(&self, b: &[OElem], bounds: &[f64]) -> Lattice {
        let coords = b.iter().map(|x| x.coords().to_vec()).collect();
        let images = b
            .iter()
            .map(|x| {
                let e = self.embed(x);
                let mut v = Vec::with_capacity(4);
                for (i, p) in self.places.iter().enumerate() {
                    if p.real {
                        v.push(e[i].re / bounds[i]);
                    } else {
                        v.push(e[i].re / bounds[i]);
                        v.push(e[i].im / bounds[i]);
                    }
                }
                v
            })
            .collect();
        Lattice::new(coords, images)
    }

    /// Per-place bounds covering a fundamental domain for elements of
    /// |norm| <= x modulo the unit subgroup <eps_K, eps_rel>.
    fn unit_box(&self, x: f64, reg_rel: f64) -> Result<Vec<f64>> {
        let e = self.field.regulator();
        let base = x.powf(0.25);
        match self.signature {
            Signature::HyperbolicElliptic => {
                let big = base * ((e + reg_rel) / 2.0).exp();
                Ok(vec![big, big, base * (e / 2.0).exp()])
            }
            Signature::TotallyElliptic => {
                let b = base * (e / 2.0).exp();
                Ok(vec![b, b])
            }
            Signature::Other => Err(Error::Unsupported("orders with totally real or mixed signature".into())),
        }
    }

    fn visit_box(
        &self,
        basis: &[OElem],
        bounds: &[f64],
        node_limit: u64,
        mut visit: impl FnMut(OElem) -> Result<()>,
    ) -> Result<()> {
        let lat = self.box_lattice(basis, bounds);
        lat.enumerate(self.places.len() as f64, node_limit, |c| visit(OElem::from_coords(c)))?;
        Ok(())
    }
}

impl fmt::Display for RelativeQuadraticOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O_K[({} + {}*sqrt({}))/2] d={}", self.r, self.k, self.dprime, self.d)
    }
}

/// Identifies an order up to isomorphism over K.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderKey {
    pub m: i128,
    pub d: FieldElement,
    pub d_hnf: IdealK,
}

/// Search budgets.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    /// largest iota_0 of a relative unit searched for
    pub unit_height: f64,
    /// largest Minkowski bound accepted by the class-number oracle
    pub ideal_norm_cap: f64,
    /// node budget for each lattice enumeration
    pub node_limit: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { unit_height: 1.0e6, ideal_norm_cap: 2.0e4, node_limit: 20_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitData {
    /// generator of the norm-one units modulo torsion (hyperbolic-elliptic)
    pub eps: Option<OElem>,
    pub reg: Option<f64>,
    /// number of roots of unity in the order
    pub torsion: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnitIndex {
    Known(u8),
    Unknown { bound: u64 },
}

impl UnitIndex {
    pub fn range(&self) -> (u8, u8) {
        match self {
            UnitIndex::Known(v) => (*v, *v),
            UnitIndex::Unknown { .. } => (1, 4),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassNumber {
    pub value: u64,
    /// values at the base bound and at twice the bound
    pub values: [u64; 2],
    pub bounds: [f64; 2],
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassData {
    pub h_o: ClassNumber,
    pub unit_index: UnitIndex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderArithmetic {
    pub units: UnitData,
    pub class: ClassData,
}

/// Source of class data, e.g. a cache in front of [`class_data`].
pub type ClassProvider<'a> = &'a (dyn Fn(&RelativeQuadraticOrder, &UnitData) -> Result<ClassData> + Sync);

/// Traces t in O_K with 2 < iota_0(t) <= hi and |iota_1(t)| < 2, sorted by
/// iota_0 then coordinates.
pub fn hyperbolic_elliptic_traces(field: &BaseField, hi: f64) -> Vec<FieldElement> {
    let mut v: Vec<(f64, FieldElement)> = field
        .elements_in_box(hi, 2.0)
        .into_iter()
        .filter(|t| {
            field.cmp_at(t, 0, 2.0) == Ordering::Greater
                && field.cmp_at(t, 0, hi) != Ordering::Greater
                && field.cmp_abs_at(t, 1, 2.0) == Ordering::Less
        })
        .map(|t| (field.embed_f64(&t, 0), t))
        .collect();
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    v.into_iter().map(|p| p.1).collect()
}

/// Smallest norm-one unit with iota_0 > 1, the relative regulator, and the
/// number of roots of unity.
pub fn relative_fundamental_unit(o: &RelativeQuadraticOrder, bounds: &Bounds) -> Result<UnitData> {
    let torsion = roots_of_unity(o, bounds)?;
    if o.signature != Signature::HyperbolicElliptic {
        return Ok(UnitData { eps: None, reg: None, torsion });
    }
    let f = &o.field;
    // windows of doubling height, each scanned in iota_0 order
    let mut lo = 2.0;
    while lo < bounds.unit_height {
        let hi = (lo * 2.0).min(bounds.unit_height);
        for tau in hyperbolic_elliptic_traces(f, hi) {
            if f.cmp_at(&tau, 0, lo) != Ordering::Greater {
                continue;
            }
            if let Some(u) = unit_with_trace(o, &tau)? {
                return Ok(UnitData { eps: Some(u), reg: Some(o.iota0(&u).ln()), torsion });
            }
        }
        lo = hi;
    }
    Err(Error::SearchExhausted { what: "relative fundamental unit".into(), bound: bounds.unit_height as u64 })
}

/// The norm-one unit of trace tau that is > 1 at iota_0, if it lies in O.
fn unit_with_trace(o: &RelativeQuadraticOrder, tau: &FieldElement) -> Result<Option<OElem>> {
    let f = &o.field;
    let disc = f.mul(tau, tau) - FieldElement::int(4, 0);
    let Some(q) = f.div_exact(&disc, &o.dprime) else { return Ok(None) };
    let Some(g) = f.sqrt_elem(&q) else { return Ok(None) };
    let half = FieldElement::rational(1, 2).expect("nonzero");
    for gs in [g, -g] {
        let Some(beta) = o.from_surd(&f.mul(tau, &half), &f.mul(&gs, &half)) else { continue };
        if o.iota0(&beta) > 1.0 {
            if o.rel_norm(&beta) != FieldElement::ONE {
                return Err(Error::Inconsistent("relative unit has norm != 1".into()));
            }
            return Ok(Some(beta));
        }
    }
    Ok(None)
}

fn roots_of_unity(o: &RelativeQuadraticOrder, bounds: &Bounds) -> Result<u32> {
    let b = vec![1.0 + 1e-9; o.places.len()];
    let mut found = BTreeSet::new();
    o.visit_box(&o.z_basis(), &b, bounds.node_limit, |x| {
        if o.rel_norm(&x) == FieldElement::ONE && (1..=12).any(|e| o.pow(&x, e) == OElem::ONE) {
            found.insert(x);
        }
        Ok(())
    })?;
    Ok(found.len() as u32)
}

/// [O_K^* : n_{L/K}(O^*)] from the unit cosets reached by units of O.
pub fn unit_index(o: &RelativeQuadraticOrder, units: &UnitData, bounds: &Bounds) -> Result<UnitIndex> {
    let f = &o.field;
    let bx = o.unit_box(1.0, units.reg.unwrap_or(0.0))?;
    let mut cosets: BTreeSet<(i8, i64)> = BTreeSet::new();
    cosets.insert((1, 0));
    let res = o.visit_box(&o.z_basis(), &bx, bounds.node_limit, |x| {
        if o.abs_norm(&x).abs() == 1 {
            let nr = o.rel_norm(&x);
            let (s, e) = f.unit_log(&nr)?;
            cosets.insert((s, e.rem_euclid(2)));
        }
        Ok(())
    });
    match res {
        Ok(()) => Ok(UnitIndex::Known((4 / cosets.len()) as u8)),
        Err(Error::SearchExhausted { bound, .. }) => Ok(UnitIndex::Unknown { bound }),
        Err(e) => Err(e),
    }
}

/// HNF of a full-rank O-submodule given by Z-generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OIdeal {
    pub h: [[i128; 4]; 4],
}

impl OIdeal {
    pub fn norm(&self) -> i128 {
        (0..4).map(|i| self.h[i][i]).product()
    }

    pub fn basis(&self) -> [OElem; 4] {
        [0, 1, 2, 3].map(|i| OElem::from_coords(&self.h[i]))
    }
}

fn ideal_hnf(gens: &[OElem], modulus: i128) -> Result<OIdeal> {
    let rows: Vec<Vec<i128>> = gens.iter().map(|g| g.coords().to_vec()).collect();
    let h = hnf(&rows, 4, Some(modulus))?;
    if hnf_det(&h)? != modulus.abs() {
        return Err(Error::Inconsistent("ideal index does not match its norm".into()));
    }
    let mut out = [[0i128; 4]; 4];
    for i in 0..4 {
        out[i].copy_from_slice(&h[i]);
    }
    Ok(OIdeal { h: out })
}

/// An invertible integral ideal c * [a, b + omega] with N_{L/K} = c conj(c) a.
#[derive(Clone, Debug)]
struct InvIdeal {
    ideal: OIdeal,
    basis: [OElem; 4],
    rel_norm: FieldElement,
}

impl RelativeQuadraticOrder {
    /// All invertible integral ideals with index <= bound.
    fn invertible_ideals(&self, bound: i128) -> Result<Vec<InvIdeal>> {
        let f = &self.field;
        let mut elems = BTreeSet::new();
        f.for_each_associate_class(&IdealK::UNIT, bound, |x| {
            elems.insert(x);
        })?;
        let elems: Vec<FieldElement> = elems.into_iter().collect();
        let w = f.omega();
        let z = FieldElement::ZERO;
        let mut out = Vec::new();
        for a in &elems {
            let na = f.norm_int(a).abs();
            let pa = f.principal(a);
            for b in f.residues(&pa) {
                let c = f.mul(&b, &b) + f.mul(&self.s, &b) + self.n;
                if !pa.contains(&c) {
                    continue;
                }
                let c_over_a = f.div_exact(&c, a).expect("a divides c");
                let two_b_s = b + b + self.s;
                if f.ideal_from_elements(&[*a, two_b_s, c_over_a])? != IdealK::UNIT {
                    continue;
                }
                let bw = OElem { u: b, v: FieldElement::ONE };
                let j0 = [
                    OElem { u: *a, v: z },
                    OElem { u: f.mul(a, &w), v: z },
                    bw,
                    OElem { u: f.mul(&b, &w), v: w },
                ];
                for cc in &elems {
                    let nc = f.norm_int(cc).abs();
                    if nc * nc * na > bound {
                        continue;
                    }
                    let basis = j0.map(|x| self.scale(cc, &x));
                    let ideal = ideal_hnf(&basis, nc * nc * na)?;
                    let rel_norm = f.mul(&f.mul(cc, &f.conj(cc)), a);
                    out.push(InvIdeal { ideal, basis, rel_norm });
                }
            }
        }
        out.sort_by(|x, y| x.ideal.norm().cmp(&y.ideal.norm()).then(x.ideal.cmp(&y.ideal)));
        out.dedup_by(|x, y| x.ideal == y.ideal);
        Ok(out)
    }

    /// Class labels of the invertible ideals of index <= bound; the number
    /// of labels is the Picard number when bound is a Minkowski bound.
    fn classify_ideals(&self, bound: i128, reg_rel: f64, node_limit: u64) -> Result<(Vec<OIdeal>, Vec<usize>)> {
        let ideals = self.invertible_ideals(bound)?;
        let index: BTreeMap<OIdeal, usize> = ideals.iter().enumerate().map(|(i, x)| (x.ideal.clone(), i)).collect();
        let mut label: Vec<Option<usize>> = vec![None; ideals.len()];
        let mut classes = 0usize;
        for j in 0..ideals.len() {
            if label[j].is_some() {
                continue;
            }
            let cls = classes;
            classes += 1;
            label[j] = Some(cls);
            let jj = &ideals[j];
            let nj = jj.ideal.norm();
            let conj_basis = jj.basis.map(|x| self.conj(&x));
            let x = (bound * nj) as f64;
            let bx = self.unit_box(x, reg_rel)?;
            self.visit_box(&conj_basis, &bx, node_limit, |mu| {
                let nmu = self.abs_norm(&mu).abs();
                if nmu == 0 || nmu > bound * nj {
                    return Ok(());
                }
                let ni = nmu / nj;
                let gens: Option<Vec<OElem>> =
                    jj.basis.iter().map(|b| self.div_k(&self.mul(&mu, b), &jj.rel_norm)).collect();
                let gens = gens.ok_or_else(|| Error::Inconsistent("mu J / N(J) is not integral".into()))?;
                let i = ideal_hnf(&gens, ni)?;
                match index.get(&i) {
                    Some(&pos) => match label[pos] {
                        None => label[pos] = Some(cls),
                        Some(c) if c == cls => {}
                        Some(_) => return Err(Error::Inconsistent("classes merged after labelling".into())),
                    },
                    None => return Err(Error::Inconsistent("equivalent ideal missing from enumeration".into())),
                }
                Ok(())
            })?;
        }
        Ok((ideals.into_iter().map(|x| x.ideal).collect(), label.into_iter().map(|l| l.expect("labelled")).collect()))
    }

    /// Picard number using ideals up to `mult` times the Minkowski bound.
    pub fn class_number_at(&self, units: &UnitData, mult: f64, bounds: &Bounds) -> Result<u64> {
        let mk = self.minkowski_bound();
        if mk > bounds.ideal_norm_cap {
            return Err(Error::SearchExhausted { what: "Minkowski bound above ideal-norm cap".into(), bound: bounds.ideal_norm_cap as u64 });
        }
        let b = (mk * mult).floor().max(1.0) as i128;
        let (_, labels) = self.classify_ideals(b, units.reg.unwrap_or(0.0), bounds.node_limit)?;
        Ok(labels.iter().copied().max().map_or(0, |v| v + 1) as u64)
    }
}

/// Class number at the Minkowski bound and at twice it.
pub fn class_number(o: &RelativeQuadraticOrder, units: &UnitData, bounds: &Bounds) -> Result<ClassNumber> {
    let mk = o.minkowski_bound();
    let h1 = o.class_number_at(units, 1.0, bounds)?;
    match o.class_number_at(units, 2.0, bounds) {
        Ok(h2) => Ok(ClassNumber { value: h1, values: [h1, h2], bounds: [mk, 2.0 * mk], certified: h1 == h2 }),
        Err(Error::SearchExhausted { .. }) => {
            Ok(ClassNumber { value: h1, values: [h1, h1], bounds: [mk, 2.0 * mk], certified: false })
        }
        Err(e) => Err(e),
    }
}

/// Class number and unit index, computed from scratch.
pub fn class_data(o: &RelativeQuadraticOrder, units: &UnitData, bounds: &Bounds) -> Result<ClassData> {
    Ok(ClassData { h_o: class_number(o, units, bounds)?, unit_index: unit_index(o, units, bounds)? })
}

pub fn order_arithmetic(o: &RelativeQuadraticOrder, bounds: &Bounds) -> Result<OrderArithmetic> {
    let units = relative_fundamental_unit(o, bounds)?;
    let class = class_data(o, &units, bounds)?;
    Ok(OrderArithmetic { units, class })
}

/// Quaternion data defining the lattice: finite ramification, number of
/// ramified infinite places, and an optional covolume.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    pub field: BaseField,
    pub ram_f: Vec<IdealK>,
    pub r_a: u32,
    pub vol: Option<f64>,
}

impl LatticeSpec {
    pub fn new(field: BaseField, ram_f: Vec<IdealK>, r_a: u32, vol: Option<f64>) -> Result<Self> {
        if !(ram_f.len() as u32 + r_a).is_multiple_of(2) {
            return Err(Error::pre("the ramification set must have even size"));
        }
        if r_a > field.degree {
            return Err(Error::pre("more ramified infinite places than the field has"));
        }
        if let Some(v) = vol {
            if !(v > 0.0) {
                return Err(Error::pre("covolume must be positive"));
            }
        }
        for p in &ram_f {
            if !field.is_ideal(p) {
                return Err(Error::pre(format!("{p} is not an ideal of O_K")));
            }
        }
        Ok(LatticeSpec { field, ram_f, r_a, vol })
    }

    /// The Hilbert modular group: matrix algebra, no ramification.
    pub fn hilbert(field: BaseField) -> Self {
        LatticeSpec { field, ram_f: Vec::new(), r_a: 0, vol: None }
    }

    /// Number of elliptic factors n = [K:Q] - 1.
    pub fn n(&self) -> u32 {
        self.field.degree - 1
    }
}

/// Optimal-embedding local factor at a finite ramified prime p.
pub fn local_factor(o: &RelativeQuadraticOrder, p: &IdealK, spec: &LatticeSpec) -> Result<u8> {
    if !spec.ram_f.contains(p) {
        return Err(Error::pre(format!("{p} is not in the finite ramification set")));
    }
    let f = &o.field;
    // non-maximal at p: p divides the conductor
    if p.contains(&f.principal_generator(&o.conductor)?.unwrap_or(FieldElement::ONE)) && o.conductor != IdealK::UNIT {
        return Ok(0);
    }
    Ok(match prime_splitting(o, p)? {
        Splitting::Split => 0,
        Splitting::Ramified => 1,
        Splitting::Inert => 2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitting {
    Split,
    Ramified,
    Inert,
}

/// Decomposition of a prime ideal p of O_K in L.
pub fn prime_splitting(o: &RelativeQuadraticOrder, p: &IdealK) -> Result<Splitting> {
    let f = &o.field;
    if p.contains(&o.max_dprime) {
        return Ok(Splitting::Ramified);
    }
    // roots of x^2 - s x + n over O_K / p for the maximal order's omega
    let has_root = f.residues(p).iter().any(|x| {
        let v = f.mul(x, x) - f.mul(&o.max_s, x) + o.max_n;
        p.contains(&v)
    });
    Ok(if has_root { Splitting::Split } else { Splitting::Inert })
}

/// m^1 as an interval (exact when every input is certified).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct M1 {
    pub lo: Q,
    pub hi: Q,
    pub certified: bool,
}

impl M1 {
    pub fn zero() -> Self {
        M1 { lo: Q::from_integer(0), hi: Q::from_integer(0), certified: true }
    }

    pub fn exact(v: Q) -> Self {
        M1 { lo: v, hi: v, certified: true }
    }
}

/// m^1(O, R) = (h_O / h_K) [O_K^* : n(O^*)] 2^{-r_A} prod_p local factors.
pub fn m1(o: &RelativeQuadraticOrder, class: &ClassData, spec: &LatticeSpec) -> Result<M1> {
    let mut local: i128 = 1;
    for p in &spec.ram_f {
        local *= local_factor(o, p, spec)? as i128;
    }
    let hk = o.field.h_k as i128;
    let scale = Q::new(local, hk * (1i128 << spec.r_a));
    let (u_lo, u_hi) = class.unit_index.range();
    let h = &class.h_o;
    let h_lo = h.values[0].min(h.values[1]) as i128;
    let h_hi = h.values[0].max(h.values[1]) as i128;
    let certified = h.certified && matches!(class.unit_index, UnitIndex::Known(_));
    if certified {
        return Ok(M1::exact(scale * (h.value as i128 * u_lo as i128)));
    }
    Ok(M1 { lo: scale * (h_lo * u_lo as i128), hi: scale * (h_hi * u_hi as i128), certified: false })
}

/// Arithmetic inputs of m^1 without a concrete order, for checking the
/// correspondence between lattices that differ in infinite ramification.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingData {
    pub h_o: u64,
    pub h_k: u64,
    pub unit_index: u8,
    pub local_factors: Vec<u8>,
    /// number of elliptic factors, [K:Q] - 1
    pub n: u32,
}

impl EmbeddingData {
    pub fn m1(&self, r_a: u32) -> Q {
        let local: i128 = self.local_factors.iter().map(|&v| v as i128).product();
        Q::new(self.h_o as i128 * self.unit_index as i128 * local, self.h_k as i128 * (1i128 << r_a))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Correspondence {
    Ratio(Q),
    BothZero,
}

/// m^1 with r_A = 0 divided by m^1 with r_A = n.
pub fn correspondence_ratio_data(data: &EmbeddingData) -> Result<Correspondence> {
    if !data.n.is_multiple_of(2) {
        return Err(Error::pre(format!(
            "n = {} is odd: adding n ramified infinite places makes the ramification set odd",
            data.n
        )));
    }
    let a = data.m1(0);
    let b = data.m1(data.n);
    if a == Q::from_integer(0) && b == Q::from_integer(0) {
        return Ok(Correspondence::BothZero);
    }
    Ok(Correspondence::Ratio(a / b))
}

/// The same ratio for a concrete order and two lattice specs.
pub fn correspondence_ratio(
    o: &RelativeQuadraticOrder,
    class: &ClassData,
    spec: &LatticeSpec,
    spec_tilde: &LatticeSpec,
) -> Result<Correspondence> {
    let n = spec.n();
    if spec.ram_f != spec_tilde.ram_f || spec.r_a != 0 || spec_tilde.r_a != n {
        return Err(Error::pre("specs must share finite ramification with r_A = 0 and r_A = n"));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::pre(format!("n = {n} is odd: the ramification set would be odd")));
    }
    let a = m1(o, class, spec)?;
    let b = m1(o, class, spec_tilde)?;
    if a.hi == Q::from_integer(0) && b.hi == Q::from_integer(0) {
        return Ok(Correspondence::BothZero);
    }
    Ok(Correspondence::Ratio(a.lo / b.lo))
}

pub fn describe_index(u: &UnitIndex) -> String {
    match u {
        UnitIndex::Known(v) => format!("{v}"),
        UnitIndex::Unknown { bound } => format!("UNKNOWN(bound {bound})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k2() -> BaseField {
        BaseField::new(2).unwrap()
    }

    fn fe(a: i128, b: i128) -> FieldElement {
        FieldElement::int(a, b)
    }

    fn order_for_trace(k: &BaseField, t: &FieldElement) -> Vec<RelativeQuadraticOrder> {
        let d = k.mul(t, t) - fe(4, 0);
        let splits = k.square_divisor_splits(&d).unwrap();
        splits.iter().filter_map(|s| RelativeQuadraticOrder::from_split(k, &d, s, &splits).unwrap()).collect()
    }

    fn small_elems(o: &RelativeQuadraticOrder, r: i128) -> Vec<OElem> {
        let mut v = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for e in -r..=r {
                        v.push(OElem::from_coords(&[a, b, c, e]));
                    }
                }
            }
        }
        let _ = o;
        v
    }

    #[test]
    fn signature_tags() {
        let k = k2();
        let o = RelativeQuadraticOrder::build(&k, &fe(-1, 2), &k.principal(&fe(-1, 2))).unwrap();
        assert_eq!(o.signature, Signature::HyperbolicElliptic);
        let o = RelativeQuadraticOrder::build(&k, &fe(-2, 0), &k.principal(&fe(2, 0))).unwrap();
        assert_eq!(o.signature, Signature::TotallyElliptic);
        let o = RelativeQuadraticOrder::build(&k, &fe(5, 0), &k.principal(&fe(5, 0))).unwrap();
        assert_eq!(o.signature, Signature::Other);
    }

    #[test]
    fn nontrivial_base_class_group_is_unsupported() {
        let k = BaseField::new(10).unwrap();
        let d = fe(-1, 0);
        assert!(matches!(RelativeQuadraticOrder::build(&k, &d, &IdealK::UNIT), Err(Error::Unsupported(_))));
    }

    #[test]
    fn build_rejects_bad_input() {
        let k = k2();
        assert!(matches!(RelativeQuadraticOrder::build(&k, &fe(9, 0), &IdealK::UNIT), Err(Error::Precondition(_))));
        assert!(matches!(RelativeQuadraticOrder::build(&k, &fe(3, 2), &IdealK::UNIT), Err(Error::Precondition(_))));
        // (-21) / (7) = (3) is prime, not a square
        let d = fe(-21, 0);
        assert!(RelativeQuadraticOrder::build(&k, &d, &k.principal(&fe(7, 0))).is_err());
    }

    #[test]
    fn basis_products_stay_in_order() {
        let k = k2();
        for t in [fe(1, 1), fe(0, 0), fe(1, 2), fe(0, 1), fe(2, 1)] {
            for o in order_for_trace(&k, &t) {
                let b = o.z_basis();
                for x in &b {
                    for y in &b {
                        let (x0, x1) = o.to_surd(x);
                        let (y0, y1) = o.to_surd(y);
                        let p0 = k.mul(&x0, &y0) + k.mul(&k.mul(&x1, &y1), &o.dprime);
                        let p1 = k.mul(&x0, &y1) + k.mul(&x1, &y0);
                        assert!(o.from_surd(&p0, &p1).is_some());
                    }
                }
                assert!(o.trace_element(&t).is_some(), "(t + sqrt D)/2 in {o}");
            }
        }
    }

    #[test]
    fn elliptic_orders_of_trace_zero() {
        let k = k2();
        let os = order_for_trace(&k, &fe(0, 0));
        assert_eq!(os.len(), 2);
        let b = Bounds::default();
        let mut tors: Vec<u32> = os.iter().map(|o| relative_fundamental_unit(o, &b).unwrap().torsion).collect();
        tors.sort();
        // O_K[i] and Z[zeta_8]
        assert_eq!(tors, vec![4, 8]);
        let big = os.iter().find(|o| o.conductor == IdealK::UNIT).unwrap();
        assert_eq!(big.d, k.principal(&fe(2, 0)));
    }

    #[test]
    fn fundamental_unit_is_minimal() {
        let k = k2();
        let o = &order_for_trace(&k, &fe(1, 1))[0];
        let u = relative_fundamental_unit(o, &Bounds::default()).unwrap();
        assert_eq!(u.torsion, 2);
        let eps = u.eps.unwrap();
        assert_eq!(o.rel_norm(&eps), FieldElement::ONE);
        assert_eq!(o.mul(&eps, &o.conj(&eps)), OElem::ONE);
        let top = o.iota0(&eps);
        assert!(top > 1.0 && (u.reg.unwrap() - top.ln()).abs() < 1e-12);
        for x in small_elems(o, 4) {
            if o.rel_norm(&x) == FieldElement::ONE {
                let v = o.iota0(&x);
                assert!(!(v > 1.0 + 1e-9 && v < top - 1e-9), "{x:?} beats eps");
            }
        }
        // alpha = (t + sqrt D)/2 is eps up to sign and inversion
        let alpha = o.trace_element(&fe(1, 1)).unwrap();
        let cands = [eps, eps.neg(), o.conj(&eps), o.conj(&eps).neg()];
        assert!(cands.contains(&alpha));
    }

    #[test]
    fn square_trace_gives_second_power() {
        let k = k2();
        let o1 = &order_for_trace(&k, &fe(1, 1))[0];
        let os = order_for_trace(&k, &fe(1, 2));
        assert_eq!(os.len(), 1);
        let o2 = &os[0];
        assert_eq!(o2.key(), o1.key());
        let u = relative_fundamental_unit(o2, &Bounds::default()).unwrap();
        let eps = u.eps.unwrap();
        let alpha = o2.trace_element(&fe(1, 2)).unwrap();
        let e2 = o2.mul(&eps, &eps);
        let cands = [e2, e2.neg(), o2.conj(&e2), o2.conj(&e2).neg()];
        assert!(cands.contains(&alpha));
        // trace identity t2 = t^2 - 2
        assert_eq!(k.mul(&fe(1, 1), &fe(1, 1)) - fe(2, 0), fe(1, 2));
    }

    fn brute_cosets(o: &RelativeQuadraticOrder, r: i128) -> usize {
        let mut cosets = BTreeSet::new();
        cosets.insert((1i8, 0i64));
        for x in small_elems(o, r) {
            if o.abs_norm(&x).abs() == 1 {
                let (s, e) = o.field.unit_log(&o.rel_norm(&x)).unwrap();
                cosets.insert((s, e.rem_euclid(2)));
            }
        }
        cosets.len()
    }

    #[test]
    fn unit_index_matches_brute_force() {
        let k = k2();
        let b = Bounds::default();
        for t in [fe(1, 1), fe(0, 0), fe(0, 1), fe(2, 1)] {
            for o in order_for_trace(&k, &t) {
                let u = relative_fundamental_unit(&o, &b).unwrap();
                let UnitIndex::Known(ix) = unit_index(&o, &u, &b).unwrap() else { panic!("unknown") };
                assert!([1, 2, 4].contains(&ix));
                // brute force can only find a subset of the cosets
                let c = brute_cosets(&o, 3);
                assert!(4 / c >= ix as usize, "{o}: brute {c} cosets, index {ix}");
            }
        }
        // O_K[i]: n(1+i) = 2 is not a unit, but n(zeta_8-type) elements do not exist;
        // i has norm 1 and eps_K has norm eps_K^2, so only squares are reached
        let os = order_for_trace(&k, &fe(0, 0));
        let zi = os.iter().find(|o| o.conductor != IdealK::UNIT).unwrap();
        let u = relative_fundamental_unit(zi, &b).unwrap();
        assert_eq!(unit_index(zi, &u, &b).unwrap(), UnitIndex::Known(brute_index(zi)));
    }

    fn brute_index(o: &RelativeQuadraticOrder) -> u8 {
        (4 / brute_cosets(o, 3)) as u8
    }

    #[test]
    fn class_numbers_are_stable() {
        let k = k2();
        let b = Bounds::default();
        for t in [fe(1, 1), fe(0, 0), fe(0, 1), fe(1, 2), fe(2, 1), fe(3, 1)] {
            for o in order_for_trace(&k, &t) {
                if o.signature == Signature::Other {
                    continue;
                }
                let u = relative_fundamental_unit(&o, &b).unwrap();
                let h = class_number(&o, &u, &b).unwrap();
                assert!(h.value >= 1);
                assert!(h.certified, "{o}: {:?}", h.values);
            }
        }
    }

    #[test]
    fn class_number_of_other_signature_is_unsupported() {
        let k = k2();
        let o = RelativeQuadraticOrder::build(&k, &fe(5, 0), &k.principal(&fe(5, 0))).unwrap();
        let u = relative_fundamental_unit(&o, &Bounds::default());
        assert!(matches!(u.and_then(|u| class_number(&o, &u, &Bounds::default())), Err(Error::Unsupported(_))));
    }

    #[test]
    fn order_ignores_square_factors_of_d() {
        let k = k2();
        let d = fe(-1, 2);
        let o1 = RelativeQuadraticOrder::build(&k, &d, &k.principal(&d)).unwrap();
        let d9 = k.mul(&d, &fe(9, 0));
        let o2 = RelativeQuadraticOrder::build(&k, &d9, &k.principal(&d)).unwrap();
        assert_eq!(o1.key(), o2.key());
        let b = Bounds::default();
        let a1 = order_arithmetic(&o1, &b).unwrap();
        let a2 = order_arithmetic(&o2, &b).unwrap();
        assert_eq!(a1.class, a2.class);
        assert_eq!(a1.units.torsion, a2.units.torsion);
        assert!((a1.units.reg.unwrap() - a2.units.reg.unwrap()).abs() < 1e-12);
    }

    /// Splitting by Euler's criterion in the residue field of p.
    fn euler_splitting(o: &RelativeQuadraticOrder, p: &IdealK) -> Splitting {
        let k = &o.field;
        if p.contains(&o.max_dprime) {
            return Splitting::Ramified;
        }
        let q = p.norm();
        let e = (q - 1) / 2;
        let mut x = FieldElement::ONE;
        for _ in 0..e {
            x = k.mul(&x, &o.max_dprime);
            // keep coordinates small
            x = k.residues(p).into_iter().find(|r| p.contains(&(x - *r))).unwrap();
        }
        if p.contains(&(x - FieldElement::ONE)) { Splitting::Split } else { Splitting::Inert }
    }

    #[test]
    fn splitting_matches_euler_criterion() {
        let k = k2();
        let odd_primes: Vec<IdealK> = [3i128, 7, 17, 5, 23]
            .iter()
            .flat_map(|&p| k.primes_above(p).unwrap())
            .map(|g| k.principal(&g))
            .collect();
        for t in [fe(1, 1), fe(0, 1), fe(2, 1), fe(1, 2)] {
            for o in order_for_trace(&k, &t) {
                for p in &odd_primes {
                    assert_eq!(prime_splitting(&o, p).unwrap(), euler_splitting(&o, p), "{o} at {p}");
                }
            }
        }
    }

    #[test]
    fn local_factor_values() {
        let k = k2();
        let o = RelativeQuadraticOrder::build(&k, &fe(-1, 2), &k.principal(&fe(-1, 2))).unwrap();
        let ramified = k.principal(&fe(-1, 2));
        let three = k.principal(&fe(3, 0));
        let spec = LatticeSpec::new(k.clone(), vec![ramified, three], 0, None).unwrap();
        assert_eq!(local_factor(&o, &ramified, &spec).unwrap(), 1);
        let lf3 = local_factor(&o, &three, &spec).unwrap();
        let expect = match euler_splitting(&o, &three) {
            Splitting::Split => 0,
            Splitting::Inert => 2,
            Splitting::Ramified => 1,
        };
        assert_eq!(lf3, expect);
        assert!(local_factor(&o, &k.principal(&fe(5, 0)), &spec).is_err());
    }

    #[test]
    fn lattice_spec_parity() {
        let k = k2();
        assert!(LatticeSpec::new(k.clone(), vec![k.principal(&fe(3, 0))], 0, None).is_err());
        assert!(LatticeSpec::new(k.clone(), vec![k.principal(&fe(3, 0))], 1, None).is_ok());
        assert!(LatticeSpec::new(k.clone(), vec![], 2, Some(1.0)).is_ok());
        assert!(LatticeSpec::new(k, vec![], 0, Some(-1.0)).is_err());
    }

    #[test]
    fn m1_formula() {
        let d = EmbeddingData { h_o: 1, h_k: 1, unit_index: 2, local_factors: vec![], n: 1 };
        assert_eq!(d.m1(0), Q::from_integer(2));
        let d = EmbeddingData { h_o: 3, h_k: 1, unit_index: 4, local_factors: vec![2, 0], n: 1 };
        assert_eq!(d.m1(0), Q::from_integer(0));
    }

    #[test]
    fn correspondence_on_synthetic_grid() {
        for h_o in [1u64, 2, 3] {
            for ui in [1u8, 2, 4] {
                for lf in [vec![], vec![1, 1], vec![1, 2], vec![2, 2], vec![0, 2], vec![1, 0]] {
                    let zero = lf.contains(&0);
                    let d = EmbeddingData { h_o, h_k: 1, unit_index: ui, local_factors: lf, n: 2 };
                    let r = correspondence_ratio_data(&d).unwrap();
                    if zero {
                        assert_eq!(r, Correspondence::BothZero);
                    } else {
                        assert_eq!(r, Correspondence::Ratio(Q::from_integer(4)));
                    }
                    let odd = EmbeddingData { n: 1, ..d };
                    assert!(correspondence_ratio_data(&odd).is_err());
                }
            }
        }
    }

    #[test]
    fn correspondence_for_real_quadratic_base_is_a_parity_error() {
        let k = k2();
        let o = RelativeQuadraticOrder::build(&k, &fe(-1, 2), &k.principal(&fe(-1, 2))).unwrap();
        let class = ClassData {
            h_o: ClassNumber { value: 1, values: [1, 1], bounds: [1.0, 2.0], certified: true },
            unit_index: UnitIndex::Known(1),
        };
        let s0 = LatticeSpec::hilbert(k.clone());
        let s1 = LatticeSpec::new(k.clone(), vec![k.principal(&fe(-1, 2))], 1, None).unwrap();
        assert!(correspondence_ratio(&o, &class, &s0, &s1).is_err());
    }

    #[test]
    fn m1_interval_for_unknown_index() {
        let k = k2();
        let o = RelativeQuadraticOrder::build(&k, &fe(-1, 2), &k.principal(&fe(-1, 2))).unwrap();
        let class = ClassData {
            h_o: ClassNumber { value: 1, values: [1, 1], bounds: [1.0, 2.0], certified: true },
            unit_index: UnitIndex::Unknown { bound: 10 },
        };
        let m = m1(&o, &class, &LatticeSpec::hilbert(k)).unwrap();
        assert!(!m.certified);
        assert_eq!((m.lo, m.hi), (Q::from_integer(1), Q::from_integer(4)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn random_orders_are_rings(a in -6i128..6, b in -4i128..4) {
            let k = k2();
            let t = fe(a, b);
            let d = k.mul(&t, &t) - fe(4, 0);
            prop_assume!(!d.is_zero() && k.sqrt_elem(&d).is_none());
            for o in order_for_trace(&k, &t) {
                let basis = o.z_basis();
                for x in &basis {
                    for y in &basis {
                        let p = o.mul(x, y);
                        prop_assert_eq!(o.rel_norm(&p), k.mul(&o.rel_norm(x), &o.rel_norm(y)));
                    }
                }
                if o.signature == Signature::HyperbolicElliptic {
                    let u = relative_fundamental_unit(&o, &Bounds::default()).unwrap();
                    let e = u.eps.unwrap();
                    prop_assert_eq!(o.mul(&e, &o.conj(&e)), OElem::ONE);
                    prop_assert_eq!(u.torsion, 2);
                }
            }
        }
    }
}
