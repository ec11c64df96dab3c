//! Hyperbolic-elliptic and elliptic trace classes with their lengths,
//! folded holonomy angles, order decompositions and multiplicities.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)]
use num_traits::Float;

use crate::field::{BaseField, FieldElement, IdealK};
use crate::orders::{
    hyperbolic_elliptic_traces, m1, relative_fundamental_unit, Bounds, ClassData, ClassProvider, LatticeSpec, OElem,
    RelativeQuadraticOrder, UnitData, M1, Q,
};
use crate::{Error, Result};

/// Per-split data of a trace class.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitInfo {
    pub d: IdealK,
    /// false when no order has this relative discriminant
    pub realized: bool,
    pub m1: M1,
    /// alpha = eps^q in the order of this split (hyperbolic-elliptic only)
    pub q: Option<u32>,
    /// trace of the relative fundamental unit
    pub primitive_trace: Option<FieldElement>,
    /// number of roots of unity in the order
    pub torsion: Option<u32>,
    pub class: Option<ClassData>,
}

impl SplitInfo {
    fn unrealized(d: IdealK) -> Self {
        SplitInfo { d, realized: false, m1: M1::zero(), q: None, primitive_trace: None, torsion: None, class: None }
    }
}

/// Sum of m^1 over splits as an interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Multiplicity {
    pub lo: Q,
    pub hi: Q,
    pub certified: bool,
}

impl Multiplicity {
    pub fn of(splits: &[SplitInfo]) -> Self {
        let mut m = Multiplicity { lo: Q::from_integer(0), hi: Q::from_integer(0), certified: true };
        for s in splits {
            m.lo += s.m1.lo;
            m.hi += s.m1.hi;
            m.certified &= s.m1.certified;
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicClass {
    /// trace normalized so that iota_0(t) > 2
    pub t: FieldElement,
    pub d: FieldElement,
    pub iota0: f64,
    pub iota1: f64,
    pub length: f64,
    /// |theta| in (0, pi)
    pub folded_angle: f64,
    /// power index in O_K[alpha]
    pub q: u32,
    pub primitive_length: f64,
    pub splits: Vec<SplitInfo>,
    pub multiplicity: Multiplicity,
}

impl GeodesicClass {
    /// Primitive length attached to one split.
    pub fn split_primitive_length(&self, s: &SplitInfo) -> f64 {
        self.length / s.q.unwrap_or(self.q) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticClass {
    pub t: FieldElement,
    pub iota: [f64; 2],
    /// folded rotation angles at both places, in (0, pi]
    pub angles: [f64; 2],
    pub splits: Vec<SplitInfo>,
    pub multiplicity: Multiplicity,
}

impl EllipticClass {
    /// Sum over splits of m^1 * 2 / #O^1 (lower ends of the intervals).
    pub fn weighted_count(&self) -> f64 {
        self.splits
            .iter()
            .filter(|s| s.realized)
            .map(|s| q_f64(&s.m1.lo) * 2.0 / s.torsion.unwrap_or(2) as f64)
            .sum()
    }
}

pub fn q_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Length l with |iota_0(t)| = 2 cosh(l/2), via iota_0(D) to avoid cancellation.
pub fn length_from(t0: f64, d0: f64) -> f64 {
    2.0 * ((t0.abs() + d0.max(0.0).sqrt()) / 2.0).ln()
}

/// theta with |iota(t)| = 2 cos(theta/2), theta in (0, pi], via iota(D) < 0.
pub fn angle_from(t1: f64, d1: f64) -> f64 {
    2.0 * (-d1).max(0.0).sqrt().atan2(t1.abs())
}

/// Hyperbolic-elliptic traces with length <= x, modulo sign.
pub fn enumerate_traces(field: &BaseField, x: f64) -> Result<Vec<FieldElement>> {
    if !(x > 0.0) {
        return Err(Error::pre("length cutoff must be positive"));
    }
    Ok(hyperbolic_elliptic_traces(field, 2.0 * (x / 2.0).cosh()))
}

/// Traces with |iota_j(t)| < 2 at both places, modulo sign.
pub fn enumerate_elliptic_traces(field: &BaseField) -> Vec<FieldElement> {
    let mut out: Vec<FieldElement> = field
        .elements_in_box(2.0, 2.0)
        .into_iter()
        .filter(|t| (0..2).all(|j| field.cmp_abs_at(t, j, 2.0) == Ordering::Less))
        .map(|t| normalize_sign(field, &t))
        .collect();
    out.sort_by(|a, b| {
        let ea = field.embed_both(a);
        let eb = field.embed_both(b);
        ea[0].partial_cmp(&eb[0]).unwrap_or(Ordering::Equal).then(a.cmp(b))
    });
    out.dedup();
    out
}

/// Representative of {t, -t}: iota_0 > 0, or iota_0 = 0 and iota_1 >= 0.
pub fn normalize_sign(field: &BaseField, t: &FieldElement) -> FieldElement {
    let s0 = field.sign_at(t, 0);
    if s0 < 0 || (s0 == 0 && field.sign_at(t, 1) < 0) {
        -*t
    } else {
        *t
    }
}

fn split_orders(field: &BaseField, d: &FieldElement) -> Result<Vec<(IdealK, Option<RelativeQuadraticOrder>)>> {
    let splits = field.square_divisor_splits(d)?;
    splits
        .iter()
        .map(|s| Ok((s.d, RelativeQuadraticOrder::from_split(field, d, s, &splits)?)))
        .collect()
}

/// q with alpha = eps^q, checked exactly.
fn power_index(o: &RelativeQuadraticOrder, t: &FieldElement, units: &UnitData) -> Result<(u32, FieldElement)> {
    let eps = units.eps.ok_or_else(|| Error::Inconsistent("no relative unit".into()))?;
    let reg = units.reg.expect("set with eps");
    let mut alpha = o.trace_element(t).ok_or_else(|| Error::Inconsistent(format!("(t + sqrt D)/2 not in {o}")))?;
    if o.iota0(&alpha) < 1.0 {
        alpha = o.conj(&alpha);
    }
    let q = (o.iota0(&alpha).ln() / reg).round();
    if !(1.0..4096.0).contains(&q) {
        return Err(Error::Inconsistent(format!("power index {q} out of range for t = {t}")));
    }
    let q = q as u32;
    let mut p = OElem::ONE;
    for _ in 0..q {
        p = o.mul(&p, &eps);
    }
    if p != alpha {
        return Err(Error::Inconsistent(format!("alpha is not eps^{q} for t = {t}")));
    }
    Ok((q, o.rel_trace(&eps)))
}

fn classify_splits(
    spec: &LatticeSpec,
    t: &FieldElement,
    d: &FieldElement,
    hyperbolic: bool,
    provider: ClassProvider<'_>,
    bounds: &Bounds,
) -> Result<Vec<SplitInfo>> {
    let mut out = Vec::new();
    for (dd, o) in split_orders(&spec.field, d)? {
        let Some(o) = o else {
            out.push(SplitInfo::unrealized(dd));
            continue;
        };
        let units = relative_fundamental_unit(&o, bounds)?;
        let class = provider(&o, &units)?;
        let (q, tp) = if hyperbolic {
            let (q, tp) = power_index(&o, t, &units)?;
            (Some(q), Some(tp))
        } else {
            (None, None)
        };
        out.push(SplitInfo {
            d: dd,
            realized: true,
            m1: m1(&o, &class, spec)?,
            q,
            primitive_trace: tp,
            torsion: Some(units.torsion),
            class: Some(class),
        });
    }
    Ok(out)
}

/// All data of the hyperbolic-elliptic class of trace t.
pub fn classify_trace(
    spec: &LatticeSpec,
    t: &FieldElement,
    provider: ClassProvider<'_>,
    bounds: &Bounds,
) -> Result<GeodesicClass> {
    let f = &spec.field;
    let t = normalize_sign(f, t);
    let d = f.mul(&t, &t) - FieldElement::int(4, 0);
    if d.is_zero() {
        return Err(Error::pre("t = +-2 is parabolic"));
    }
    if f.cmp_abs_at(&t, 0, 2.0) != Ordering::Greater || f.cmp_abs_at(&t, 1, 2.0) != Ordering::Less {
        return Err(Error::pre(format!("t = {t} is not hyperbolic-elliptic")));
    }
    let splits = classify_splits(spec, &t, &d, true, provider, bounds)?;
    Ok(GeodesicClass::assemble(f, t, splits))
}

impl GeodesicClass {
    /// Lengths, angles and the row-level power index from a normalized
    /// hyperbolic-elliptic trace and its split data.
    pub fn assemble(f: &BaseField, t: FieldElement, splits: Vec<SplitInfo>) -> Self {
        let d = f.mul(&t, &t) - FieldElement::int(4, 0);
        let [t0, t1] = f.embed_both(&t);
        let [d0, d1] = f.embed_both(&d);
        let length = length_from(t0, d0);
        // O_K[alpha] is the split with d = (D)
        let dd = f.principal(&d);
        let q = splits.iter().find(|s| s.d == dd).and_then(|s| s.q).unwrap_or(1);
        GeodesicClass {
            t,
            d,
            iota0: t0,
            iota1: t1,
            length,
            folded_angle: angle_from(t1, d1),
            q,
            primitive_length: length / q as f64,
            multiplicity: Multiplicity::of(&splits),
            splits,
        }
    }
}

/// Classes with length <= x, sorted by length.
pub fn length_spectrum(
    spec: &LatticeSpec,
    x: f64,
    provider: ClassProvider<'_>,
    bounds: &Bounds,
) -> Result<Vec<GeodesicClass>> {
    enumerate_traces(&spec.field, x)?.iter().map(|t| classify_trace(spec, t, provider, bounds)).collect()
}

pub fn classify_elliptic(
    spec: &LatticeSpec,
    t: &FieldElement,
    provider: ClassProvider<'_>,
    bounds: &Bounds,
) -> Result<EllipticClass> {
    let f = &spec.field;
    let t = normalize_sign(f, t);
    let d = f.mul(&t, &t) - FieldElement::int(4, 0);
    let splits = classify_splits(spec, &t, &d, false, provider, bounds)?;
    Ok(EllipticClass::assemble(f, t, splits))
}

impl EllipticClass {
    pub fn assemble(f: &BaseField, t: FieldElement, splits: Vec<SplitInfo>) -> Self {
        let d = f.mul(&t, &t) - FieldElement::int(4, 0);
        let iota = f.embed_both(&t);
        let de = f.embed_both(&d);
        EllipticClass {
            t,
            iota,
            angles: [angle_from(iota[0], de[0]), angle_from(iota[1], de[1])],
            multiplicity: Multiplicity::of(&splits),
            splits,
        }
    }
}

pub fn enumerate_elliptic(
    spec: &LatticeSpec,
    provider: ClassProvider<'_>,
    bounds: &Bounds,
) -> Result<Vec<EllipticClass>> {
    enumerate_elliptic_traces(&spec.field).iter().map(|t| classify_elliptic(spec, t, provider, bounds)).collect()
}
