//! Counting and equidistribution statistics of a geodesic table against
//! their asymptotic main terms, and the geometric side of the hybrid trace
//! formula.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::beurling::{rect_majorant, RectMeta, Side};
use crate::field::BaseField;
use crate::geodesics::{q_f64, EllipticClass, GeodesicClass, SplitInfo};
use crate::mu::{eval_fm, mu_rect, mu_trig, AngleVector, TrigFunction, WeightIndex};
use crate::quad::Quadrature;
use crate::testfn::TestFunction;
use crate::{Error, Result};

pub const LI_CONVENTION: &str = "Li(x) = integral from 2 to x of dt/log t";
pub const DEGREE_TWO_CAVEAT: &str =
    "empirical extension: for a real quadratic base field the quotient is not compact";

/// Hyperbolic-elliptic classes of length <= x for one lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicTable {
    pub x: f64,
    /// number of elliptic factors
    pub n: u32,
    pub classes: Vec<GeodesicClass>,
}

impl GeodesicTable {
    pub fn new(x: f64, n: u32, classes: Vec<GeodesicClass>) -> Self {
        GeodesicTable { x, n, classes }
    }

    /// The table cut at x' <= x.
    pub fn truncate(&self, x: f64) -> GeodesicTable {
        let classes = self.classes.iter().filter(|c| c.length <= x).cloned().collect();
        GeodesicTable { x: x.min(self.x), n: self.n, classes }
    }

    fn covers(&self, x: f64) -> Result<()> {
        if x > self.x * (1.0 + 1e-12) {
            return Err(Error::pre(format!("table covers lengths up to {} but {x} was requested", self.x)));
        }
        Ok(())
    }

    pub fn uncertified(&self) -> usize {
        self.classes.iter().filter(|c| !c.multiplicity.certified).count()
    }

    /// (class, split) pairs of realized splits.
    fn splits(&self) -> impl Iterator<Item = (&GeodesicClass, &SplitInfo)> {
        self.classes.iter().flat_map(|c| c.splits.iter().filter(|s| s.realized).map(move |s| (c, s)))
    }
}

/// Li(x) = int_2^x dt / log t.
pub fn li(x: f64) -> Result<f64> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::pre(format!("li needs x >= 2, got {x}")));
    }
    // t = e^s; integrate e^s / s in unit pieces of s
    let q = Quadrature::default();
    let (a, b) = (2f64.ln(), x.ln());
    let mut s = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = (lo + 1.0).min(b);
        s += q.integrate(|v| v.exp() / v, lo, hi, 1e-14);
        lo = hi;
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub x: f64,
    /// value from lower multiplicities
    pub value: f64,
    /// value from upper multiplicities (equal to `value` when certified)
    pub value_hi: f64,
    pub main: f64,
    /// value / main; absent when the main term vanishes
    pub ratio: Option<f64>,
}

impl ReportRow {
    fn new(x: f64, value: f64, value_hi: f64, main: f64) -> Self {
        let ratio = (main != 0.0).then(|| value / main);
        ReportRow { x, value, value_hi, main, ratio }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub name: String,
    pub main_term: String,
    pub rows: Vec<ReportRow>,
    pub notes: Vec<(String, String)>,
}

fn sorted_grid(grid: &[f64]) -> Vec<f64> {
    let mut g = grid.to_vec();
    g.sort_by(|a, b| a.total_cmp(b));
    g.dedup();
    g
}

fn notes(table: &GeodesicTable, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut v = vec![
        ("li_convention".to_string(), LI_CONVENTION.to_string()),
        ("counting".to_string(), "folded: one row per pair {C, C^-1}, weighted by m1".to_string()),
        ("uncertified_rows".to_string(), format!("{}", table.uncertified())),
    ];
    if table.n == 1 {
        v.push(("caveat".to_string(), DEGREE_TWO_CAVEAT.to_string()));
    }
    for (k, val) in extra {
        v.push((k.to_string(), val.clone()));
    }
    v
}

/// pi_p(x) (or pi(x) with `all_classes`) against 2^n Li(e^x).
pub fn pgt_report(table: &GeodesicTable, grid: &[f64], all_classes: bool) -> Result<ComparisonReport> {
    let grid = sorted_grid(grid);
    let n = table.n as i32;
    let mut rows = Vec::new();
    for &x in &grid {
        table.covers(x)?;
        let (mut lo, mut hi) = (0.0, 0.0);
        for (c, s) in table.splits() {
            if c.length <= x && (all_classes || s.q == Some(1)) {
                lo += q_f64(&s.m1.lo);
                hi += q_f64(&s.m1.hi);
            }
        }
        rows.push(ReportRow::new(x, lo, hi, 2f64.powi(n) * li(x.exp())?));
    }
    let name = if all_classes { "pi" } else { "pi_p" };
    Ok(ComparisonReport {
        name: name.into(),
        main_term: "2^n Li(e^x)".into(),
        rows,
        notes: notes(table, &[("rate", "error O(e^{3x/4}) and spectral-gap exponents: annotation only".into())]),
    })
}

/// Theta(x) = sum over classes of l_p / (2 sinh(l/2)) against 2^{n+1} e^{x/2}.
pub fn theta_report(table: &GeodesicTable, grid: &[f64]) -> Result<ComparisonReport> {
    let grid = sorted_grid(grid);
    let n = table.n as i32;
    let mut rows = Vec::new();
    for &x in &grid {
        table.covers(x)?;
        let (mut lo, mut hi) = (0.0, 0.0);
        for (c, s) in table.splits() {
            if c.length <= x {
                let w = c.split_primitive_length(s) / (2.0 * (c.length / 2.0).sinh());
                lo += q_f64(&s.m1.lo) * w;
                hi += q_f64(&s.m1.hi) * w;
            }
        }
        rows.push(ReportRow::new(x, lo, hi, 2f64.powi(n + 1) * (x / 2.0).exp()));
    }
    Ok(ComparisonReport {
        name: "theta".into(),
        main_term: "2^{n+1} e^{x/2}".into(),
        rows,
        notes: notes(table, &[("rate", "error O(e^{x/4})".into())]),
    })
}

/// (f(theta) + f(-theta)) / 2, real part.
pub fn symmetrized(f: &TrigFunction, theta: &[f64]) -> f64 {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    0.5 * (f.eval(theta).re + f.eval(&neg).re)
}

/// Average of f over primitive classes of length <= x against mu(f).
pub fn equi_report(table: &GeodesicTable, f: &TrigFunction, grid: &[f64]) -> Result<ComparisonReport> {
    if f.dim() != table.n as usize {
        return Err(Error::pre(format!("target has {} angles, classes have {}", f.dim(), table.n)));
    }
    let grid = sorted_grid(grid);
    let main = mu_trig(f).re;
    let mut rows = Vec::new();
    for &x in &grid {
        table.covers(x)?;
        let (mut count, mut sum) = (0.0, 0.0);
        for (c, s) in table.splits() {
            if c.length <= x && s.q == Some(1) {
                let w = q_f64(&s.m1.lo);
                count += w;
                sum += w * symmetrized(f, &[c.folded_angle]);
            }
        }
        let v = if count > 0.0 { sum / count } else { 0.0 };
        rows.push(ReportRow::new(x, v, v, main));
    }
    Ok(ComparisonReport {
        name: "equidistribution".into(),
        main_term: "mu(f)".into(),
        rows,
        notes: notes(table, &[("evaluation", "f symmetrized under theta -> -theta (folded angles)".into())]),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichRow {
    pub x: f64,
    pub count: f64,
    pub minorant: f64,
    pub frequency: f64,
    pub majorant: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub rect: Vec<(f64, f64)>,
    pub symmetrized: bool,
    pub mu: f64,
    pub majorant: RectMeta,
    pub minorant: RectMeta,
    pub rows: Vec<SandwichRow>,
    pub notes: Vec<(String, String)>,
}

impl SandwichReport {
    pub fn width(&self, row: &SandwichRow) -> f64 {
        row.majorant - row.minorant
    }

    pub fn brackets(&self, row: &SandwichRow) -> bool {
        row.minorant <= self.mu && self.mu <= row.majorant
    }
}

/// Frequency of folded angles in a rectangle, bracketed by the averages of
/// its Beurling-Selberg minorant and majorant of degree N.
pub fn equi_rect_report(
    table: &GeodesicTable,
    rect: &[(f64, f64)],
    degree: usize,
    grid: &[f64],
    symmetrize: bool,
) -> Result<SandwichReport> {
    if rect.len() != table.n as usize {
        return Err(Error::pre(format!("rectangle has {} sides, classes have {} angles", rect.len(), table.n)));
    }
    let symmetric = rect.iter().all(|&(lo, hi)| (lo + hi).abs() <= 1e-12 * (hi - lo).abs().max(1.0));
    if !symmetric && !symmetrize {
        return Err(Error::pre("rectangle is not symmetric under sign changes; folded angles cannot resolve it (pass symmetrize)"));
    }
    let (up, up_meta) = rect_majorant(rect, degree, Side::Majorant)?;
    let (down, down_meta) = rect_majorant(rect, degree, Side::Minorant)?;
    let inside = |th: f64| -> f64 {
        let one = |t: f64| rect.iter().all(|&(lo, hi)| lo <= t && t <= hi);
        0.5 * (one(th) as u8 as f64 + one(-th) as u8 as f64)
    };
    let mut rows = Vec::new();
    for &x in &sorted_grid(grid) {
        table.covers(x)?;
        let mut r = SandwichRow { x, count: 0.0, minorant: 0.0, frequency: 0.0, majorant: 0.0 };
        for (c, s) in table.splits() {
            if c.length <= x && s.q == Some(1) {
                let w = q_f64(&s.m1.lo);
                let th = [c.folded_angle];
                r.count += w;
                r.minorant += w * symmetrized(&down, &th);
                r.majorant += w * symmetrized(&up, &th);
                r.frequency += w * inside(c.folded_angle);
            }
        }
        if r.count > 0.0 {
            r.minorant /= r.count;
            r.majorant /= r.count;
            r.frequency /= r.count;
        }
        rows.push(r);
    }
    Ok(SandwichReport {
        rect: rect.to_vec(),
        symmetrized: !symmetric,
        mu: mu_rect(rect)?,
        majorant: up_meta,
        minorant: down_meta,
        rows,
        notes: notes(table, &[("rate", "deviation of mu(S) from mu(A): stated n/(N+1), provable 2n/(N+1)".into())]),
    })
}

/// Weighted count of pairs (D, d) with iota_0(eps_{D,d}) <= T against
/// 2^{[K:Q]-2} Li(T^2) mu(f).
pub fn units_report(table: &GeodesicTable, t_max: f64, f: &TrigFunction) -> Result<ComparisonReport> {
    if !f.is_sign_invariant(1e-12) {
        return Err(Error::pre("units report needs a sign-invariant target"));
    }
    if !(t_max > 1.0) {
        return Err(Error::pre("T must exceed 1"));
    }
    let x = 2.0 * t_max.ln();
    table.covers(x)?;
    let (mut lo, mut hi) = (0.0, 0.0);
    for (c, s) in table.splits() {
        // iota_0(eps) = e^{l_p / 2} and primitive classes have l_p = l
        if s.q == Some(1) && c.length <= x {
            let v = symmetrized(f, &[c.folded_angle]);
            lo += q_f64(&s.m1.lo) * v;
            hi += q_f64(&s.m1.hi) * v;
        }
    }
    let degree = table.n as i32 + 1;
    let main = if t_max * t_max >= 2.0 { 2f64.powi(degree - 2) * li(t_max * t_max)? * mu_trig(f).re } else { 0.0 };
    Ok(ComparisonReport {
        name: "units".into(),
        main_term: "2^{[K:Q]-2} Li(T^2) mu(f)".into(),
        rows: vec![ReportRow::new(t_max, lo, hi, main)],
        notes: notes(table, &[("length_cutoff", format!("{x}"))]),
    })
}

/// Geometric side of the sign-summed hybrid trace formula.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricSide {
    pub identity: f64,
    pub hyperbolic: f64,
    pub elliptic: f64,
    pub total: f64,
}

/// sum over classes and splits of m1 l_p h-hat(l) / (2 sinh(l/2)).
pub fn theta_weighted(table: &GeodesicTable, tf: &TestFunction) -> f64 {
    table
        .splits()
        .map(|(c, s)| q_f64(&s.m1.lo) * c.split_primitive_length(s) * tf.hat(c.length) / (2.0 * (c.length / 2.0).sinh()))
        .sum()
}

pub fn geometric_side(
    table: &GeodesicTable,
    elliptic: &[EllipticClass],
    m: &WeightIndex,
    tf: &TestFunction,
    vol: f64,
) -> Result<GeometricSide> {
    let n = table.n as i32;
    if m.dim() != table.n as usize || !m.is_positive() {
        return Err(Error::pre(format!("weight must be a positive vector of length {n}")));
    }
    if !(vol > 0.0) {
        return Err(Error::pre("volume must be positive"));
    }
    if tf.support() > table.x {
        return Err(Error::pre(format!(
            "test function support {} exceeds the table's length coverage {}",
            tf.support(),
            table.x
        )));
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let identity =
        2f64.powi(n) * m.m_star() as f64 * vol / (4.0 * PI).powi(n + 1) * tf.identity_integral();
    let mut hyp = 0.0;
    for (c, s) in table.splits() {
        let l = c.length;
        let fm = eval_fm(m, &AngleVector::new(&[c.folded_angle]))?;
        hyp += q_f64(&s.m1.lo) * c.split_primitive_length(s) * tf.hat(l) / (2.0 * (l / 2.0).sinh()) * fm;
    }
    let mut ell = 0.0;
    for e in elliptic {
        let kernel = tf.elliptic_kernel(e.angles[0]);
        let fm = eval_fm(m, &AngleVector::new(&e.angles[1..]))?;
        for s in e.splits.iter().filter(|s| s.realized) {
            let weight = 2.0 / s.torsion.unwrap_or(2) as f64;
            ell += q_f64(&s.m1.lo) * weight * kernel * fm;
        }
    }
    let (hyperbolic, elliptic) = (sign * hyp, sign * ell);
    Ok(GeometricSide { identity, hyperbolic, elliptic, total: identity + hyperbolic + elliptic })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignInvarianceReport {
    pub m: i128,
    pub narrow_equals_class: bool,
    pub guaranteed: Vec<Vec<i8>>,
    pub statement: String,
}

/// Which sign changes of the holonomy angles leave the statistics invariant,
/// as implied by h_K = h_K^+.
pub fn sign_invariance_report(field: &BaseField) -> SignInvarianceReport {
    let sd = field.sign_data();
    let statement = if sd.narrow_equals_class {
        "GUARANTEED: invariant under all sign changes (h_K = h_K^+)".to_string()
    } else {
        "only time reversal sigma = (-1,...,-1) is guaranteed (h_K != h_K^+)".to_string()
    };
    SignInvarianceReport {
        m: field.m,
        narrow_equals_class: sd.narrow_equals_class,
        guaranteed: sd.guaranteed_sign_changes,
        statement,
    }
}
