//! Geodesic tables on disk: one CSV row per class plus a `.meta.json`
//! sidecar with the lattice, the run configuration and the elliptic classes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};
use sigma0::field::{parse_ideal, IdealK};
use sigma0::geodesics::{q_f64, EllipticClass, GeodesicClass, SplitInfo};
use sigma0::orders::{LatticeSpec, M1, Q};
use sigma0::stats::GeodesicTable;
use sigma0::{BaseField, FieldElement};

use crate::report::num;

pub const COLUMNS: [&str; 13] = [
    "t_a",
    "t_b",
    "iota0",
    "iota1",
    "length",
    "folded_angle",
    "q",
    "primitive_length",
    "num_splits",
    "multiplicity_lo",
    "multiplicity_hi",
    "certified",
    "splits",
];

/// Everything an enumeration run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub spec: LatticeSpec,
    pub table: GeodesicTable,
    pub elliptic: Vec<EllipticClass>,
}

pub fn meta_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn rational(q: &Q) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn parse_rational(s: &str) -> Result<Q> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let d: i128 = d.parse()?;
    if d == 0 {
        bail!("zero denominator in {s:?}");
    }
    Ok(Q::new(n.parse()?, d))
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_else(|| "-".into())
}

/// `d:m1_lo:m1_hi:q:primitive_trace:torsion:realized:certified` with the
/// ideal written `a;b;c` for the HNF `[[a,b],[0,c]]`.
pub fn split_text(s: &SplitInfo) -> String {
    let h = s.d.h;
    format!(
        "{};{};{}:{}:{}:{}:{}:{}:{}:{}",
        h[0][0],
        h[0][1],
        h[1][1],
        rational(&s.m1.lo),
        rational(&s.m1.hi),
        opt(&s.q),
        s.primitive_trace.map(|t| t.to_text()).unwrap_or_else(|| "-".into()),
        opt(&s.torsion),
        s.realized,
        s.m1.certified
    )
}

pub fn parse_split(s: &str) -> Result<SplitInfo> {
    let f: Vec<&str> = s.split(':').collect();
    if f.len() != 8 {
        bail!("split {s:?} has {} fields, expected 8", f.len());
    }
    let h: Vec<i128> = f[0].split(';').map(str::parse).collect::<Result<_, _>>()?;
    if h.len() != 3 {
        bail!("split ideal {:?} needs 3 entries", f[0]);
    }
    let none = |v: &str| v == "-";
    Ok(SplitInfo {
        d: IdealK { h: [[h[0], h[1]], [0, h[2]]] },
        realized: f[6].parse()?,
        m1: M1 { lo: parse_rational(f[1])?, hi: parse_rational(f[2])?, certified: f[7].parse()? },
        q: if none(f[3]) { None } else { Some(f[3].parse()?) },
        primitive_trace: if none(f[4]) { None } else { Some(FieldElement::parse(f[4])?) },
        torsion: if none(f[5]) { None } else { Some(f[5].parse()?) },
        class: None,
    })
}

fn splits_text(splits: &[SplitInfo]) -> String {
    splits.iter().map(split_text).collect::<Vec<_>>().join("|")
}

fn parse_splits(s: &str) -> Result<Vec<SplitInfo>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split('|').map(parse_split).collect()
}

pub fn row(c: &GeodesicClass) -> Vec<String> {
    vec![
        c.t.a.to_string(),
        c.t.b.to_string(),
        num(c.iota0),
        num(c.iota1),
        num(c.length),
        num(c.folded_angle),
        c.q.to_string(),
        num(c.primitive_length),
        c.splits.len().to_string(),
        num(q_f64(&c.multiplicity.lo)),
        num(q_f64(&c.multiplicity.hi)),
        c.multiplicity.certified.to_string(),
        splits_text(&c.splits),
    ]
}

pub fn write_csv(w: impl std::io::Write, classes: &[GeodesicClass]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(COLUMNS)?;
    for c in classes {
        out.write_record(row(c))?;
    }
    out.flush()?;
    Ok(())
}

fn meta(e: &Enumeration, config: &Value, digest: &str) -> Value {
    let f = &e.spec.field;
    json!({
        "config": config,
        "config_digest": digest,
        "m": f.m as i64,
        "x": e.table.x,
        "n": e.table.n,
        "ram_f": e.spec.ram_f.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "r_a": e.spec.r_a,
        "vol": e.spec.vol,
        "classes": e.table.classes.len(),
        "uncertified": e.table.uncertified(),
        "elliptic": e.elliptic.iter().map(|c| json!({
            "t": c.t.to_text(),
            "splits": c.splits.iter().map(split_text).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

/// Writes `path` and its sidecar.
pub fn save(path: &Path, e: &Enumeration, config: &Value, digest: &str) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(&mut buf, &e.table.classes)?;
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    let m = meta_path(path);
    let text = serde_json::to_string_pretty(&meta(e, config, digest))? + "\n";
    fs::write(&m, text).with_context(|| format!("writing {}", m.display()))?;
    Ok(())
}

fn field_of<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| anyhow!("table metadata lacks '{k}'"))
}

pub fn load(path: &Path) -> Result<Enumeration> {
    let m = meta_path(path);
    let text = fs::read_to_string(&m).with_context(|| format!("reading {}", m.display()))?;
    let meta: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", m.display()))?;
    let field = BaseField::new(field_of(&meta, "m")?.as_i64().ok_or_else(|| anyhow!("m is not an integer"))? as i128)?;
    let ram_f = field_of(&meta, "ram_f")?
        .as_array()
        .ok_or_else(|| anyhow!("ram_f is not a list"))?
        .iter()
        .map(|p| Ok(parse_ideal(p.as_str().ok_or_else(|| anyhow!("ram_f entry is not a string"))?)?))
        .collect::<Result<Vec<_>>>()?;
    let r_a = field_of(&meta, "r_a")?.as_u64().ok_or_else(|| anyhow!("r_a is not an integer"))? as u32;
    let vol = field_of(&meta, "vol")?.as_f64();
    let x = field_of(&meta, "x")?.as_f64().ok_or_else(|| anyhow!("x is not a number"))?;
    let spec = LatticeSpec::new(field, ram_f, r_a, vol)?;
    let f = &spec.field;

    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(COLUMNS) {
        bail!("{} does not have the geodesic table header", path.display());
    }
    let mut classes = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let ctx = || format!("{} row {}", path.display(), i + 2);
        let t = FieldElement::int(rec[0].parse().with_context(ctx)?, rec[1].parse().with_context(ctx)?);
        let splits = parse_splits(&rec[12]).with_context(ctx)?;
        classes.push(GeodesicClass::assemble(f, t, splits));
    }
    let elliptic = field_of(&meta, "elliptic")?
        .as_array()
        .ok_or_else(|| anyhow!("elliptic is not a list"))?
        .iter()
        .map(|e| {
            let t = FieldElement::parse(e.get("t").and_then(Value::as_str).ok_or_else(|| anyhow!("elliptic t"))?)?;
            let splits = e
                .get("splits")
                .and_then(Value::as_array)
                .ok_or_else(|| anyhow!("elliptic splits"))?
                .iter()
                .map(|s| parse_split(s.as_str().ok_or_else(|| anyhow!("split is not a string"))?))
                .collect::<Result<Vec<_>>>()?;
            Ok(EllipticClass::assemble(f, t, splits))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = spec.n();
    Ok(Enumeration { table: GeodesicTable::new(x, n, classes), spec, elliptic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sigma0::orders::Q;

    fn split() -> SplitInfo {
        SplitInfo {
            d: IdealK { h: [[2, 0], [0, 1]] },
            realized: true,
            m1: M1 { lo: Q::new(1, 2), hi: Q::from_integer(4), certified: false },
            q: Some(2),
            primitive_trace: Some(FieldElement::int(1, 1)),
            torsion: Some(4),
            class: None,
        }
    }

    #[test]
    fn split_round_trip() {
        let s = split();
        let text = split_text(&s);
        assert_eq!(text, "2;0;1:1/2:4:2:1+1*w:4:true:false");
        assert_eq!(parse_split(&text).unwrap(), s);
        let u = SplitInfo { realized: false, m1: M1::zero(), q: None, primitive_trace: None, torsion: None, ..s };
        assert_eq!(parse_split(&split_text(&u)).unwrap(), u);
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), COLUMNS.join(",") + "\n");
    }

    #[test]
    fn rejects_malformed_split() {
        assert!(parse_split("2;0;1:1:1").is_err());
        assert!(parse_split("2;0:1:1:-:-:-:true:true").is_err());
    }
}
