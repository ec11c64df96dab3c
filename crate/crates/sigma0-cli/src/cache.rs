//! Append-only JSON-lines cache of class data, keyed by (m, D mod unit
//! squares, HNF of d).

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sigma0::orders::{class_data, Bounds, ClassData, ClassNumber, RelativeQuadraticOrder, UnitData, UnitIndex};

pub struct ClassCache {
    bounds: Bounds,
    records: Mutex<HashMap<String, (ClassData, Bounds)>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

fn key(o: &RelativeQuadraticOrder) -> String {
    let k = o.key();
    let h = k.d_hnf.h;
    format!("{}|{}|[[{},{}],[0,{}]]", k.m, k.d.to_text(), h[0][0], h[0][1], h[1][1])
}

fn bounds_json(b: &Bounds) -> Value {
    json!({ "unit_height": b.unit_height, "ideal_norm_cap": b.ideal_norm_cap, "node_limit": b.node_limit })
}

fn record(o: &RelativeQuadraticOrder, c: &ClassData, u: &UnitData, b: &Bounds) -> Value {
    let k = o.key();
    let h = &k.d_hnf.h;
    let (ui, ui_bound) = match c.unit_index {
        UnitIndex::Known(v) => (json!(v), Value::Null),
        UnitIndex::Unknown { bound } => (json!("UNKNOWN"), json!(bound)),
    };
    json!({
        "field_m": k.m as i64,
        "D": k.d.to_text(),
        "d_hnf": [[h[0][0] as i64, h[0][1] as i64], [h[1][0] as i64, h[1][1] as i64]],
        "h_O": c.h_o.value,
        "h_values": c.h_o.values,
        "oracle_bounds": c.h_o.bounds,
        "certified": c.h_o.certified,
        "unit_index": ui,
        "unit_index_bound": ui_bound,
        "reg": u.reg,
        "torsion": u.torsion,
        "search": bounds_json(b),
    })
}

fn parse_record(v: &Value) -> Option<(String, ClassData, Bounds)> {
    let d = v.get("d_hnf")?.as_array()?;
    let row = |i: usize| -> Option<(i64, i64)> {
        let r = d.get(i)?.as_array()?;
        Some((r.first()?.as_i64()?, r.get(1)?.as_i64()?))
    };
    let (a, b) = row(0)?;
    let (_, c) = row(1)?;
    let k = format!("{}|{}|[[{a},{b}],[0,{c}]]", v.get("field_m")?.as_i64()?, v.get("D")?.as_str()?);
    let values = v.get("h_values")?.as_array()?;
    let bounds = v.get("oracle_bounds")?.as_array()?;
    let h_o = ClassNumber {
        value: v.get("h_O")?.as_u64()?,
        values: [values.first()?.as_u64()?, values.get(1)?.as_u64()?],
        bounds: [bounds.first()?.as_f64()?, bounds.get(1)?.as_f64()?],
        certified: v.get("certified")?.as_bool()?,
    };
    let unit_index = match v.get("unit_index")? {
        Value::String(_) => UnitIndex::Unknown { bound: v.get("unit_index_bound")?.as_u64()? },
        n => UnitIndex::Known(n.as_u64()? as u8),
    };
    let s = v.get("search")?;
    let search = Bounds {
        unit_height: s.get("unit_height")?.as_f64()?,
        ideal_norm_cap: s.get("ideal_norm_cap")?.as_f64()?,
        node_limit: s.get("node_limit")?.as_u64()?,
    };
    Some((k, ClassData { h_o, unit_index }, search))
}

impl ClassCache {
    pub fn open(path: Option<&Path>, bounds: Bounds) -> Result<Self> {
        let mut records = HashMap::new();
        let mut file = None;
        if let Some(p) = path {
            if p.exists() {
                let f = File::open(p).with_context(|| format!("opening cache {}", p.display()))?;
                for line in BufReader::new(f).lines() {
                    let line = line?;
                    // a torn trailing line from an interrupted run is skipped
                    let Ok(v) = serde_json::from_str::<Value>(&line) else { continue };
                    if let Some((k, c, b)) = parse_record(&v) {
                        records.insert(k, (c, b));
                    }
                }
            }
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .with_context(|| format!("opening cache {} for append", p.display()))?;
            file = Some(Mutex::new(f));
        }
        Ok(ClassCache { bounds, records: Mutex::new(records), file, path: path.map(Path::to_path_buf) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cached class data when certified or computed under the same bounds,
    /// else computed and appended.
    pub fn get(&self, o: &RelativeQuadraticOrder, u: &UnitData) -> sigma0::Result<ClassData> {
        let k = key(o);
        if let Some((c, b)) = self.records.lock().expect("cache lock").get(&k) {
            let exact = c.h_o.certified && matches!(c.unit_index, UnitIndex::Known(_));
            if exact || *b == self.bounds {
                return Ok(c.clone());
            }
        }
        let c = class_data(o, u, &self.bounds)?;
        if let Some(f) = &self.file {
            let mut line = record(o, &c, u, &self.bounds).to_string();
            line.push('\n');
            let mut f = f.lock().expect("cache file lock");
            f.write_all(line.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| sigma0::Error::Unsupported(format!("cache write failed: {e}")))?;
        }
        self.records.lock().expect("cache lock").insert(k, (c.clone(), self.bounds.clone()));
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sigma0::orders::relative_fundamental_unit;
    use sigma0::{BaseField, FieldElement};

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cache.jsonl");
        let k = BaseField::new(2).unwrap();
        let d = FieldElement::int(-1, 2);
        let o = RelativeQuadraticOrder::build(&k, &d, &k.principal(&d)).unwrap();
        let b = Bounds::default();
        let u = relative_fundamental_unit(&o, &b).unwrap();
        let first = ClassCache::open(Some(&p), b.clone()).unwrap();
        let a = first.get(&o, &u).unwrap();
        drop(first);
        let second = ClassCache::open(Some(&p), b.clone()).unwrap();
        assert_eq!(second.len(), 1);
        assert_eq!(second.get(&o, &u).unwrap(), a);
        // a hit appends nothing
        let lines = std::fs::read_to_string(&p).unwrap().lines().count();
        assert_eq!(lines, 1);
    }
}
