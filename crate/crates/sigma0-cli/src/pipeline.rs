//! Parallel classification of trace sets through the class cache.

use rayon::prelude::*;
use sigma0::geodesics::{classify_elliptic, classify_trace, enumerate_elliptic_traces, enumerate_traces};
use sigma0::orders::{Bounds, ClassData, LatticeSpec, RelativeQuadraticOrder, UnitData};
use sigma0::stats::GeodesicTable;
use sigma0::Result;

use crate::cache::ClassCache;
use crate::table::Enumeration;

/// Hyperbolic-elliptic classes of length <= x and all elliptic classes.
pub fn enumerate(spec: &LatticeSpec, x: f64, cache: &ClassCache, bounds: &Bounds) -> Result<Enumeration> {
    let provider = |o: &RelativeQuadraticOrder, u: &UnitData| -> Result<ClassData> { cache.get(o, u) };
    let traces = enumerate_traces(&spec.field, x)?;
    // collect keeps trace order, so the table does not depend on scheduling
    let classes = traces.par_iter().map(|t| classify_trace(spec, t, &provider, bounds)).collect::<Result<Vec<_>>>()?;
    let elliptic = enumerate_elliptic_traces(&spec.field)
        .par_iter()
        .map(|t| classify_elliptic(spec, t, &provider, bounds))
        .collect::<Result<Vec<_>>>()?;
    Ok(Enumeration { table: GeodesicTable::new(x, spec.n(), classes), spec: spec.clone(), elliptic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sigma0::BaseField;

    #[test]
    fn four_classes_below_three() {
        let spec = LatticeSpec::hilbert(BaseField::new(2).unwrap());
        let b = Bounds::default();
        let cache = ClassCache::open(None, b.clone()).unwrap();
        let e = enumerate(&spec, 3.0, &cache, &b).unwrap();
        let t: Vec<String> = e.table.classes.iter().map(|c| c.t.to_text()).collect();
        assert_eq!(t, ["1+1*w", "2+1*w", "1+2*w", "3+1*w"]);
        assert_eq!(e.elliptic.len(), 3);
        assert!(e.table.classes.iter().all(|c| c.multiplicity.certified));
    }
}
