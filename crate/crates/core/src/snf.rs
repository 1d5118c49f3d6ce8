//! Smith normal form over the integers and the homology it yields.
//!
//! This path is independent of the Morse matching: it only reads the face
//! table and the oriented boundary operator.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::chain::{ChainComplex, ChainVector};
use crate::face::{FaceId, FaceTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnfError {
    #[error("face subset is not closed under taking facets: {0} is missing")]
    NotClosed(String),
    #[error("input chain {0} is not a cycle of the subset")]
    NotCycles(usize),
}

/// Invariant factors of an integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    pub rows: usize,
    pub cols: usize,
    /// Nonzero invariant factors, positive, each dividing the next.
    pub factors: Vec<BigInt>,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.factors.iter().filter(|f| !f.is_one()).cloned().collect()
    }

    pub fn is_divisibility_chain(&self) -> bool {
        self.factors.iter().all(|f| f.is_positive())
            && self.factors.windows(2).all(|w| (&w[1] % &w[0]).is_zero())
    }
}

/// Sparse working copy: rows plus a column-to-rows index.
struct Work {
    rows: Vec<BTreeMap<usize, BigInt>>,
    col_rows: Vec<BTreeSet<usize>>,
}

impl Work {
    fn set(&mut self, r: usize, c: usize, v: BigInt) {
        if v.is_zero() {
            self.rows[r].remove(&c);
            self.col_rows[c].remove(&r);
        } else {
            self.rows[r].insert(c, v);
            self.col_rows[c].insert(r);
        }
    }

    /// `row[target] -= q * row[source]`.
    fn row_op(&mut self, target: usize, source: usize, q: &BigInt) {
        let src: Vec<(usize, BigInt)> = self.rows[source]
            .iter()
            .map(|(&c, v)| (c, v.clone()))
            .collect();
        for (c, v) in src {
            let cur = self.rows[target].get(&c).cloned().unwrap_or_default();
            self.set(target, c, cur - q * v);
        }
    }

    /// Smallest nonzero entry by absolute value; ties prefer low fill-in.
    fn best_pivot(&self) -> Option<(usize, usize)> {
        let mut best: Option<(&BigInt, usize, usize, usize)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            for (&c, v) in row {
                let cost = (row.len() - 1) * (self.col_rows[c].len() - 1);
                let better = match best {
                    None => true,
                    Some((bv, bcost, _, _)) => match v.magnitude().cmp(bv.magnitude()) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Equal => cost < bcost,
                        std::cmp::Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((v, cost, r, c));
                }
            }
        }
        best.map(|(_, _, r, c)| (r, c))
    }
}

/// Invariant factors of the `rows x cols` matrix with the given entries.
/// Elimination always pivots on an entry of least absolute value.
pub fn smith_normal_form(
    rows: usize,
    cols: usize,
    entries: impl IntoIterator<Item = (usize, usize, BigInt)>,
) -> SnfResult {
    let mut w = Work {
        rows: vec![BTreeMap::new(); rows],
        col_rows: vec![BTreeSet::new(); cols],
    };
    for (r, c, v) in entries {
        let cur = w.rows[r].get(&c).cloned().unwrap_or_default();
        w.set(r, c, cur + v);
    }
    let mut diagonal = Vec::new();
    while let Some((mut r, mut c)) = w.best_pivot() {
        loop {
            let p = w.rows[r][&c].clone();
            // Clear the pivot column with row operations.
            let others: Vec<usize> = w.col_rows[c].iter().copied().filter(|&i| i != r).collect();
            let mut smaller: Option<(BigInt, usize)> = None;
            for i in others {
                let q = w.rows[i][&c].div_floor(&p);
                w.row_op(i, r, &q);
                if let Some(rem) = w.rows[i].get(&c) {
                    if smaller.as_ref().is_none_or(|(m, _)| rem.magnitude() < m.magnitude()) {
                        smaller = Some((rem.clone(), i));
                    }
                }
            }
            if let Some((_, i)) = smaller {
                r = i;
                continue;
            }
            // Column `c` now only meets row `r`, so column operations only
            // change row `r`.
            let row_entries: Vec<(usize, BigInt)> = w.rows[r]
                .iter()
                .filter(|(&j, _)| j != c)
                .map(|(&j, v)| (j, v.clone()))
                .collect();
            let mut smaller: Option<(BigInt, usize)> = None;
            for (j, v) in row_entries {
                let rem = v.mod_floor(&p);
                if !rem.is_zero()
                    && smaller.as_ref().is_none_or(|(m, _)| rem.magnitude() < m.magnitude())
                {
                    smaller = Some((rem.clone(), j));
                }
                w.set(r, j, rem);
            }
            if let Some((_, j)) = smaller {
                c = j;
                continue;
            }
            diagonal.push(p.abs());
            w.set(r, c, BigInt::zero());
            break;
        }
    }
    SnfResult {
        rows,
        cols,
        factors: normalize_diagonal(diagonal),
    }
}

/// Turn a diagonal into a divisibility chain with the same cokernel.
fn normalize_diagonal(diagonal: Vec<BigInt>) -> Vec<BigInt> {
    let units = diagonal.iter().filter(|d| d.is_one()).count();
    let mut rest: Vec<BigInt> = diagonal.into_iter().filter(|d| !d.is_one()).collect();
    for i in 0..rest.len() {
        for j in i + 1..rest.len() {
            let g = rest[i].gcd(&rest[j]);
            let l = &rest[i] / &g * &rest[j];
            rest[i] = g;
            rest[j] = l;
        }
    }
    let mut factors = vec![BigInt::one(); units];
    factors.extend(rest);
    factors
}

/// Restricted boundary `∂_d` of a face subset as matrix entries, with local
/// row/column numbering inside the subset.
fn subset_boundary(
    cx: &ChainComplex<'_>,
    subset: &[bool],
    d: i32,
) -> (usize, usize, Vec<(usize, usize, BigInt)>) {
    let table = cx.table();
    let rows = local_positions(table, subset, d - 1);
    let cols: Vec<FaceId> = table.ids_of_dim(d).filter(|&id| subset[id]).collect();
    let mut entries = Vec::new();
    for (j, &id) in cols.iter().enumerate() {
        for &(g, v) in cx.boundary_of(id) {
            if let Some(&i) = rows.get(&g) {
                entries.push((i, j, BigInt::from(v)));
            }
        }
    }
    (rows.len(), cols.len(), entries)
}

fn local_positions(table: &FaceTable, subset: &[bool], d: i32) -> BTreeMap<FaceId, usize> {
    table
        .ids_of_dim(d)
        .filter(|&id| subset[id])
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect()
}

/// Facet closure. A subset without the empty face is read as an
/// unreduced complex, so vertices need not see it.
fn check_closed(table: &FaceTable, subset: &[bool]) -> Result<(), SnfError> {
    for id in 0..table.len() {
        if !subset[id] {
            continue;
        }
        for g in table.facet_ids(id) {
            if !subset[g] && table.dim(g) >= 0 {
                return Err(SnfError::NotClosed(table.face(g).to_string()));
            }
        }
    }
    Ok(())
}

/// Betti numbers and torsion of a facet-closed face subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyReport {
    pub subset: String,
    pub reduced: bool,
    /// Betti number per degree, zero degrees included.
    pub betti: BTreeMap<i32, usize>,
    /// Torsion coefficients per degree, empty degrees omitted.
    pub torsion: BTreeMap<i32, Vec<BigInt>>,
}

impl HomologyReport {
    pub fn betti(&self, degree: i32) -> usize {
        self.betti.get(&degree).copied().unwrap_or(0)
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion.is_empty()
    }

    /// Degrees with nonzero Betti number.
    pub fn support(&self) -> Vec<i32> {
        self.betti
            .iter()
            .filter(|(_, &b)| b > 0)
            .map(|(&d, _)| d)
            .collect()
    }

    /// `{"subset":…,"betti":{"2":31},"torsion":{}}`, listing nonzero
    /// degrees only.
    pub fn to_json(&self) -> Value {
        let betti: serde_json::Map<String, Value> = self
            .betti
            .iter()
            .filter(|(_, &b)| b > 0)
            .map(|(d, &b)| (d.to_string(), json!(b)))
            .collect();
        let torsion: serde_json::Map<String, Value> = self
            .torsion
            .iter()
            .map(|(d, t)| {
                let vals: Vec<Value> = t.iter().map(bigint_json).collect();
                (d.to_string(), Value::Array(vals))
            })
            .collect();
        json!({ "subset": self.subset, "betti": betti, "torsion": torsion })
    }
}

/// JSON number when it fits, decimal string otherwise.
pub fn bigint_json(v: &BigInt) -> Value {
    i64::try_from(v).map_or_else(|_| Value::String(v.to_string()), |x| json!(x))
}

/// Homology of a subset in every degree. With `reduced`, the empty face
/// (which must be in the subset) carries the augmentation.
pub fn homology_report(
    cx: &ChainComplex<'_>,
    subset: &[bool],
    reduced: bool,
    label: &str,
) -> Result<HomologyReport, SnfError> {
    let table = cx.table();
    let mut subset = subset.to_vec();
    let empty = table.ids_of_dim(-1).start;
    subset[empty] = reduced;
    check_closed(table, &subset)?;

    let top = table.n() as i32;
    let low = if reduced { -1 } else { 0 };
    // snf[d] for the boundary out of dimension d, d in low..=top+1.
    let mut ranks = BTreeMap::new();
    let mut torsion_of = BTreeMap::new();
    for d in low..=top {
        if d == 0 && !reduced {
            ranks.insert(d, 0);
            continue;
        }
        if d == -1 {
            ranks.insert(d, 0);
            continue;
        }
        let (r, c, e) = subset_boundary(cx, &subset, d);
        let snf = smith_normal_form(r, c, e);
        debug_assert!(snf.is_divisibility_chain());
        ranks.insert(d, snf.rank());
        torsion_of.insert(d, snf.torsion());
    }
    ranks.insert(top + 1, 0);

    let mut betti = BTreeMap::new();
    let mut torsion = BTreeMap::new();
    for d in low..=top {
        let cells = table.ids_of_dim(d).filter(|&id| subset[id]).count();
        betti.insert(d, cells - ranks[&d] - ranks[&(d + 1)]);
        if let Some(t) = torsion_of.get(&(d + 1)) {
            if !t.is_empty() {
                torsion.insert(d, t.clone());
            }
        }
    }
    Ok(HomologyReport {
        subset: label.to_string(),
        reduced,
        betti,
        torsion,
    })
}

/// Betti number and torsion in one degree.
pub fn homology(
    cx: &ChainComplex<'_>,
    subset: &[bool],
    degree: i32,
    reduced: bool,
) -> Result<(usize, Vec<BigInt>), SnfError> {
    let report = homology_report(cx, subset, reduced, "")?;
    Ok((
        report.betti(degree),
        report.torsion.get(&degree).cloned().unwrap_or_default(),
    ))
}

/// Whether a family of cycles maps to a free basis of homology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceVerdict {
    /// No nontrivial integer combination is a boundary.
    pub independent: bool,
    /// Cycles plus boundaries give every cycle of the subset.
    pub generating: bool,
    pub boundary_rank: usize,
    pub combined_rank: usize,
    pub cycle_rank: usize,
}

impl IndependenceVerdict {
    pub fn is_basis(&self) -> bool {
        self.independent && self.generating
    }
}

/// Decide whether the classes of `cycles` in `H_degree(subset)` are
/// independent and generate, from the Smith forms of the boundary image and
/// of the image stacked with the cycles.
pub fn class_independence(
    cycles: &[ChainVector],
    cx: &ChainComplex<'_>,
    subset: &[bool],
    degree: i32,
) -> Result<IndependenceVerdict, SnfError> {
    let table = cx.table();
    check_closed(table, subset)?;
    for (i, c) in cycles.iter().enumerate() {
        let inside = c.dim() == degree && c.support().all(|id| subset[id]);
        if !inside || !cx.apply_boundary(c).is_zero() {
            return Err(SnfError::NotCycles(i));
        }
    }
    let (rows, image_cols, image) = subset_boundary(cx, subset, degree + 1);
    let boundary_rank = smith_normal_form(rows, image_cols, image.clone()).rank();

    let positions = local_positions(table, subset, degree);
    let mut stacked = image;
    for (j, c) in cycles.iter().enumerate() {
        for (id, v) in c.terms() {
            stacked.push((positions[&id], image_cols + j, v.clone()));
        }
    }
    let combined = smith_normal_form(rows, image_cols + cycles.len(), stacked);

    let (r, c, e) = subset_boundary(cx, subset, degree);
    let out_rank = if degree == -1 {
        0
    } else {
        smith_normal_form(r, c, e).rank()
    };
    let cycle_rank = positions.len() - out_rank;

    Ok(IndependenceVerdict {
        independent: combined.rank() - boundary_rank == cycles.len(),
        generating: combined.rank() == cycle_rank && combined.factors.iter().all(BigInt::is_one),
        boundary_rank,
        combined_rank: combined.rank(),
        cycle_rank,
    })
}
