//! The subcomplexes `C(n, k)`: every face of the half cube except the half
//! cube shaped faces of dimension `k` and above.
//!
//! Restricting the complete matching to `C(n, k)` leaves exactly the
//! `(k-1)`-faces matched with deleted `k`-dimensional half cubes unpaired.
//! The boundaries of those half cubes form a basis of `H_{k-1}`.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::chain::{ChainComplex, ChainVector};
use crate::face::{FaceId, FaceKind, FaceTable, Symbol};
use crate::morse::{morse_boundary, morse_counts, MorseError, MorseMatching};
use crate::snf::bigint_json;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubcomplexError {
    #[error("k = {k} is outside 3..{n} for n = {n}")]
    BadRange { n: usize, k: usize },
    #[error("subcomplex invariant violated: {0}")]
    Invariant(String),
    #[error("boundary of {bface} reaches {face} outside the subcomplex")]
    SupportLeak { bface: String, face: String },
    #[error(transparent)]
    Morse(#[from] MorseError),
}

/// Whether a face belongs to `C(n, k)`.
pub fn in_subcomplex(kind: FaceKind, k: usize) -> bool {
    !matches!(kind, FaceKind::HalfCube(d) if d >= k)
}

/// Membership mask of `C(n, k)` over a face table.
pub fn subcomplex_members(table: &FaceTable, k: usize) -> Vec<bool> {
    (0..table.len())
        .map(|id| in_subcomplex(table.kind(id), k))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SubcomplexSpec {
    pub n: usize,
    pub k: usize,
    pub members: Vec<bool>,
    /// The complete matching with every pair leaving the subcomplex dropped.
    pub matching: MorseMatching,
    /// Unpaired faces of the restricted matching.
    pub unmatched: Vec<FaceId>,
    /// Their partners under the complete matching, in the same order.
    pub external: Vec<FaceId>,
}

impl SubcomplexSpec {
    pub fn label(&self) -> String {
        format!("C_{{{},{}}}", self.n, self.k)
    }

    pub fn unpaired_counts(&self, table: &FaceTable) -> Vec<usize> {
        morse_counts(&self.matching, table, Some(&self.members))
    }
}

fn check_range(n: usize, k: usize) -> Result<(), SubcomplexError> {
    if k < 3 || k >= n {
        return Err(SubcomplexError::BadRange { n, k });
    }
    Ok(())
}

/// Build `C(n, k)` with its restricted matching and check it meets the
/// hypotheses under which the unpaired faces give a homology basis.
pub fn build_subcomplex(
    table: &FaceTable,
    full: &MorseMatching,
    k: usize,
) -> Result<SubcomplexSpec, SubcomplexError> {
    let n = table.n();
    check_range(n, k)?;
    let members = subcomplex_members(table, k);
    let matching = full.restrict(&members);
    let unmatched: Vec<FaceId> = (0..table.len())
        .filter(|&id| members[id] && matching.partner(id).is_none())
        .collect();
    let external: Vec<FaceId> = unmatched
        .iter()
        .map(|&id| {
            full.partner(id).ok_or_else(|| {
                SubcomplexError::Invariant(format!("{} is unpaired in the full matching", table.face(id)))
            })
        })
        .collect::<Result<_, _>>()?;

    for id in 0..table.len() {
        if members[id] && table.facet_ids(id).iter().any(|&g| !members[g]) {
            return Err(SubcomplexError::Invariant(format!(
                "{} has a facet outside the subcomplex",
                table.face(id)
            )));
        }
    }
    for (&u, &x) in unmatched.iter().zip(&external) {
        if table.dim(u) != k as i32 - 1 {
            return Err(SubcomplexError::Invariant(format!(
                "unpaired face {} has dimension {}",
                table.face(u),
                table.dim(u)
            )));
        }
        if table.kind(x) != FaceKind::HalfCube(k) {
            return Err(SubcomplexError::Invariant(format!(
                "partner {} of {} is not a {k}-dimensional half cube",
                table.face(x),
                table.face(u)
            )));
        }
        if table.facet_ids(x).iter().any(|&g| !members[g]) {
            return Err(SubcomplexError::Invariant(format!(
                "boundary of {} leaves the subcomplex",
                table.face(x)
            )));
        }
    }
    Ok(SubcomplexSpec {
        n,
        k,
        members,
        matching,
        unmatched,
        external,
    })
}

/// The `k`-dimensional half cube shaped faces with no `1` after their last
/// asterisk, in table order.
pub fn basis_faces(table: &FaceTable, k: usize) -> Vec<FaceId> {
    table
        .ids_of_dim(k as i32)
        .filter(|&id| table.kind(id) == FaceKind::HalfCube(k))
        .filter(|&id| {
            let s = table.face(id).symbols();
            let last_star = s.iter().rposition(|&x| x == Symbol::Star).unwrap();
            !s[last_star + 1..].contains(&Symbol::One)
        })
        .collect()
}

/// Boundaries of the basis faces: cycles of dimension `k - 1` in `C(n, k)`.
#[derive(Debug, Clone)]
pub struct HomologyBasis {
    pub level: i32,
    pub faces: Vec<FaceId>,
    pub chains: Vec<ChainVector>,
}

impl HomologyBasis {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// One JSON object per basis chain:
    /// `{"bface":"0*1*10*","chain":[{"face":…,"coeff":-1},…]}`.
    pub fn records(&self, table: &FaceTable) -> Vec<Value> {
        self.faces
            .iter()
            .zip(&self.chains)
            .map(|(&b, chain)| {
                let terms: Vec<Value> = chain
                    .terms()
                    .map(|(id, c)| json!({ "face": table.face(id).to_string(), "coeff": bigint_json(c) }))
                    .collect();
                json!({ "bface": table.face(b).to_string(), "chain": terms })
            })
            .collect()
    }
}

pub fn homology_basis(
    spec: &SubcomplexSpec,
    cx: &ChainComplex<'_>,
) -> Result<HomologyBasis, SubcomplexError> {
    let table = cx.table();
    let faces = basis_faces(table, spec.k);
    let mut chains = Vec::with_capacity(faces.len());
    for &b in &faces {
        let chain = cx.boundary_of_cell(b);
        if let Some(leak) = chain.support().find(|&id| !spec.members[id]) {
            return Err(SubcomplexError::SupportLeak {
                bface: table.face(b).to_string(),
                face: table.face(leak).to_string(),
            });
        }
        if !cx.apply_boundary(&chain).is_zero() {
            return Err(SubcomplexError::Invariant(format!(
                "boundary of {} is not a cycle",
                table.face(b)
            )));
        }
        chains.push(chain);
    }
    Ok(HomologyBasis {
        level: spec.k as i32 - 1,
        faces,
        chains,
    })
}

/// A cycle of the subcomplex written as a combination of basis chains plus
/// a boundary inside the subcomplex.
#[derive(Debug, Clone)]
pub struct BasisExpansion {
    /// Coefficient of each basis chain, aligned with `HomologyBasis::faces`.
    pub coefficients: Vec<BigInt>,
    /// A chain of the subcomplex whose boundary is the remainder.
    pub filler: ChainVector,
}

/// Express a `(k-1)`-cycle of `C(n, k)` in the basis: lift it through the
/// Morse boundary of the complete matching, read off the coefficients of the
/// deleted half cubes, and keep the rest as a filler inside the subcomplex.
pub fn express_in_basis(
    y: &ChainVector,
    spec: &SubcomplexSpec,
    basis: &HomologyBasis,
    full: &MorseMatching,
    cx: &ChainComplex<'_>,
) -> Result<BasisExpansion, SubcomplexError> {
    let table = cx.table();
    if let Some(out) = y.support().find(|&id| !spec.members[id]) {
        return Err(SubcomplexError::Invariant(format!(
            "cycle touches {} outside the subcomplex",
            table.face(out)
        )));
    }
    let lift = morse_boundary(full, cx, y.dim())?.solve_cycle(y, full, cx)?;
    let coefficients: Vec<BigInt> = basis.faces.iter().map(|&b| lift.coeff(b)).collect();
    let mut filler = lift.clone();
    for (&b, c) in basis.faces.iter().zip(&coefficients) {
        filler.add_term(b, &-c);
    }
    if let Some(out) = filler.support().find(|&id| !spec.members[id]) {
        return Err(SubcomplexError::Invariant(format!(
            "lift of the cycle uses {} outside the subcomplex",
            table.face(out)
        )));
    }
    Ok(BasisExpansion {
        coefficients,
        filler,
    })
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn check_betti_range(n: usize, k: usize) {
    assert!(3 <= k && k <= n, "need 3 <= k <= n, got n = {n}, k = {k}");
}

/// `sum_{i=k}^{n} C(n, i) C(i-1, k-1)`.
pub fn betti_eq11(n: usize, k: usize) -> BigUint {
    check_betti_range(n, k);
    let (n, k) = (n as u64, k as u64);
    (k..=n).map(|i| binomial(n, i) * binomial(i - 1, k - 1)).sum()
}

/// `sum_{i=1}^{n} 2^(i-k) C(i-1, k-1)`; terms with `i < k` vanish.
pub fn betti_eq12(n: usize, k: usize) -> BigUint {
    check_betti_range(n, k);
    (k..=n)
        .map(|i| (BigUint::one() << (i - k)) * binomial(i as u64 - 1, k as u64 - 1))
        .sum()
}

/// One row of the Betti table. Missing columns are left blank in CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BettiRow {
    pub n: usize,
    pub k: usize,
    pub eq11: BigUint,
    pub eq12: BigUint,
    pub unmatched: Option<usize>,
    pub oracle: Option<usize>,
}

impl BettiRow {
    pub const CSV_HEADER: &'static str = "n,k,eq11,eq12,unmatched_count,oracle_rank";

    /// All columns that are present agree.
    pub fn consistent(&self) -> bool {
        let target = &self.eq12;
        self.eq11 == *target
            && self.unmatched.is_none_or(|u| BigUint::from(u) == *target)
            && self.oracle.is_none_or(|o| BigUint::from(o) == *target)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{}",
            self.n,
            self.k,
            self.eq11,
            self.eq12,
            opt(self.unmatched),
            opt(self.oracle)
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::face::enumerate_faces;
    use crate::morse::build_matching;

    #[test]
    fn betti_anchor_values() {
        assert_eq!(betti_eq11(4, 3), BigUint::from(7u32));
        assert_eq!(betti_eq12(4, 3), BigUint::from(7u32));
        assert_eq!(betti_eq12(5, 3), BigUint::from(31u32));
        assert_eq!(betti_eq11(5, 4), BigUint::from(9u32));
        for n in 3..12 {
            assert_eq!(betti_eq11(n, n), BigUint::one());
        }
    }

    #[test]
    fn c43_unpaired_faces_are_triangles() {
        let table = enumerate_faces(4).unwrap();
        let full = build_matching(&table).unwrap();
        let spec = build_subcomplex(&table, &full, 3).unwrap();
        assert_eq!(spec.unmatched.len(), 7);
        assert!(spec.unmatched.iter().all(|&id| table.kind(id).is_triangle()));
        assert!(spec.unmatched.iter().all(|&id| full.rule(id) == 5));
        let counts = spec.unpaired_counts(&table);
        assert_eq!(counts, [0, 0, 0, 7, 0, 0]);
    }

    #[test]
    fn c54_removes_half_cubes_of_dimension_four_and_five() {
        let table = enumerate_faces(5).unwrap();
        let full = build_matching(&table).unwrap();
        let spec = build_subcomplex(&table, &full, 4).unwrap();
        let removed: Vec<String> = (0..table.len())
            .filter(|&id| !spec.members[id])
            .map(|id| table.face(id).to_string())
            .collect();
        // 2^(5-4) C(5,4) four-dimensional half cubes plus the top cell.
        assert_eq!(removed.len(), 11);
        assert!(removed.contains(&"*****".to_string()));
        assert_eq!(spec.unmatched.len(), 9);
    }

    #[test]
    fn bad_range() {
        let table = enumerate_faces(5).unwrap();
        let full = build_matching(&table).unwrap();
        assert_eq!(
            build_subcomplex(&table, &full, 5).unwrap_err(),
            SubcomplexError::BadRange { n: 5, k: 5 }
        );
        assert!(build_subcomplex(&table, &full, 2).is_err());
    }

    #[test]
    fn basis_faces_match_external_partners() {
        for n in 4..=6 {
            let table = enumerate_faces(n).unwrap();
            let full = build_matching(&table).unwrap();
            for k in 3..n {
                let spec = build_subcomplex(&table, &full, k).unwrap();
                let mut external = spec.external.clone();
                external.sort();
                let b = basis_faces(&table, k);
                assert_eq!(b, external, "n={n} k={k}");
                assert_eq!(BigUint::from(b.len()), betti_eq12(n, k));
                for &id in &b {
                    assert!(table.face(id).to_string().trim_end_matches('0').ends_with('*'));
                }
            }
        }
    }

    #[test]
    fn c53_basis_chains() {
        let table = enumerate_faces(5).unwrap();
        let cx = ChainComplex::new(&table).unwrap();
        let full = build_matching(&table).unwrap();
        let spec = build_subcomplex(&table, &full, 3).unwrap();
        let basis = homology_basis(&spec, &cx).unwrap();
        assert_eq!(basis.len(), 31);
        assert_eq!(basis.level, 2);
        for (&b, chain) in basis.faces.iter().zip(&basis.chains) {
            assert!(cx.apply_boundary(chain).is_zero());
            let facets = table.facet_ids(b);
            assert!(chain.support().all(|id| facets.contains(&id)));
        }
        let rec = &basis.records(&table)[0];
        assert_eq!(rec["bface"], table.face(basis.faces[0]).to_string());
    }

    #[test]
    fn expansion_recovers_basis_combination() {
        let table = enumerate_faces(5).unwrap();
        let cx = ChainComplex::new(&table).unwrap();
        let full = build_matching(&table).unwrap();
        let spec = build_subcomplex(&table, &full, 4).unwrap();
        let basis = homology_basis(&spec, &cx).unwrap();
        // 2 b_0 - b_3 + boundary of a 4-simplex in the subcomplex.
        let simplex = table
            .ids_of_dim(4)
            .find(|&id| spec.members[id])
            .unwrap();
        let mut y = cx.boundary_of_cell(simplex);
        y.add_scaled(&BigInt::from(2), &basis.chains[0]);
        y.add_scaled(&BigInt::from(-1), &basis.chains[3]);
        let e = express_in_basis(&y, &spec, &basis, &full, &cx).unwrap();
        let mut expected = vec![BigInt::zero(); basis.len()];
        expected[0] = BigInt::from(2);
        expected[3] = BigInt::from(-1);
        assert_eq!(e.coefficients, expected);
        let mut rebuilt = cx.apply_boundary(&e.filler);
        for (c, chain) in e.coefficients.iter().zip(&basis.chains) {
            rebuilt.add_scaled(c, chain);
        }
        assert_eq!(rebuilt, y);
    }

    #[test]
    fn betti_csv() {
        let row = BettiRow {
            n: 4,
            k: 3,
            eq11: betti_eq11(4, 3),
            eq12: betti_eq12(4, 3),
            unmatched: Some(7),
            oracle: None,
        };
        assert!(row.consistent());
        assert_eq!(row.to_csv(), "4,3,7,7,7,");
    }
}
