//! Oriented cellular chain complex of the half cube.
//!
//! Every face of dimension at least one is oriented by an integer frame of
//! edge vectors; incidence numbers are the signs of exact determinants.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact;
use crate::face::{FaceId, FaceSeq, FaceTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("face {0} has no affinely independent frame")]
    DegenerateFace(String),
    #[error("orientation frames need a face of dimension at least 1, got {0}")]
    FrameOfVertex(String),
    #[error("incidence needs dim(f) = dim(g) + 1, got {0} and {1}")]
    DimensionMismatch(i32, i32),
    #[error("boundary dimension {0} outside 0..={1}")]
    BadDimension(i32, usize),
    #[error("face {0} is not in the face table")]
    UnknownFace(String),
}

/// Coordinates of a vertex sequence: `0` is `+1` and `1` is `-1`.
pub fn vertex_point(v: &FaceSeq) -> Vec<i64> {
    v.symbols()
        .iter()
        .map(|s| if s.digit() == Some(true) { -1 } else { 1 })
        .collect()
}

/// Base vertex plus edge vectors spanning the affine hull of a face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationFrame {
    pub base: Vec<i64>,
    pub vectors: Vec<Vec<i64>>,
}

fn to_big(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// Frame of a face: the lexicographically smallest vertex is the base, and
/// the remaining vertices are taken in order whenever they raise the rank.
pub fn orientation_frame(face: &FaceSeq) -> Result<OrientationFrame, ChainError> {
    let k = face.dim();
    if k < 1 {
        return Err(ChainError::FrameOfVertex(face.to_string()));
    }
    let k = k as usize;
    let vertices = face.vertices();
    let base = vertex_point(&vertices[0]);
    let mut vectors: Vec<Vec<i64>> = Vec::with_capacity(k);
    for v in &vertices[1..] {
        if vectors.len() == k {
            break;
        }
        let diff: Vec<i64> = vertex_point(v)
            .iter()
            .zip(&base)
            .map(|(a, b)| a - b)
            .collect();
        vectors.push(diff);
        if exact::rank(&to_big(&vectors)) < vectors.len() {
            vectors.pop();
        }
    }
    if vectors.len() < k {
        return Err(ChainError::DegenerateFace(face.to_string()));
    }
    Ok(OrientationFrame { base, vectors })
}

fn vertex_sum(face: &FaceSeq) -> (Vec<i64>, i64) {
    let vertices = face.vertices();
    let mut sum = vec![0i64; face.symbols().len()];
    for v in &vertices {
        for (s, x) in sum.iter_mut().zip(vertex_point(v)) {
            *s += x;
        }
    }
    (sum, vertices.len() as i64)
}

/// Orientation data cached per face.
#[derive(Debug, Clone)]
struct Oriented {
    frame: Option<OrientationFrame>,
    sum: Vec<i64>,
    count: i64,
}

impl Oriented {
    fn new(face: &FaceSeq) -> Result<Self, ChainError> {
        let frame = if face.dim() >= 1 {
            Some(orientation_frame(face)?)
        } else {
            None
        };
        let (sum, count) = vertex_sum(face);
        Ok(Oriented { frame, sum, count })
    }
}

/// Sign of `g` in the boundary of `f`, for a known facet `g`: the frame of
/// `g` preceded by the outward direction must agree with the frame of `f`.
fn facet_sign(f: &Oriented, g: &Oriented, f_text: &FaceSeq) -> Result<i8, ChainError> {
    let Some(f_frame) = &f.frame else {
        // [vertex : EMPTY]
        return Ok(1);
    };
    // |f| |g| (centroid(g) - centroid(f)), cleared to integers.
    let outward: Vec<i64> = g
        .sum
        .iter()
        .zip(&f.sum)
        .map(|(gs, fs)| f.count * gs - g.count * fs)
        .collect();
    let mut columns = vec![outward];
    if let Some(g_frame) = &g.frame {
        columns.extend(g_frame.vectors.iter().cloned());
    }
    let m: Vec<Vec<BigInt>> = f_frame
        .vectors
        .iter()
        .map(|fv| {
            columns
                .iter()
                .map(|c| BigInt::from(fv.iter().zip(c).map(|(a, b)| a * b).sum::<i64>()))
                .collect()
        })
        .collect();
    let det = exact::determinant(m);
    if det.is_zero() {
        return Err(ChainError::DegenerateFace(f_text.to_string()));
    }
    Ok(if det.is_positive() { 1 } else { -1 })
}

/// Incidence number `[f : g]` in `{-1, 0, 1}`.
pub fn incidence(f: &FaceSeq, g: &FaceSeq) -> Result<i8, ChainError> {
    if f.dim() != g.dim() + 1 || f.dim() < 0 {
        return Err(ChainError::DimensionMismatch(f.dim(), g.dim()));
    }
    if !f.facets().contains(g) {
        return Ok(0);
    }
    facet_sign(&Oriented::new(f)?, &Oriented::new(g)?, f)
}

/// A sparse integer chain of a fixed dimension over one face table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainVector {
    dim: i32,
    coeffs: BTreeMap<FaceId, BigInt>,
}

impl ChainVector {
    pub fn zero(dim: i32) -> Self {
        ChainVector {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn cell(dim: i32, id: FaceId) -> Self {
        let mut c = Self::zero(dim);
        c.add_term(id, &BigInt::from(1));
        c
    }

    pub fn from_terms(dim: i32, terms: impl IntoIterator<Item = (FaceId, BigInt)>) -> Self {
        let mut c = Self::zero(dim);
        for (id, v) in terms {
            c.add_term(id, &v);
        }
        c
    }

    pub fn dim(&self) -> i32 {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, id: FaceId) -> BigInt {
        self.coeffs.get(&id).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (FaceId, &BigInt)> {
        self.coeffs.iter().map(|(&id, v)| (id, v))
    }

    pub fn support(&self) -> impl Iterator<Item = FaceId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, id: FaceId, value: &BigInt) {
        if value.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(id).or_default();
        *entry += value;
        if entry.is_zero() {
            self.coeffs.remove(&id);
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, scale: &BigInt, other: &ChainVector) {
        assert_eq!(self.dim, other.dim, "adding chains of different dimension");
        for (id, v) in other.terms() {
            self.add_term(id, &(scale * v));
        }
    }

    pub fn sub(&self, other: &ChainVector) -> ChainVector {
        let mut out = self.clone();
        out.add_scaled(&BigInt::from(-1), other);
        out
    }
}

/// Boundary operator from `dim`-cells to `(dim - 1)`-cells, stored by
/// column. Row and column indices are positions inside the dimension
/// blocks of the face table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub dim: i32,
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.columns[col]
            .iter()
            .find(|&&(r, _)| r == row)
            .map_or(0, |&(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.cols]; self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                m[r][c] = v as i64;
            }
        }
        m
    }

    /// Product `self * rhs` as a dense matrix.
    pub fn compose(&self, rhs: &BoundaryMatrix) -> Vec<Vec<i64>> {
        assert_eq!(self.cols, rhs.rows, "incompatible boundary matrices");
        let mut out = vec![vec![0i64; rhs.cols]; self.rows];
        for (c, col) in rhs.columns.iter().enumerate() {
            for &(mid, a) in col {
                for &(r, b) in &self.columns[mid] {
                    out[r][c] += (a as i64) * (b as i64);
                }
            }
        }
        out
    }

    /// Coordinate-triplet JSON-lines, preceded by a header line.
    pub fn write_jsonl<W: Write>(&self, n: usize, mut out: W) -> io::Result<()> {
        #[derive(Serialize)]
        struct Header {
            dim: i32,
            rows: usize,
            cols: usize,
            n: usize,
        }
        #[derive(Serialize)]
        struct Triplet {
            row: usize,
            col: usize,
            val: i8,
        }
        let header = Header {
            dim: self.dim,
            rows: self.rows,
            cols: self.cols,
            n,
        };
        writeln!(out, "{}", serde_json::to_string(&header)?)?;
        for (col, entries) in self.columns.iter().enumerate() {
            for &(row, val) in entries {
                writeln!(out, "{}", serde_json::to_string(&Triplet { row, col, val })?)?;
            }
        }
        Ok(())
    }
}

/// Oriented boundary data for every face of a table.
#[derive(Debug, Clone)]
pub struct ChainComplex<'a> {
    table: &'a FaceTable,
    /// Boundary of each face: (facet id, incidence), sorted by id.
    boundaries: Vec<Vec<(FaceId, i8)>>,
}

impl<'a> ChainComplex<'a> {
    pub fn new(table: &'a FaceTable) -> Result<Self, ChainError> {
        let oriented = table
            .faces()
            .iter()
            .map(Oriented::new)
            .collect::<Result<Vec<_>, _>>()?;
        let mut boundaries = Vec::with_capacity(table.len());
        for id in 0..table.len() {
            let f = table.face(id);
            let mut col = Vec::new();
            for g in f.facets() {
                let gid = table
                    .id_of(&g)
                    .ok_or_else(|| ChainError::UnknownFace(g.to_string()))?;
                col.push((gid, facet_sign(&oriented[id], &oriented[gid], f)?));
            }
            col.sort_unstable();
            boundaries.push(col);
        }
        Ok(ChainComplex { table, boundaries })
    }

    pub fn table(&self) -> &'a FaceTable {
        self.table
    }

    /// Boundary of one face as (facet id, incidence) pairs.
    pub fn boundary_of(&self, id: FaceId) -> &[(FaceId, i8)] {
        &self.boundaries[id]
    }

    /// `[f : g]` by face id; zero unless `g` is a facet of `f`.
    pub fn incidence(&self, f: FaceId, g: FaceId) -> i8 {
        self.boundaries[f]
            .binary_search_by_key(&g, |&(id, _)| id)
            .map_or(0, |i| self.boundaries[f][i].1)
    }

    pub fn boundary_matrix(&self, d: i32) -> Result<BoundaryMatrix, ChainError> {
        let n = self.table.n();
        if d < 0 || d > n as i32 {
            return Err(ChainError::BadDimension(d, n));
        }
        let row_start = self.table.ids_of_dim(d - 1).start;
        let cols = self.table.ids_of_dim(d);
        let columns = cols
            .clone()
            .map(|id| {
                self.boundaries[id]
                    .iter()
                    .map(|&(g, v)| (g - row_start, v))
                    .collect()
            })
            .collect();
        Ok(BoundaryMatrix {
            dim: d,
            rows: self.table.count(d - 1),
            cols: cols.len(),
            columns,
        })
    }

    pub fn apply_boundary(&self, c: &ChainVector) -> ChainVector {
        let mut out = ChainVector::zero(c.dim() - 1);
        for (id, v) in c.terms() {
            debug_assert_eq!(self.table.dim(id), c.dim());
            for &(g, s) in &self.boundaries[id] {
                out.add_term(g, &(v * s));
            }
        }
        out
    }

    pub fn boundary_of_cell(&self, id: FaceId) -> ChainVector {
        ChainVector::from_terms(
            self.table.dim(id) - 1,
            self.boundaries[id]
                .iter()
                .map(|&(g, s)| (g, BigInt::from(s))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::face::{enumerate_faces, parse_seq};

    fn seq(text: &str) -> FaceSeq {
        parse_seq(text, text.len()).unwrap()
    }

    #[test]
    fn edge_frame_and_signs() {
        let edge = seq("I1O0100");
        let frame = orientation_frame(&edge).unwrap();
        assert_eq!(frame.base, vertex_point(&seq("0100100")));
        let head = vertex_point(&seq("1110100"));
        let diff: Vec<i64> = head.iter().zip(&frame.base).map(|(a, b)| a - b).collect();
        assert_eq!(frame.vectors, vec![diff]);
        assert_eq!(incidence(&edge, &seq("0100100")).unwrap(), -1);
        assert_eq!(incidence(&edge, &seq("1110100")).unwrap(), 1);
    }

    #[test]
    fn triangle_frame_has_rank_two() {
        let frame = orientation_frame(&seq("0I1I10I")).unwrap();
        assert_eq!(frame.vectors.len(), 2);
        assert_eq!(exact::rank(&to_big(&frame.vectors)), 2);
        assert_eq!(orientation_frame(&seq("0I1I10I")).unwrap(), frame);
    }

    #[test]
    fn vertex_has_no_frame() {
        assert!(matches!(
            orientation_frame(&seq("1110100")),
            Err(ChainError::FrameOfVertex(_))
        ));
    }

    #[test]
    fn incidence_cases() {
        assert_eq!(incidence(&seq("0110"), &FaceSeq::Empty).unwrap(), 1);
        // A triangle and an edge that is not one of its sides.
        assert_eq!(incidence(&seq("0I1I10I"), &seq("I1O0100")).unwrap(), 0);
        assert!(matches!(
            incidence(&seq("0I1I10I"), &seq("0110110")),
            Err(ChainError::DimensionMismatch(2, 0))
        ));
    }

    #[test]
    fn n4_boundary_matrices() {
        let table = enumerate_faces(4).unwrap();
        let cx = ChainComplex::new(&table).unwrap();
        let d0 = cx.boundary_matrix(0).unwrap();
        assert_eq!((d0.rows, d0.cols), (1, 8));
        assert!(d0.columns.iter().all(|c| c == &vec![(0, 1)]));
        let d1 = cx.boundary_matrix(1).unwrap();
        for col in &d1.columns {
            assert_eq!(col.len(), 2);
            assert_eq!(col.iter().map(|&(_, v)| v as i32).sum::<i32>(), 0);
        }
        let d2 = cx.boundary_matrix(2).unwrap();
        let d3 = cx.boundary_matrix(3).unwrap();
        assert!(d2.compose(&d3).iter().flatten().all(|&x| x == 0));
        assert!(cx.boundary_matrix(5).is_err());
    }

    #[test]
    fn apply_boundary_basics() {
        let table = enumerate_faces(4).unwrap();
        let cx = ChainComplex::new(&table).unwrap();
        let edge = table.ids_of_dim(1).start;
        let b = cx.apply_boundary(&ChainVector::cell(1, edge));
        assert_eq!(b.len(), 2);
        let frame = orientation_frame(table.face(edge)).unwrap();
        for (v, c) in b.terms() {
            let is_base = vertex_point(table.face(v)) == frame.base;
            assert_eq!(*c, BigInt::from(if is_base { -1 } else { 1 }));
        }
        for id in table.ids_of_dim(3) {
            let bb = cx.apply_boundary(&cx.boundary_of_cell(id));
            assert!(bb.is_zero());
        }
        assert!(cx.apply_boundary(&ChainVector::zero(2)).is_zero());
    }

    #[test]
    fn matrix_jsonl_header() {
        let table = enumerate_faces(4).unwrap();
        let cx = ChainComplex::new(&table).unwrap();
        let mut buf = Vec::new();
        cx.boundary_matrix(0).unwrap().write_jsonl(4, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(r#"{"dim":0,"rows":1,"cols":8,"n":4}"#));
        assert_eq!(lines.next(), Some(r#"{"row":0,"col":0,"val":1}"#));
        assert_eq!(lines.count(), 7);
    }
}
