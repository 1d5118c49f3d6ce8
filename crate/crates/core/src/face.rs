//! Symbol-sequence encoding of the faces of the half cube.
//!
//! A face is written as one symbol per coordinate: `0`/`1` for the plain
//! digits (`0` is the coordinate `+1`, `1` is `-1`), `O`/`I` for underlined
//! digits marking the mask of a simplex shaped face, and `*` for the mask of
//! a half cube shaped face. The empty face is the literal `EMPTY`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FaceError {
    #[error("unknown symbol {0:?} in face sequence")]
    BadSymbol(char),
    #[error("expected {expected} symbols, found {found}")]
    BadLength { expected: usize, found: usize },
    #[error("parity violation in {0}")]
    BadParity(String),
    #[error("edge {0} is not canonical: its rightmost underlined symbol must be O")]
    NonCanonicalEdge(String),
    #[error("{0} mixes asterisks and underlined symbols")]
    MixedMask(String),
    #[error("{0} has fewer than three asterisks")]
    TooFewStars(String),
    #[error("{0} has a single underlined symbol")]
    SingletonMask(String),
    #[error("{0} is not a vertex or simplex shaped face")]
    NotKType(String),
    #[error("ambient dimension {0} is below 4")]
    NTooSmall(usize),
}

/// One coordinate of a face sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Zero,
    One,
    UndZero,
    UndOne,
    Star,
}

impl Symbol {
    pub const ALL: [Symbol; 5] = [
        Symbol::Zero,
        Symbol::One,
        Symbol::UndZero,
        Symbol::UndOne,
        Symbol::Star,
    ];

    pub fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::UndZero => 'O',
            Symbol::UndOne => 'I',
            Symbol::Star => '*',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            'O' => Some(Symbol::UndZero),
            'I' => Some(Symbol::UndOne),
            '*' => Some(Symbol::Star),
            _ => None,
        }
    }

    /// Plain or underlined `1`.
    pub fn is_one(self) -> bool {
        matches!(self, Symbol::One | Symbol::UndOne)
    }

    pub fn is_underlined(self) -> bool {
        matches!(self, Symbol::UndZero | Symbol::UndOne)
    }

    pub fn is_plain(self) -> bool {
        matches!(self, Symbol::Zero | Symbol::One)
    }

    /// The digit carried by the symbol, `None` for `*`.
    pub fn digit(self) -> Option<bool> {
        match self {
            Symbol::Zero | Symbol::UndZero => Some(false),
            Symbol::One | Symbol::UndOne => Some(true),
            Symbol::Star => None,
        }
    }

    pub fn plain(one: bool) -> Self {
        if one {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn underlined(one: bool) -> Self {
        if one {
            Symbol::UndOne
        } else {
            Symbol::UndZero
        }
    }

    /// Flip the digit, keeping the underline.
    pub fn toggled(self) -> Self {
        match self {
            Symbol::Zero => Symbol::One,
            Symbol::One => Symbol::Zero,
            Symbol::UndZero => Symbol::UndOne,
            Symbol::UndOne => Symbol::UndZero,
            Symbol::Star => Symbol::Star,
        }
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_char().cmp(&other.as_char())
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceKind {
    Empty,
    Vertex,
    Edge,
    /// Simplex shaped face of the given dimension (at least 2).
    Simplex(usize),
    /// Half cube shaped face of the given dimension (at least 3).
    HalfCube(usize),
}

impl FaceKind {
    pub fn dim(self) -> i32 {
        match self {
            FaceKind::Empty => -1,
            FaceKind::Vertex => 0,
            FaceKind::Edge => 1,
            FaceKind::Simplex(d) | FaceKind::HalfCube(d) => d as i32,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FaceKind::Empty => "empty",
            FaceKind::Vertex => "vertex",
            FaceKind::Edge => "edge",
            FaceKind::Simplex(_) => "simplex",
            FaceKind::HalfCube(_) => "halfcube",
        }
    }

    pub fn is_triangle(self) -> bool {
        self == FaceKind::Simplex(2)
    }

    /// Vertices, edges and simplices: the faces written with underlines.
    pub fn is_k_type(self) -> bool {
        matches!(
            self,
            FaceKind::Vertex | FaceKind::Edge | FaceKind::Simplex(_)
        )
    }
}

/// A face of the half cube (or the empty face) in sequence notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FaceSeq {
    Empty,
    Seq(Box<[Symbol]>),
}

impl FaceSeq {
    /// Wrap symbols without validating them.
    pub fn from_symbols(symbols: impl Into<Box<[Symbol]>>) -> Self {
        FaceSeq::Seq(symbols.into())
    }

    /// Read symbols without validation. Used for non-canonical edge
    /// representations and other intermediate sequences.
    pub fn parse_raw(text: &str) -> Result<Self, FaceError> {
        if text == "EMPTY" {
            return Ok(FaceSeq::Empty);
        }
        let symbols = text
            .chars()
            .map(|c| Symbol::from_char(c).ok_or(FaceError::BadSymbol(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FaceSeq::from_symbols(symbols))
    }

    pub fn symbols(&self) -> &[Symbol] {
        match self {
            FaceSeq::Empty => &[],
            FaceSeq::Seq(s) => s,
        }
    }

    pub fn is_empty_face(&self) -> bool {
        matches!(self, FaceSeq::Empty)
    }

    /// Positions (0-based) of underlined symbols or asterisks.
    pub fn mask(&self) -> Vec<usize> {
        self.symbols()
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_plain())
            .map(|(i, _)| i)
            .collect()
    }

    fn count(&self, pred: impl Fn(Symbol) -> bool) -> usize {
        self.symbols().iter().filter(|&&s| pred(s)).count()
    }

    /// Check every encoding invariant.
    pub fn validate(&self) -> Result<(), FaceError> {
        let FaceSeq::Seq(symbols) = self else {
            return Ok(());
        };
        let stars = self.count(|s| s == Symbol::Star);
        let unds = self.count(Symbol::is_underlined);
        let ones = self.count(Symbol::is_one);
        if stars > 0 && unds > 0 {
            return Err(FaceError::MixedMask(self.to_string()));
        }
        if stars > 0 {
            if stars < 3 {
                return Err(FaceError::TooFewStars(self.to_string()));
            }
            return Ok(());
        }
        match unds {
            0 if ones % 2 != 0 => Err(FaceError::BadParity(self.to_string())),
            0 => Ok(()),
            1 => Err(FaceError::SingletonMask(self.to_string())),
            _ if ones % 2 == 0 => Err(FaceError::BadParity(self.to_string())),
            2 => {
                let last = symbols.iter().rposition(|s| s.is_underlined()).unwrap();
                if symbols[last] == Symbol::UndOne {
                    Err(FaceError::NonCanonicalEdge(self.to_string()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Kind and dimension. Assumes a valid sequence.
    pub fn kind(&self) -> FaceKind {
        if self.is_empty_face() {
            return FaceKind::Empty;
        }
        let stars = self.count(|s| s == Symbol::Star);
        if stars > 0 {
            return FaceKind::HalfCube(stars);
        }
        match self.count(Symbol::is_underlined) {
            0 => FaceKind::Vertex,
            2 => FaceKind::Edge,
            m => FaceKind::Simplex(m - 1),
        }
    }

    pub fn dim(&self) -> i32 {
        self.kind().dim()
    }

    /// Vertices of the face as vertex sequences, sorted.
    pub fn vertices(&self) -> Vec<FaceSeq> {
        let symbols = self.symbols();
        let mut out = match self.kind() {
            FaceKind::Empty => Vec::new(),
            FaceKind::Vertex => vec![self.clone()],
            FaceKind::Edge | FaceKind::Simplex(_) => {
                let base: Vec<Symbol> = symbols
                    .iter()
                    .map(|s| Symbol::plain(s.digit().unwrap()))
                    .collect();
                self.mask()
                    .into_iter()
                    .map(|i| {
                        let mut v = base.clone();
                        v[i] = v[i].toggled();
                        FaceSeq::from_symbols(v)
                    })
                    .collect()
            }
            FaceKind::HalfCube(_) => {
                let fixed_ones = self.count(|s| s == Symbol::One);
                fill_mask(symbols, &self.mask(), |ones| (fixed_ones + ones) % 2 == 0, Symbol::plain)
            }
        };
        out.sort();
        out
    }

    /// Codimension-one faces, canonical and sorted.
    pub fn facets(&self) -> Vec<FaceSeq> {
        let symbols = self.symbols();
        let mask = self.mask();
        let mut out = match self.kind() {
            FaceKind::Empty => Vec::new(),
            FaceKind::Vertex => vec![FaceSeq::Empty],
            FaceKind::Edge => self.vertices(),
            FaceKind::Simplex(d) => mask
                .iter()
                .map(|&i| {
                    let mut s = symbols.to_vec();
                    s[i] = Symbol::plain(s[i].digit().unwrap());
                    let g = FaceSeq::from_symbols(s);
                    if d == 2 {
                        g.canonical_edge()
                    } else {
                        g
                    }
                })
                .collect(),
            FaceKind::HalfCube(d) => {
                let mut out = self.simplex_facets();
                if d >= 4 {
                    for &i in &mask {
                        for one in [false, true] {
                            let mut s = symbols.to_vec();
                            s[i] = Symbol::plain(one);
                            out.push(FaceSeq::from_symbols(s));
                        }
                    }
                }
                out
            }
        };
        out.sort();
        out.dedup();
        out
    }

    /// The simplex shaped facets of a half cube shaped face: every asterisk
    /// becomes an underlined digit, with an odd total number of ones.
    fn simplex_facets(&self) -> Vec<FaceSeq> {
        let fixed_ones = self.count(|s| s == Symbol::One);
        fill_mask(
            self.symbols(),
            &self.mask(),
            |ones| (fixed_ones + ones) % 2 == 1,
            Symbol::underlined,
        )
    }

    /// Canonical representative of an edge: the rightmost underlined symbol
    /// must be `O`. If it is `I`, both underlined digits are flipped.
    pub fn canonical_edge(&self) -> FaceSeq {
        let symbols = self.symbols();
        match symbols.iter().rposition(|s| s.is_underlined()) {
            Some(last) if symbols[last] == Symbol::UndOne => {
                let flipped: Vec<Symbol> = symbols
                    .iter()
                    .map(|&s| if s.is_underlined() { s.toggled() } else { s })
                    .collect();
                FaceSeq::from_symbols(flipped)
            }
            _ => self.clone(),
        }
    }

    /// The total (sum of 1-based positions holding `1` or `I`) and the
    /// sequence with underlines erased.
    pub fn total_and_u(&self) -> Result<(u64, String), FaceError> {
        if self.is_empty_face() || self.symbols().contains(&Symbol::Star) {
            return Err(FaceError::NotKType(self.to_string()));
        }
        Ok(total_and_u_unchecked(self.symbols()))
    }
}

pub(crate) fn total_and_u_unchecked(symbols: &[Symbol]) -> (u64, String) {
    let mut t = 0u64;
    let mut u = String::with_capacity(symbols.len());
    for (i, s) in symbols.iter().enumerate() {
        let one = s.is_one();
        if one {
            t += i as u64 + 1;
        }
        u.push(if one { '1' } else { '0' });
    }
    (t, u)
}

/// Every way of writing digits into `mask` whose number of ones satisfies
/// `keep`, using `make` to build each symbol.
fn fill_mask(
    symbols: &[Symbol],
    mask: &[usize],
    keep: impl Fn(usize) -> bool,
    make: impl Fn(bool) -> Symbol,
) -> Vec<FaceSeq> {
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << mask.len()) {
        if !keep(bits.count_ones() as usize) {
            continue;
        }
        let mut s = symbols.to_vec();
        for (j, &i) in mask.iter().enumerate() {
            s[i] = make(bits >> j & 1 == 1);
        }
        out.push(FaceSeq::from_symbols(s));
    }
    out
}

impl fmt::Display for FaceSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaceSeq::Empty => f.write_str("EMPTY"),
            FaceSeq::Seq(s) => s.iter().try_for_each(|c| write!(f, "{}", c.as_char())),
        }
    }
}

/// Lexicographic on the text form; `EMPTY` sorts first.
impl Ord for FaceSeq {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (FaceSeq::Empty, FaceSeq::Empty) => Ordering::Equal,
            (FaceSeq::Empty, _) => Ordering::Less,
            (_, FaceSeq::Empty) => Ordering::Greater,
            (FaceSeq::Seq(a), FaceSeq::Seq(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for FaceSeq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Parse a face of the half cube in dimension `n`, enforcing every encoding
/// invariant.
pub fn parse_seq(text: &str, n: usize) -> Result<FaceSeq, FaceError> {
    let face = FaceSeq::parse_raw(text)?;
    if let FaceSeq::Seq(s) = &face {
        if s.len() != n {
            return Err(FaceError::BadLength {
                expected: n,
                found: s.len(),
            });
        }
    }
    face.validate()?;
    Ok(face)
}

pub type FaceId = usize;

/// All faces of the half cube in dimension `n`, grouped by dimension and
/// sorted lexicographically inside each group.
#[derive(Debug, Clone)]
pub struct FaceTable {
    n: usize,
    faces: Vec<FaceSeq>,
    kinds: Vec<FaceKind>,
    /// `dim_start[d + 1]..dim_start[d + 2]` holds the faces of dimension `d`.
    dim_start: Vec<usize>,
    index: HashMap<FaceSeq, FaceId>,
}

impl FaceTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn faces(&self) -> &[FaceSeq] {
        &self.faces
    }

    pub fn face(&self, id: FaceId) -> &FaceSeq {
        &self.faces[id]
    }

    pub fn kind(&self, id: FaceId) -> FaceKind {
        self.kinds[id]
    }

    pub fn dim(&self, id: FaceId) -> i32 {
        self.kinds[id].dim()
    }

    pub fn id_of(&self, face: &FaceSeq) -> Option<FaceId> {
        self.index.get(face).copied()
    }

    /// Face ids of dimension `d`; empty outside `-1..=n`.
    pub fn ids_of_dim(&self, d: i32) -> Range<FaceId> {
        if d < -1 || d > self.n as i32 {
            return 0..0;
        }
        let i = (d + 1) as usize;
        self.dim_start[i]..self.dim_start[i + 1]
    }

    pub fn count(&self, d: i32) -> usize {
        self.ids_of_dim(d).len()
    }

    /// Position of a face inside its dimension block.
    pub fn local_index(&self, id: FaceId) -> usize {
        id - self.ids_of_dim(self.dim(id)).start
    }

    /// Facets of a face as ids.
    pub fn facet_ids(&self, id: FaceId) -> Vec<FaceId> {
        self.faces[id]
            .facets()
            .iter()
            .map(|g| {
                self.id_of(g)
                    .unwrap_or_else(|| panic!("facet {g} of {} missing from table", self.faces[id]))
            })
            .collect()
    }

    /// Per-dimension counts of (simplex shaped, half cube shaped) faces.
    pub fn shape_counts(&self, d: i32) -> (usize, usize) {
        self.ids_of_dim(d).fold((0, 0), |(s, h), id| match self.kinds[id] {
            FaceKind::HalfCube(_) => (s, h + 1),
            _ => (s + 1, h),
        })
    }
}

/// Enumerate every face of the half cube in dimension `n`, plus the empty
/// face.
pub fn enumerate_faces(n: usize) -> Result<FaceTable, FaceError> {
    if n < 4 {
        return Err(FaceError::NTooSmall(n));
    }
    assert!(n < 32, "ambient dimension {n} is too large to enumerate");
    let mut by_dim: Vec<Vec<FaceSeq>> = vec![Vec::new(); n + 2];
    by_dim[0].push(FaceSeq::Empty);

    let digits = |bits: u32| -> Vec<Symbol> {
        (0..n).map(|i| Symbol::plain(bits >> i & 1 == 1)).collect()
    };
    let subsets_by_size = {
        let mut v: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
        for s in 0u32..(1 << n) {
            v[s.count_ones() as usize].push(s);
        }
        v
    };

    // Vertices, then simplex shaped faces K(v', S) for odd v'.
    let mut edges = HashSet::new();
    for bits in 0u32..(1 << n) {
        let base = digits(bits);
        if bits.count_ones() % 2 == 0 {
            by_dim[1].push(FaceSeq::from_symbols(base));
            continue;
        }
        for size in 2..=n {
            for &s in &subsets_by_size[size] {
                let mut seq = base.clone();
                for (i, sym) in seq.iter_mut().enumerate() {
                    if s >> i & 1 == 1 {
                        *sym = Symbol::underlined(sym.digit().unwrap());
                    }
                }
                let face = FaceSeq::from_symbols(seq);
                if size == 2 {
                    let edge = face.canonical_edge();
                    if edges.insert(edge.clone()) {
                        by_dim[2].push(edge);
                    }
                } else {
                    by_dim[size].push(face);
                }
            }
        }
    }

    // Half cube shaped faces L(v, S): free digits off the mask.
    for size in 3..=n {
        for &s in &subsets_by_size[size] {
            for bits in 0u32..(1 << n) {
                if bits & s != 0 {
                    continue;
                }
                let seq: Vec<Symbol> = (0..n)
                    .map(|i| {
                        if s >> i & 1 == 1 {
                            Symbol::Star
                        } else {
                            Symbol::plain(bits >> i & 1 == 1)
                        }
                    })
                    .collect();
                by_dim[size + 1].push(FaceSeq::from_symbols(seq));
            }
        }
    }

    let mut faces = Vec::new();
    let mut dim_start = vec![0];
    for mut group in by_dim {
        group.sort();
        faces.extend(group);
        dim_start.push(faces.len());
    }
    let kinds = faces.iter().map(FaceSeq::kind).collect();
    let index = faces
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i))
        .collect();
    Ok(FaceTable {
        n,
        faces,
        kinds,
        dim_start,
        index,
    })
}

/// Face counts predicted by the classification of the faces of the half
/// cube, as (simplex shaped, half cube shaped) per dimension `0..=n`.
/// Vertices and edges count as simplex shaped.
pub fn expected_counts(n: usize) -> Vec<(u128, u128)> {
    let binom = |a: usize, b: usize| -> u128 {
        if b > a {
            return 0;
        }
        (0..b).fold(1u128, |acc, i| acc * (a - i) as u128 / (i as u128 + 1))
    };
    (0..=n)
        .map(|k| {
            let simplex = match k {
                0 => 1u128 << (n - 1),
                1 => (1u128 << (n - 2)) * binom(n, 2),
                _ if k < n => (1u128 << (n - 1)) * binom(n, k + 1),
                _ => 0,
            };
            let half = if k >= 3 {
                (1u128 << (n - k)) * binom(n, k)
            } else {
                0
            };
            (simplex, half)
        })
        .collect()
}

/// One line of the face interchange format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub seq: String,
    pub dim: i32,
    pub kind: String,
}

impl From<&FaceSeq> for FaceRecord {
    fn from(face: &FaceSeq) -> Self {
        let kind = face.kind();
        FaceRecord {
            seq: face.to_string(),
            dim: kind.dim(),
            kind: kind.label().to_string(),
        }
    }
}
