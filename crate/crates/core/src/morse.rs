//! The complete acyclic matching on the faces of the half cube, and the
//! Morse-boundary machinery built on top of a matching.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::chain::{ChainComplex, ChainVector};
use crate::face::{FaceId, FaceKind, FaceSeq, FaceTable, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorseError {
    #[error("partner {partner} of {face} is not a face of the table")]
    UnknownPartner { face: String, partner: String },
    #[error("pairing is not an involution at {0}")]
    InvolutionBroken(String),
    #[error("{0} and its partner {1} are not a facet/cofacet pair")]
    NotCodimOne(String, String),
    #[error("{0} is unpaired")]
    Unpaired(String),
    #[error("rules {1} and {2} do not form an inverse pair at {0}")]
    RuleMismatch(String, u8, u8),
    #[error("precedence relation at level {0} has a cycle through {1}")]
    CyclicPrec(i32, String),
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("back-substitution left a nonzero residual")]
    ResidualNonzero,
    #[error("{0} cells of dimension {1} are unpaired")]
    UnpairedCells(usize, i32),
}

fn rightmost_one(s: &[Symbol]) -> Option<usize> {
    s.iter().rposition(|x| x.is_one())
}

/// A plain `1` strictly to the right of the last mask position.
fn one_right_of_mask(s: &[Symbol]) -> bool {
    let last = s.iter().rposition(|x| !x.is_plain()).unwrap_or(0);
    s[last + 1..].contains(&Symbol::One)
}

fn replace(s: &[Symbol], i: usize, sym: Symbol) -> Vec<Symbol> {
    let mut out = s.to_vec();
    out[i] = sym;
    out
}

/// Partner of a face and the number of the rule that produced it.
///
/// `n` is only consulted for the empty face.
pub fn match_face(face: &FaceSeq, n: usize) -> (FaceSeq, u8) {
    let s = face.symbols();
    let seq = FaceSeq::from_symbols;
    match face.kind() {
        FaceKind::Empty => (seq(vec![Symbol::Zero; n]), 11),
        FaceKind::Vertex => {
            let ones: Vec<usize> = (0..s.len()).filter(|&i| s[i] == Symbol::One).collect();
            match ones.as_slice() {
                [] => (FaceSeq::Empty, 11),
                [.., second, last] => {
                    let mut y = s.to_vec();
                    y[*last] = Symbol::UndZero;
                    y[*second] = Symbol::UndOne;
                    (seq(y).canonical_edge(), 9)
                }
                [_] => unreachable!("vertex {face} has an odd number of ones"),
            }
        }
        FaceKind::Edge => {
            let p = rightmost_one(s).expect("edge without a one");
            if s[p] == Symbol::One {
                (seq(replace(s, p, Symbol::UndOne)), 7)
            } else {
                let y: Vec<Symbol> = s
                    .iter()
                    .map(|&x| if x.is_underlined() { Symbol::One } else { x })
                    .collect();
                (seq(y), 10)
            }
        }
        FaceKind::Simplex(d) => {
            let p = rightmost_one(s).expect("simplex without a one");
            if s[p] == Symbol::One {
                return (seq(replace(s, p, Symbol::UndOne)), 3);
            }
            if d >= 3 {
                return (seq(replace(s, p, Symbol::One)), 4);
            }
            let mask = face.mask();
            if s[mask[1]] == Symbol::UndOne && s[mask[2]] == Symbol::UndOne {
                let y: Vec<Symbol> = s
                    .iter()
                    .map(|&x| if x.is_underlined() { Symbol::Star } else { x })
                    .collect();
                (seq(y), 5)
            } else {
                (seq(replace(s, p, Symbol::One)).canonical_edge(), 8)
            }
        }
        FaceKind::HalfCube(d) => {
            if one_right_of_mask(s) {
                let p = rightmost_one(s).unwrap();
                return (seq(replace(s, p, Symbol::Star)), 1);
            }
            let mask = face.mask();
            if d >= 4 {
                return (seq(replace(s, *mask.last().unwrap(), Symbol::One)), 2);
            }
            let fixed_ones = s.iter().filter(|&&x| x == Symbol::One).count();
            let mut y = s.to_vec();
            y[mask[1]] = Symbol::UndOne;
            y[mask[2]] = Symbol::UndOne;
            // Two underlined ones already; the first mask digit fixes parity.
            y[mask[0]] = Symbol::underlined(fixed_ones % 2 == 0);
            (seq(y), 6)
        }
    }
}

/// Every rule whose input condition holds for `face`, evaluated rule by rule
/// without the dispatch order of [`match_face`].
pub fn rule_applicability(face: &FaceSeq) -> BTreeSet<u8> {
    let s = face.symbols();
    let kind = face.kind();
    let mut rules = BTreeSet::new();
    let last_one_underlined = rightmost_one(s).map(|p| s[p].is_underlined());
    let mask_text: String = face.mask().iter().map(|&i| s[i].as_char()).collect();
    let ones = s.iter().filter(|x| x.is_one()).count();

    if let FaceKind::HalfCube(d) = kind {
        let right = one_right_of_mask(s);
        if d >= 3 && right {
            rules.insert(1);
        }
        if d >= 4 && !right {
            rules.insert(2);
        }
        if d == 3 && !right {
            rules.insert(6);
        }
    }
    if let FaceKind::Simplex(d) = kind {
        if d >= 2 && last_one_underlined == Some(false) {
            rules.insert(3);
        }
        if d >= 3 && last_one_underlined == Some(true) {
            rules.insert(4);
        }
        if d == 2 && last_one_underlined == Some(true) {
            if mask_text == "OII" || mask_text == "III" {
                rules.insert(5);
            }
            if !mask_text.ends_with("II") {
                rules.insert(8);
            }
        }
    }
    if kind == FaceKind::Edge {
        match last_one_underlined {
            Some(false) => {
                rules.insert(7);
            }
            Some(true) => {
                rules.insert(10);
            }
            None => {}
        }
    }
    if kind == FaceKind::Vertex && ones >= 2 {
        rules.insert(9);
    }
    if kind == FaceKind::Empty || (kind == FaceKind::Vertex && ones == 0) {
        rules.insert(11);
    }
    rules
}

/// The rule applied to the partner of a face matched by `rule`.
pub fn inverse_rule(rule: u8) -> u8 {
    match rule {
        11 => 11,
        r if r % 2 == 1 => r + 1,
        r => r - 1,
    }
}

/// A (possibly partial) matching on the faces of one table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseMatching {
    partner: Vec<Option<FaceId>>,
    /// Rule applied to each face; 0 for unpaired faces.
    rule: Vec<u8>,
}

impl MorseMatching {
    /// A matching with no pairs.
    pub fn empty(table: &FaceTable) -> Self {
        MorseMatching {
            partner: vec![None; table.len()],
            rule: vec![0; table.len()],
        }
    }

    /// Wrap an arbitrary pairing. No invariants are checked here; see
    /// [`MorseMatching::validate`].
    pub fn from_parts(partner: Vec<Option<FaceId>>, rule: Vec<u8>) -> Self {
        assert_eq!(partner.len(), rule.len());
        MorseMatching { partner, rule }
    }

    pub fn partner(&self, id: FaceId) -> Option<FaceId> {
        self.partner[id]
    }

    pub fn rule(&self, id: FaceId) -> u8 {
        self.rule[id]
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    /// Number of matched pairs.
    pub fn pair_count(&self) -> usize {
        self.partner.iter().filter(|p| p.is_some()).count() / 2
    }

    /// Matched pairs as (lower face, upper face).
    pub fn pairs(&self, table: &FaceTable) -> Vec<(FaceId, FaceId)> {
        (0..self.len())
            .filter_map(|id| {
                let p = self.partner[id]?;
                (table.dim(p) > table.dim(id)).then_some((id, p))
            })
            .collect()
    }

    /// `id` is paired with a cell of one dimension higher.
    pub fn is_upward(&self, table: &FaceTable, id: FaceId) -> bool {
        self.partner[id].is_some_and(|p| table.dim(p) > table.dim(id))
    }

    pub fn is_downward(&self, table: &FaceTable, id: FaceId) -> bool {
        self.partner[id].is_some_and(|p| table.dim(p) < table.dim(id))
    }

    /// Upward-matched `k`-cells.
    pub fn e_cells(&self, table: &FaceTable, k: i32) -> Vec<FaceId> {
        table
            .ids_of_dim(k)
            .filter(|&id| self.is_upward(table, id))
            .collect()
    }

    /// Downward-matched `(k+1)`-cells.
    pub fn d_cells(&self, table: &FaceTable, k: i32) -> Vec<FaceId> {
        table
            .ids_of_dim(k + 1)
            .filter(|&id| self.is_downward(table, id))
            .collect()
    }

    /// Keep only the pairs lying entirely inside `subset`.
    pub fn restrict(&self, subset: &[bool]) -> MorseMatching {
        let mut out = self.clone();
        for id in 0..self.len() {
            let keep = subset[id] && self.partner[id].is_some_and(|p| subset[p]);
            if !keep {
                out.partner[id] = None;
                out.rule[id] = 0;
            }
        }
        out
    }

    /// Involution, codimension-one incidence and rule pairing. With
    /// `complete`, every face must also be paired.
    pub fn validate(&self, table: &FaceTable, complete: bool) -> Result<(), MorseError> {
        for id in 0..self.len() {
            let face = table.face(id);
            let Some(p) = self.partner[id] else {
                if complete {
                    return Err(MorseError::Unpaired(face.to_string()));
                }
                continue;
            };
            if p == id || self.partner[p] != Some(id) {
                return Err(MorseError::InvolutionBroken(face.to_string()));
            }
            let (lo, hi) = if table.dim(p) > table.dim(id) {
                (id, p)
            } else {
                (p, id)
            };
            if table.dim(hi) != table.dim(lo) + 1 || !table.face(hi).facets().contains(table.face(lo)) {
                return Err(MorseError::NotCodimOne(
                    face.to_string(),
                    table.face(p).to_string(),
                ));
            }
            if self.rule[p] != inverse_rule(self.rule[id]) {
                return Err(MorseError::RuleMismatch(
                    face.to_string(),
                    self.rule[id],
                    self.rule[p],
                ));
            }
        }
        Ok(())
    }

    /// JSON-lines dump, one record per face in table order.
    pub fn records<'t>(&'t self, table: &'t FaceTable) -> impl Iterator<Item = MatchRecord> + 't {
        (0..self.len()).filter_map(move |id| {
            let p = self.partner[id]?;
            Some(MatchRecord {
                face: table.face(id).to_string(),
                partner: table.face(p).to_string(),
                rule: self.rule[id],
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchRecord {
    pub face: String,
    pub partner: String,
    pub rule: u8,
}

/// Apply the matching rules to every face of the table and check the
/// result is a complete matching.
pub fn build_matching(table: &FaceTable) -> Result<MorseMatching, MorseError> {
    let mut partner = Vec::with_capacity(table.len());
    let mut rule = Vec::with_capacity(table.len());
    for face in table.faces() {
        let (y, r) = match_face(face, table.n());
        let id = table.id_of(&y).ok_or_else(|| MorseError::UnknownPartner {
            face: face.to_string(),
            partner: y.to_string(),
        })?;
        partner.push(Some(id));
        rule.push(r);
    }
    let m = MorseMatching { partner, rule };
    m.validate(table, true)?;
    Ok(m)
}

/// Unpaired cells per dimension, indexed by `dim + 1`. Only faces in
/// `subset` are counted when it is given.
pub fn morse_counts(m: &MorseMatching, table: &FaceTable, subset: Option<&[bool]>) -> Vec<usize> {
    let mut counts = vec![0; table.n() + 2];
    for id in 0..table.len() {
        if subset.is_some_and(|s| !s[id]) {
            continue;
        }
        if m.partner(id).is_none() {
            counts[(table.dim(id) + 1) as usize] += 1;
        }
    }
    counts
}

/// The modified Hasse diagram between dimensions `p` and `p + 1`: matched
/// pairs point up, every other facet relation points down.
#[derive(Debug, Clone)]
pub struct HasseDigraph {
    pub p: i32,
    pub nodes: Vec<FaceId>,
    pub edges: Vec<(FaceId, FaceId)>,
}

impl HasseDigraph {
    pub fn layer(m: &MorseMatching, table: &FaceTable, p: i32) -> Self {
        let nodes: Vec<FaceId> = table.ids_of_dim(p).chain(table.ids_of_dim(p + 1)).collect();
        let mut edges = Vec::new();
        for b in table.ids_of_dim(p + 1) {
            for a in table.facet_ids(b) {
                if m.partner(a) == Some(b) {
                    edges.push((a, b));
                } else {
                    edges.push((b, a));
                }
            }
        }
        HasseDigraph { p, nodes, edges }
    }

    /// Some directed cycle, if one exists.
    pub fn find_cycle(&self) -> Option<Vec<FaceId>> {
        let Some(&first) = self.nodes.first() else {
            return None;
        };
        let local = |id: FaceId| id - first;
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[local(a)].push(local(b));
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        let mut parent = vec![usize::MAX; self.nodes.len()];
        for start in 0..self.nodes.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if *next < adj[v].len() {
                    let w = adj[v][*next];
                    *next += 1;
                    match state[w] {
                        0 => {
                            state[w] = 1;
                            parent[w] = v;
                            stack.push((w, 0));
                        }
                        1 => {
                            let mut cycle = vec![w + first];
                            let mut u = v;
                            while u != w {
                                cycle.push(u + first);
                                u = parent[u];
                            }
                            cycle.reverse();
                            cycle.rotate_right(1);
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerReport {
    pub p: i32,
    pub nodes: usize,
    pub edges: usize,
    pub cycle: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AcyclicityReport {
    pub n: usize,
    pub layers: Vec<LayerReport>,
}

impl AcyclicityReport {
    pub fn is_acyclic(&self) -> bool {
        self.layers.iter().all(|l| l.cycle.is_none())
    }
}

/// Look for closed paths in every layer of the modified Hasse diagram.
pub fn verify_acyclic(m: &MorseMatching, table: &FaceTable) -> AcyclicityReport {
    let layers = (-1..table.n() as i32)
        .map(|p| {
            let g = HasseDigraph::layer(m, table, p);
            LayerReport {
                p,
                nodes: g.nodes.len(),
                edges: g.edges.len(),
                cycle: g.find_cycle().map(|c| {
                    c.into_iter().map(|id| table.face(id).to_string()).collect()
                }),
            }
        })
        .collect();
    AcyclicityReport {
        n: table.n(),
        layers,
    }
}

/// The boundary between downward-matched `(k+1)`-cells and upward-matched
/// `k`-cells, with the precedence order on the latter.
#[derive(Debug, Clone)]
pub struct MorseBoundary {
    pub level: i32,
    /// Upward-matched `k`-cells in topological order of the precedence
    /// relation (smaller cells first).
    pub rows: Vec<FaceId>,
    /// `cols[i]` is the partner of `rows[i]`.
    pub cols: Vec<FaceId>,
    /// Column-wise entries `(row position, incidence)`.
    pub entries: Vec<Vec<(usize, i8)>>,
    /// Precedence edges `(e', e)` meaning `e'` lies in the boundary of the
    /// partner of `e`.
    pub precedence: Vec<(FaceId, FaceId)>,
}

impl MorseBoundary {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn diagonal(&self) -> Vec<i8> {
        self.entries
            .iter()
            .enumerate()
            .map(|(j, col)| col.iter().find(|&&(r, _)| r == j).map_or(0, |&(_, v)| v))
            .collect()
    }

    /// Upper triangular with every diagonal entry equal to `±1`.
    pub fn is_unitriangular(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(j, col)| col.iter().all(|&(r, _)| r <= j))
            && self.diagonal().iter().all(|d| d.abs() == 1)
    }

    /// Determinant, read off the diagonal of a triangular matrix.
    pub fn determinant(&self) -> i64 {
        assert!(self.is_unitriangular());
        self.diagonal().iter().map(|&d| d as i64).product()
    }

    /// A `(k+1)`-chain on the downward-matched cells whose boundary is the
    /// `k`-cycle `y`. Needs a matching with no unpaired `k`-cells.
    pub fn solve_cycle(
        &self,
        y: &ChainVector,
        m: &MorseMatching,
        cx: &ChainComplex<'_>,
    ) -> Result<ChainVector, MorseError> {
        let table = cx.table();
        assert_eq!(y.dim(), self.level, "chain dimension does not match level");
        let unpaired = table
            .ids_of_dim(self.level)
            .filter(|&id| m.partner(id).is_none())
            .count();
        if unpaired > 0 {
            return Err(MorseError::UnpairedCells(unpaired, self.level));
        }
        if !cx.apply_boundary(y).is_zero() {
            return Err(MorseError::NotACycle);
        }
        let mut residual = y.clone();
        let mut f = ChainVector::zero(self.level + 1);
        for (j, &e) in self.rows.iter().enumerate().rev() {
            let c = residual.coeff(e);
            if c.is_zero() {
                continue;
            }
            let d = self.cols[j];
            let a = c * BigInt::from(cx.incidence(d, e));
            f.add_term(d, &a);
            residual.add_scaled(&-a, &cx.boundary_of_cell(d));
        }
        if !residual.is_zero() {
            return Err(MorseError::ResidualNonzero);
        }
        Ok(f)
    }
}

/// Build the Morse boundary at level `k`, ordering the upward-matched cells
/// by Kahn's algorithm with ties broken by face text.
pub fn morse_boundary(
    m: &MorseMatching,
    cx: &ChainComplex<'_>,
    k: i32,
) -> Result<MorseBoundary, MorseError> {
    let table = cx.table();
    let e_cells = m.e_cells(table, k);
    let first = table.ids_of_dim(k).start;
    let width = table.count(k);
    let mut in_e = vec![false; width];
    for &e in &e_cells {
        in_e[e - first] = true;
    }
    let mut precedence = Vec::new();
    let mut succ = vec![Vec::new(); width];
    let mut indegree = vec![0usize; width];
    for &e in &e_cells {
        let d = m.partner(e).unwrap();
        for &(g, _) in cx.boundary_of(d) {
            if g != e && in_e[g - first] {
                precedence.push((g, e));
                succ[g - first].push(e);
                indegree[e - first] += 1;
            }
        }
    }
    // Ids inside a dimension block are in text order.
    let mut ready: BinaryHeap<Reverse<FaceId>> = e_cells
        .iter()
        .filter(|&&e| indegree[e - first] == 0)
        .map(|&e| Reverse(e))
        .collect();
    let mut rows = Vec::with_capacity(e_cells.len());
    while let Some(Reverse(e)) = ready.pop() {
        rows.push(e);
        for &s in &succ[e - first] {
            indegree[s - first] -= 1;
            if indegree[s - first] == 0 {
                ready.push(Reverse(s));
            }
        }
    }
    if rows.len() < e_cells.len() {
        let stuck = e_cells
            .iter()
            .find(|&&e| indegree[e - first] > 0)
            .unwrap();
        return Err(MorseError::CyclicPrec(k, table.face(*stuck).to_string()));
    }
    let mut position = vec![usize::MAX; width];
    for (i, &e) in rows.iter().enumerate() {
        position[e - first] = i;
    }
    let cols: Vec<FaceId> = rows.iter().map(|&e| m.partner(e).unwrap()).collect();
    let entries = cols
        .iter()
        .map(|&d| {
            let mut col: Vec<(usize, i8)> = cx
                .boundary_of(d)
                .iter()
                .filter(|&&(g, _)| in_e[g - first])
                .map(|&(g, v)| (position[g - first], v))
                .collect();
            col.sort_unstable();
            col
        })
        .collect();
    Ok(MorseBoundary {
        level: k,
        rows,
        cols,
        entries,
        precedence,
    })
}

/// Convenience wrapper building the Morse boundary at the level of `y`.
pub fn solve_cycle(
    y: &ChainVector,
    m: &MorseMatching,
    cx: &ChainComplex<'_>,
) -> Result<ChainVector, MorseError> {
    morse_boundary(m, cx, y.dim())?.solve_cycle(y, m, cx)
}
