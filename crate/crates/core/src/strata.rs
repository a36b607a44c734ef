//! Stable weighted graphs, their weight multisets and pairings with ψ classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactalg::Rational;
use crate::intersect::tau;
use crate::partitions::{enumerate, Partition};
use crate::pushforward::{formal_to_psi, Basis, FormalExpr};

/// Vertex of a stable weighted graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub genus: u32,
    pub markings: Vec<u32>,
}

/// Connected graph with genus-weighted vertices, markings `1..=n`, self-loops and multi-edges allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableWeightedGraph {
    vertices: Vec<Vertex>,
    edges: Vec<(usize, usize)>,
}

impl StableWeightedGraph {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::NotRealizable("graph has no vertices".into()));
        }
        for &(a, b) in &edges {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(Error::NotRealizable(format!(
                    "edge ({a}, {b}) out of range"
                )));
            }
        }
        let mut labels: Vec<u32> = vertices
            .iter()
            .flat_map(|v| v.markings.iter().copied())
            .collect();
        labels.sort_unstable();
        if labels.iter().enumerate().any(|(i, &l)| l != i as u32 + 1) {
            return Err(Error::NotRealizable(format!(
                "markings {labels:?} do not partition 1..={}",
                labels.len()
            )));
        }
        let graph = StableWeightedGraph { vertices, edges };
        for (i, v) in graph.vertices.iter().enumerate() {
            if 2 * v.genus as usize + v.markings.len() + graph.degree(i) <= 2 {
                return Err(Error::NotRealizable(format!("vertex {i} is unstable")));
            }
        }
        if !graph.is_connected() {
            return Err(Error::NotRealizable("graph is disconnected".into()));
        }
        Ok(graph)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn markings(&self) -> u32 {
        self.vertices.iter().map(|v| v.markings.len() as u32).sum()
    }

    /// Degree of vertex `i`; a self-loop counts twice.
    pub fn degree(&self, i: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| (a == i) as usize + (b == i) as usize)
            .sum()
    }

    /// `sum g_v + |E| - |V| + 1`.
    pub fn genus(&self) -> u32 {
        let g: u32 = self.vertices.iter().map(|v| v.genus).sum();
        g + self.edges.len() as u32 + 1 - self.vertices.len() as u32
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                let other = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// The modified weight multiset `{(g_v, |I_v| + d_v)}`.
    pub fn theta(&self) -> ThetaMultiset {
        let entries = (0..self.vertices.len())
            .map(|i| {
                (
                    self.vertices[i].genus,
                    (self.vertices[i].markings.len() + self.degree(i)) as u32,
                )
            })
            .collect();
        ThetaMultiset::new(entries).expect("stable vertices give stable entries")
    }
}

/// Multiset of pairs `(g_i, m_i)` with `2 g_i + m_i > 2`, stored in decreasing order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThetaMultiset(Vec<(u32, u32)>);

impl ThetaMultiset {
    pub fn new(mut entries: Vec<(u32, u32)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::NotRealizable("empty multiset".into()));
        }
        if let Some(&(g, m)) = entries.iter().find(|&&(g, m)| 2 * g + m <= 2) {
            return Err(Error::Unstable {
                genus: g,
                markings: m,
            });
        }
        entries.sort_unstable_by(|a, b| b.cmp(a));
        Ok(ThetaMultiset(entries))
    }

    /// The one-vertex multiset `{(g, n)}` of the fundamental class.
    pub fn fundamental(genus: u32, markings: u32) -> Result<Self> {
        ThetaMultiset::new(vec![(genus, markings)])
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum (3 g_i - 3 + m_i)`.
    pub fn dim(&self) -> u32 {
        self.0.iter().map(|&(g, m)| 3 * g + m - 3).sum()
    }

    pub fn genus_sum(&self) -> u32 {
        self.0.iter().map(|e| e.0).sum()
    }

    pub fn weight_sum(&self) -> u32 {
        self.0.iter().map(|e| e.1).sum()
    }

    /// Edge count `(sum m_i - n) / 2` for ambient `n`, if integral and non-negative.
    pub fn edges(&self, markings: u32) -> Option<u32> {
        let w = self.weight_sum();
        (w >= markings && (w - markings).is_multiple_of(2)).then(|| (w - markings) / 2)
    }

    /// Whether `q = q_G` for some stable weighted graph of type `(g, n)`.
    pub fn is_realizable(&self, genus: u32, markings: u32) -> bool {
        let Some(e) = self.edges(markings) else {
            return false;
        };
        let k = self.0.len() as u32;
        if self.genus_sum() + e + 1 != genus + k {
            return false;
        }
        if k == 1 {
            return true;
        }
        // a tree on k vertices plus loops and multi-edges with degrees 1 <= d_i <= m_i
        e + 1 >= k
            && self.0.iter().all(|&(_, m)| m >= 1)
            && k <= 2 * e
            && 2 * e <= self.weight_sum()
    }
}

impl fmt::Display for ThetaMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(g, m)| format!("({g},{m})")).collect();
        write!(f, "{}", parts.join("|"))
    }
}

impl fmt::Debug for ThetaMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self)
    }
}

impl FromStr for ThetaMultiset {
    type Err = Error;

    /// Parses `(1,1)|(0,3)`.
    fn from_str(s: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for item in s.split('|') {
            let item = item.trim();
            let inner = item
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("expected `(g,m)`, got `{item}`")))?;
            let (g, m) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected `(g,m)`, got `{item}`")))?;
            let g = g
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad genus in `{item}`")))?;
            let m = m
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad weight in `{item}`")))?;
            entries.push((g, m));
        }
        ThetaMultiset::new(entries)
    }
}

impl Serialize for ThetaMultiset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn check_space(genus: u32, markings: u32, d: u32) -> Result<u32> {
    if 2 * genus + markings <= 2 {
        return Err(Error::Unstable { genus, markings });
    }
    let dim = 3 * genus + markings - 3;
    if d > dim {
        return Err(Error::Precondition(format!(
            "degree {d} exceeds dim M_{{{genus},{markings}}} = {dim}"
        )));
    }
    Ok(dim)
}

/// `Q(d; g, n)`: weight multisets of stable graphs of type `(g, n)` with `3g - 3 + n - d` edges.
///
/// Candidates with the right genus and weight totals are filtered by
/// [`ThetaMultiset::is_realizable`]. Output is sorted.
pub fn enum_q(d: u32, genus: u32, markings: u32) -> Result<Vec<ThetaMultiset>> {
    if genus > 2 {
        return Err(Error::UnsupportedGenus(genus));
    }
    let dim = check_space(genus, markings, d)?;
    let e = dim - d;
    let mut out = Vec::new();
    for k in 1..=e + 1 {
        if genus + k < e + 1 {
            continue;
        }
        let genus_total = genus + k - 1 - e;
        let weight_total = markings + 2 * e;
        let mut cur = Vec::new();
        candidates(
            k,
            genus_total,
            weight_total,
            (u32::MAX, u32::MAX),
            &mut cur,
            &mut |entries| {
                let q = ThetaMultiset(entries.to_vec());
                if q.is_realizable(genus, markings) {
                    out.push(q);
                }
            },
        );
    }
    out.sort();
    Ok(out)
}

/// Non-increasing sequences of `k` stable pairs bounded by `prev` with the given totals.
fn candidates(
    k: u32,
    genus_total: u32,
    weight_total: u32,
    prev: (u32, u32),
    cur: &mut Vec<(u32, u32)>,
    emit: &mut dyn FnMut(&[(u32, u32)]),
) {
    if k == 0 {
        if genus_total == 0 && weight_total == 0 {
            emit(cur);
        }
        return;
    }
    for g in (0..=genus_total.min(prev.0)).rev() {
        let m_max = if g == prev.0 {
            weight_total.min(prev.1)
        } else {
            weight_total
        };
        for m in (0..=m_max).rev() {
            if 2 * g + m <= 2 {
                continue;
            }
            cur.push((g, m));
            candidates(k - 1, genus_total - g, weight_total - m, (g, m), cur, emit);
            cur.pop();
        }
    }
}

/// `Q(d; g, n)` by explicit graph degeneration, kept as an oracle for [`enum_q`].
///
/// Starting from the one-vertex graph, every stable graph is reached by repeatedly
/// adding a self-loop at a vertex of positive genus or splitting a vertex in two.
/// Either move only sees the vertex's genus and valence, so one witness graph per
/// weight multiset suffices.
pub fn enum_q_brute_force(d: u32, genus: u32, markings: u32) -> Result<Vec<ThetaMultiset>> {
    let dim = check_space(genus, markings, d)?;
    let root = StableWeightedGraph::new(
        vec![Vertex {
            genus,
            markings: (1..=markings).collect(),
        }],
        Vec::new(),
    )?;
    let mut level: BTreeMap<ThetaMultiset, StableWeightedGraph> =
        BTreeMap::from([(root.theta(), root)]);
    for _ in 0..dim - d {
        let mut next = BTreeMap::new();
        for graph in level.values() {
            for child in degenerations(graph) {
                assert_eq!(child.genus(), genus);
                next.entry(child.theta()).or_insert(child);
            }
        }
        level = next;
    }
    Ok(level.into_keys().collect())
}

#[derive(Clone, Copy)]
enum Item {
    Marking(u32),
    HalfEdge(usize, bool),
}

fn degenerations(graph: &StableWeightedGraph) -> Vec<StableWeightedGraph> {
    let mut out = Vec::new();
    for v in 0..graph.vertices.len() {
        let gv = graph.vertices[v].genus;
        if gv >= 1 {
            let mut vertices = graph.vertices.clone();
            vertices[v].genus -= 1;
            let mut edges = graph.edges.clone();
            edges.push((v, v));
            out.push(StableWeightedGraph::new(vertices, edges).expect("loop keeps stability"));
        }
        let mut items: Vec<Item> = graph.vertices[v]
            .markings
            .iter()
            .map(|&l| Item::Marking(l))
            .collect();
        for (i, &(a, b)) in graph.edges.iter().enumerate() {
            if a == v {
                items.push(Item::HalfEdge(i, false));
            }
            if b == v {
                items.push(Item::HalfEdge(i, true));
            }
        }
        for g1 in 0..=gv {
            for a in 0..=items.len() {
                let (g2, b) = (gv - g1, items.len() - a);
                if 2 * g1 as usize + a < 2 || 2 * g2 as usize + b < 2 {
                    continue;
                }
                let w = graph.vertices.len();
                let mut vertices = graph.vertices.clone();
                vertices[v] = Vertex {
                    genus: g1,
                    markings: Vec::new(),
                };
                vertices.push(Vertex {
                    genus: g2,
                    markings: Vec::new(),
                });
                let mut edges = graph.edges.clone();
                for (idx, item) in items.iter().enumerate() {
                    let target = if idx < a { v } else { w };
                    match *item {
                        Item::Marking(l) => vertices[target].markings.push(l),
                        Item::HalfEdge(e, false) => edges[e].0 = target,
                        Item::HalfEdge(e, true) => edges[e].1 = target,
                    }
                }
                edges.push((v, w));
                out.push(StableWeightedGraph::new(vertices, edges).expect("split keeps stability"));
            }
        }
    }
    out
}

/// The genus-1 family: `q_0(n) = {(0, n_i + 2)}` and `q_l(n) = {(1, l)} ∪ q_0(n)` for `l >= 1`.
///
/// The ambient space is `M_{1, l + d(n)}`.
pub fn genus1_q(l: u32, n: &Partition) -> Result<ThetaMultiset> {
    if l == 0 && n.is_empty() {
        return Err(Error::Precondition(
            "q_0 needs a non-empty partition".into(),
        ));
    }
    let mut entries: Vec<(u32, u32)> = n.parts().iter().map(|&a| (0, a + 2)).collect();
    if l >= 1 {
        entries.push((1, l));
    }
    ThetaMultiset::new(entries)
}

/// The partition `{3 g_i - 3 + m_i}`, zero parts dropped.
pub fn p_map(q: &ThetaMultiset) -> Partition {
    Partition::new(q.0.iter().map(|&(g, m)| 3 * g + m - 3).collect())
}

/// Tree-shaped dual graph: all genus on vertices and `E = k - 1`.
pub fn is_compact_type(q: &ThetaMultiset, genus: u32, markings: u32) -> bool {
    q.genus_sum() == genus && q.edges(markings) == Some(q.len() as u32 - 1)
}

/// Reads `q0 ∈ Q(d; 0, n + 2g)` as a multiset for `(g, n)`.
///
/// Gluing `g` pairs of markings leaves every vertex's genus and valence unchanged.
pub fn lift_multiset(q0: &ThetaMultiset, genus: u32, markings: u32) -> Result<ThetaMultiset> {
    if !q0.is_realizable(0, markings + 2 * genus) {
        return Err(Error::NotRealizable(format!(
            "{q0} is not in Q(0, {})",
            markings + 2 * genus
        )));
    }
    if !q0.is_realizable(genus, markings) {
        return Err(Error::NotRealizable(format!(
            "{q0} is not in Q({genus}, {markings})"
        )));
    }
    Ok(q0.clone())
}

/// Pairing of the pushforward of `prod ψ_{n+j}^{a_j}` from `M_{g, n + |a|}` with `[q]`.
///
/// Sums over assignments of the extra points to the entries of `q`. An entry
/// receiving the set `S` contributes `<prod_{j in S} τ_{a_j} τ_0^{m_i}>_{g_i}`,
/// which vanishes unless `sum_{j in S} (a_j - 1) = 3 g_i - 3 + m_i`.
pub fn pair_exponents(exps: &[u32], q: &ThetaMultiset) -> Result<Rational> {
    let budgets: Vec<i64> =
        q.0.iter()
            .map(|&(g, m)| 3 * g as i64 + m as i64 - 3)
            .collect();
    if exps.iter().map(|&a| a as i64 - 1).sum::<i64>() != budgets.iter().sum::<i64>() {
        return Ok(Rational::zero());
    }
    let mut order: Vec<usize> = (0..exps.len()).collect();
    // large exponents first so budgets prune early
    order.sort_by(|&i, &j| exps[j].cmp(&exps[i]));
    // zero exponents still to come, each able to raise one budget by one
    let mut zeros_after = vec![0i64; order.len()];
    for pos in (0..order.len().saturating_sub(1)).rev() {
        zeros_after[pos] = zeros_after[pos + 1] + (exps[order[pos + 1]] == 0) as i64;
    }
    let mut assigned: Vec<Vec<u32>> = vec![Vec::new(); q.len()];
    let mut remaining = budgets;
    let mut total = Rational::zero();
    let walk = Walk {
        exps,
        order: &order,
        zeros_after: &zeros_after,
        q,
    };
    walk.assign(0, &mut assigned, &mut remaining, &mut total)?;
    Ok(total)
}

struct Walk<'a> {
    exps: &'a [u32],
    order: &'a [usize],
    zeros_after: &'a [i64],
    q: &'a ThetaMultiset,
}

impl Walk<'_> {
    fn assign(
        &self,
        pos: usize,
        assigned: &mut [Vec<u32>],
        remaining: &mut [i64],
        total: &mut Rational,
    ) -> Result<()> {
        let q = self.q;
        if pos == self.order.len() {
            if remaining.iter().any(|&r| r != 0) {
                return Ok(());
            }
            let mut product = Rational::one();
            for (i, &(g, m)) in q.0.iter().enumerate() {
                let mut e = assigned[i].clone();
                e.extend(std::iter::repeat_n(0, m as usize));
                product *= tau(g, &e)?;
                if product.is_zero() {
                    return Ok(());
                }
            }
            *total += product;
            return Ok(());
        }
        let a = self.exps[self.order[pos]];
        let cost = a as i64 - 1;
        for i in 0..q.len() {
            if remaining[i] - cost < -self.zeros_after[pos] {
                continue;
            }
            remaining[i] -= cost;
            assigned[i].push(a);
            self.assign(pos + 1, assigned, remaining, total)?;
            assigned[i].pop();
            remaining[i] += cost;
        }
        Ok(())
    }
}

/// `<ψ(p), q>` on `M_{g,n}`.
pub fn pair_psi(p: &Partition, q: &ThetaMultiset, genus: u32, markings: u32) -> Result<Rational> {
    if p.sum() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "d({p}) = {} but dim {q} = {}",
            p.sum(),
            q.dim()
        )));
    }
    if !q.is_realizable(genus, markings) {
        return Err(Error::NotRealizable(format!(
            "{q} is not in Q({genus}, {markings})"
        )));
    }
    let exps: Vec<u32> = p.parts().iter().map(|a| a + 1).collect();
    pair_exponents(&exps, q)
}

/// Linear extension of the pairing to formal expressions in any basis.
pub fn pair_formal(
    phi: &FormalExpr,
    basis: Basis,
    q: &ThetaMultiset,
    genus: u32,
    markings: u32,
) -> Result<Rational> {
    if phi.degree() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "degree {} but dim {q} = {}",
            phi.degree(),
            q.dim()
        )));
    }
    let c0 = Rational::from_integer((2 * genus as i64 - 2 + markings as i64).into());
    let psi = formal_to_psi(phi, basis, &c0)?;
    let mut total = Rational::zero();
    for (p, c) in psi.coeffs() {
        total += c * pair_psi(p, q, genus, markings)?;
    }
    Ok(total)
}

/// Rational combination of multisets in a common `Q(d; g, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KTrivialCycle {
    d: u32,
    genus: u32,
    markings: u32,
    terms: BTreeMap<ThetaMultiset, Rational>,
}

impl KTrivialCycle {
    pub fn new(d: u32, genus: u32, markings: u32) -> Self {
        KTrivialCycle {
            d,
            genus,
            markings,
            terms: BTreeMap::new(),
        }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn markings(&self) -> u32 {
        self.markings
    }

    pub fn terms(&self) -> &BTreeMap<ThetaMultiset, Rational> {
        &self.terms
    }

    pub fn add_term(&mut self, q: ThetaMultiset, c: Rational) -> Result<()> {
        if q.dim() != self.d || !q.is_realizable(self.genus, self.markings) {
            return Err(Error::MixedAmbient(format!(
                "{q} is not in Q({}; {}, {})",
                self.d, self.genus, self.markings
            )));
        }
        if c.is_zero() {
            return Ok(());
        }
        let slot = self.terms.entry(q.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&q);
        }
        Ok(())
    }

    /// `sum a_i <ψ(p), q_i>`.
    pub fn pair_psi(&self, p: &Partition) -> Result<Rational> {
        let mut total = Rational::zero();
        for (q, c) in &self.terms {
            total += c * pair_psi(p, q, self.genus, self.markings)?;
        }
        Ok(total)
    }
}

impl fmt::Display for KTrivialCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(q, c)| format!("{}*{{{q}}}", crate::exactalg::fmt_rational(c)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Ratio between bracket pairings on lifted multisets in genus `g` and on the
/// same multisets in genus 0 with `n + 2g` markings.
///
/// Returns the common ratio if one exists over all `p ∈ P(d)` and `q0 ∈ Q(d; 0, n + 2g)`
/// with a nonzero genus-0 pairing, and `None` if the ratios disagree or no pair qualifies.
pub fn gluing_constant(d: u32, genus: u32, markings: u32) -> Result<Option<Rational>> {
    let n0 = markings + 2 * genus;
    let mut ratio: Option<Rational> = None;
    let mut seen = BTreeSet::new();
    for q0 in enum_q(d, 0, n0)? {
        let Ok(q) = lift_multiset(&q0, genus, markings) else {
            continue;
        };
        for p in enumerate(d) {
            let unit = FormalExpr::unit(p);
            let base = pair_formal(&unit, Basis::Bracket, &q0, 0, n0)?;
            if base.is_zero() {
                continue;
            }
            let r = pair_formal(&unit, Basis::Bracket, &q, genus, markings)? / base;
            seen.insert(r.clone());
            ratio = Some(r);
        }
    }
    Ok(if seen.len() == 1 { ratio } else { None })
}
