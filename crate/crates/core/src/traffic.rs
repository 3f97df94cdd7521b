//! Exact finite-N expectations of flattening words through test hypergraphs:
//! `E Phi_N(word) = sum_pi tau^0_N[T^pi]`, summed over partitions of the vertices.
//!
//! The word graph of `m_1^e1 ... m_L^eL` has vertices `(row, col)` with id
//! `row + k col`; hyperedge `l` has outputs in column `l` and inputs in column
//! `l + 1 mod L`. A hyperedge references the tensor entry `t(y_{sigma(1)}, .., y_{sigma(2k)})`
//! with `y = (outputs ‖ inputs)` for `eps = 1` and `y = (inputs ‖ outputs)`, conjugated,
//! for `eps = *`. Two hyperedges are dependent when they reference the same entry.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_algebra::GroupAlgebraElement;
use crate::perm::enumerate_group;
use crate::scalar::Real;
use crate::tensor::{Tensor, TensorModel};
use crate::word::{Eps, Letter, Word};

/// Largest vertex count `kL` accepted by [`full_trace_expect`].
pub const MAX_ORACLE_VERTICES: usize = 12;
/// Largest number of vertex labelings summed by the per-sample traces.
pub const MAX_LABELINGS: u64 = 20_000_000;
/// Class count above which weights are accumulated in log-magnitude and phase.
const LOG_PATH_CLASSES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HyperEdge {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub letter: Letter,
}

impl HyperEdge {
    /// Vertex referenced by each slot of the tensor entry.
    fn entry_slots(&self) -> Vec<usize> {
        let y: Vec<usize> = match self.letter.eps {
            Eps::One => self.outputs.iter().chain(&self.inputs).copied().collect(),
            Eps::Star => self.inputs.iter().chain(&self.outputs).copied().collect(),
        };
        (0..y.len()).map(|p| y[self.letter.sigma.apply(p)]).collect()
    }
}

/// The `*`-test hypergraph of a cyclic word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TestHypergraph {
    k: usize,
    num_vertices: usize,
    edges: Vec<HyperEdge>,
}

impl TestHypergraph {
    pub fn from_letters(k: usize, letters: &[Letter]) -> Result<Self> {
        let l = letters.len();
        if l == 0 {
            return Err(Error::InvalidInput("a test hypergraph needs at least one letter".into()));
        }
        if let Some(bad) = letters.iter().find(|x| x.sigma.degree() != 2 * k) {
            return Err(Error::DegreeMismatch { left: 2 * k, right: bad.sigma.degree() });
        }
        let edges = letters
            .iter()
            .enumerate()
            .map(|(col, letter)| HyperEdge {
                inputs: (0..k).map(|r| r + k * ((col + 1) % l)).collect(),
                outputs: (0..k).map(|r| r + k * col).collect(),
                letter: letter.clone(),
            })
            .collect();
        Ok(TestHypergraph { k, num_vertices: k * l, edges })
    }

    /// Graph of a word, with every `u_eta` absorbed into its letter.
    pub fn from_word(w: &Word) -> Result<Self> {
        Self::from_letters(w.k, &w.absorbed())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[HyperEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Id of vertex `(row, col)`, both 0-based.
    pub fn vertex(&self, row: usize, col: usize) -> usize {
        row + self.k * col
    }
}

/// Partition of `0..n` in restricted-growth form: `labels[v]` is the block of `v`,
/// blocks numbered by first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VertexPartition {
    labels: Vec<usize>,
}

impl VertexPartition {
    /// Canonicalizes arbitrary block labels.
    pub fn new(labels: &[usize]) -> Self {
        let mut map = HashMap::new();
        let labels = labels
            .iter()
            .map(|&b| {
                let next = map.len();
                *map.entry(b).or_insert(next)
            })
            .collect();
        VertexPartition { labels }
    }

    pub fn singletons(n: usize) -> Self {
        VertexPartition { labels: (0..n).collect() }
    }

    pub fn one_block(n: usize) -> Self {
        VertexPartition { labels: vec![0; n] }
    }

    /// Finest partition in which each listed pair shares a block.
    pub fn from_identifications(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::InvalidPartition(format!("vertex out of range in ({a}, {b})")));
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra.max(rb)] = ra.min(rb);
        }
        let roots: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
        Ok(Self::new(&roots))
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (v, &b) in self.labels.iter().enumerate() {
            out[b].push(v);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientEdge {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub letter: Letter,
    /// Block referenced by each slot of the tensor entry.
    pub entry: Vec<usize>,
}

/// `T^pi`: endpoints replaced by blocks, labels kept, multi-edges allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientGraph {
    pub k: usize,
    pub num_vertices: usize,
    pub edges: Vec<QuotientEdge>,
}

pub fn quotient(t: &TestHypergraph, pi: &VertexPartition) -> Result<QuotientGraph> {
    if pi.len() != t.num_vertices {
        return Err(Error::InvalidPartition(format!(
            "partition of {} points for a graph with {} vertices",
            pi.len(),
            t.num_vertices
        )));
    }
    let lab = pi.labels();
    let edges = t
        .edges
        .iter()
        .map(|e| QuotientEdge {
            inputs: e.inputs.iter().map(|&v| lab[v]).collect(),
            outputs: e.outputs.iter().map(|&v| lab[v]).collect(),
            letter: e.letter.clone(),
            entry: e.entry_slots().iter().map(|&v| lab[v]).collect(),
        })
        .collect();
    Ok(QuotientGraph { k: t.k, num_vertices: pi.num_blocks(), edges })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DependenceClass {
    pub members: Vec<usize>,
    /// Members with `eps = 1`.
    pub m: usize,
    /// Members with `eps = *`.
    pub n: usize,
}

impl DependenceClass {
    pub fn size(&self) -> usize {
        self.m + self.n
    }
}

/// Classes of hyperedges referencing the same entry, ordered by first member.
pub fn dependence_classes(q: &QuotientGraph) -> Vec<DependenceClass> {
    let mut index: HashMap<&[usize], usize> = HashMap::new();
    let mut out: Vec<DependenceClass> = Vec::new();
    for (i, e) in q.edges.iter().enumerate() {
        let c = *index.entry(&e.entry).or_insert_with(|| {
            out.push(DependenceClass { members: Vec::new(), m: 0, n: 0 });
            out.len() - 1
        });
        out[c].members.push(i);
        match e.letter.eps {
            Eps::One => out[c].m += 1,
            Eps::Star => out[c].n += 1,
        }
    }
    out
}

/// Table `E[x^m conj(x)^n]` for `m, n <= max`.
struct MomentTable {
    max: usize,
    values: Vec<Complex64>,
}

impl MomentTable {
    fn new(model: &TensorModel, n: usize, k: usize, max: usize) -> Self {
        let values = (0..=max)
            .flat_map(|a| (0..=max).map(move |b| (a, b)))
            .map(|(a, b)| model.entry_moment(a, b, n, k))
            .collect();
        MomentTable { max, values }
    }

    fn get(&self, m: usize, n: usize) -> Complex64 {
        self.values[m * (self.max + 1) + n]
    }
}

/// `N^{-k} N!/(N-b)! prod_classes E[x^m conj(x)^n]`.
fn injective_weight(counts: &[(usize, usize)], blocks: usize, n: usize, k: usize, table: &MomentTable) -> Complex64 {
    if blocks > n {
        return Complex64::zero();
    }
    let moments: Vec<Complex64> = counts.iter().map(|&(m, c)| table.get(m, c)).collect();
    if moments.iter().any(|z| z.is_zero()) {
        return Complex64::zero();
    }
    let nf = n as f64;
    if counts.len() > LOG_PATH_CLASSES {
        let mut log = -(k as f64) * nf.ln();
        let mut phase = 0.0;
        for i in 0..blocks {
            log += (nf - i as f64).ln();
        }
        for z in &moments {
            log += z.norm().ln();
            phase += z.arg();
        }
        return Complex64::from_polar(log.exp(), phase);
    }
    let falling: f64 = (0..blocks).map(|i| nf - i as f64).product();
    moments.iter().fold(Complex64::new(falling / nf.powi(k as i32), 0.0), |acc, z| acc * z)
}

/// `tau^0_N[T^pi]`: the expected normalized injective trace of a quotient.
pub fn inj_trace_expect(q: &QuotientGraph, n: usize, model: &TensorModel) -> Complex64 {
    let classes = dependence_classes(q);
    let counts: Vec<(usize, usize)> = classes.iter().map(|c| (c.m, c.n)).collect();
    let table = MomentTable::new(model, n, q.k, q.edges.len());
    injective_weight(&counts, q.num_vertices, n, q.k, &table)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FullTraceReport {
    pub exact: Complex64,
    /// Partitions whose weight was evaluated.
    pub partitions_visited: u64,
    /// Partitions skipped because their weight is known to vanish.
    pub pruned_count: u64,
}

/// Number of restricted-growth completions of `remaining` vertices after `blocks` blocks.
fn subtree_size(remaining: usize, blocks: usize, memo: &mut HashMap<(usize, usize), u64>) -> u64 {
    if remaining == 0 {
        return 1;
    }
    if let Some(&v) = memo.get(&(remaining, blocks)) {
        return v;
    }
    let v = blocks as u64 * subtree_size(remaining - 1, blocks, memo) + subtree_size(remaining - 1, blocks + 1, memo);
    memo.insert((remaining, blocks), v);
    v
}

pub fn bell(n: usize) -> u64 {
    subtree_size(n, 0, &mut HashMap::new())
}

struct Enumerator<'a> {
    n_vertices: usize,
    big_n: usize,
    k: usize,
    /// entry slots and eps per edge
    slots: Vec<(Vec<usize>, Eps)>,
    /// edges whose slots are all below a given depth
    determined_at: Vec<usize>,
    table: &'a MomentTable,
    prune: bool,
}

#[derive(Default)]
struct Tally {
    sum: Complex64,
    visited: u64,
    pruned: u64,
}

impl Enumerator<'_> {
    fn key(&self, slots: &[usize], labels: &[usize]) -> u128 {
        slots.iter().fold(0u128, |acc, &v| (acc << 4) | labels[v] as u128)
    }

    /// `(m, n)` per class over the edges in `edges`.
    fn classes(&self, edges: impl Iterator<Item = usize>, labels: &[usize]) -> Vec<(u128, usize, usize)> {
        let mut out: Vec<(u128, usize, usize)> = Vec::new();
        for e in edges {
            let (slots, eps) = &self.slots[e];
            let key = self.key(slots, labels);
            let pos = match out.iter().position(|c| c.0 == key) {
                Some(p) => p,
                None => {
                    out.push((key, 0, 0));
                    out.len() - 1
                }
            };
            match eps {
                Eps::One => out[pos].1 += 1,
                Eps::Star => out[pos].2 += 1,
            }
        }
        out
    }

    /// A centered model gives zero as soon as more singleton classes exist among the
    /// determined edges than there are undetermined edges left to pair them with.
    fn dead(&self, depth: usize, blocks: usize, labels: &[usize]) -> bool {
        if blocks > self.big_n {
            return true;
        }
        let det: Vec<usize> = (0..self.slots.len()).filter(|&e| self.determined_at[e] <= depth).collect();
        let undetermined = self.slots.len() - det.len();
        let singles = self.classes(det.into_iter(), labels).iter().filter(|c| c.1 + c.2 == 1).count();
        singles > undetermined
    }

    fn dfs(&self, labels: &mut Vec<usize>, blocks: usize, memo: &mut HashMap<(usize, usize), u64>, out: &mut Tally) {
        let depth = labels.len();
        if self.prune && self.dead(depth, blocks, labels) {
            out.pruned += subtree_size(self.n_vertices - depth, blocks, memo);
            return;
        }
        if depth == self.n_vertices {
            let counts: Vec<(usize, usize)> =
                self.classes(0..self.slots.len(), labels).into_iter().map(|c| (c.1, c.2)).collect();
            out.sum += injective_weight(&counts, blocks, self.big_n, self.k, self.table);
            out.visited += 1;
            return;
        }
        for b in 0..=blocks {
            labels.push(b);
            self.dfs(labels, blocks.max(b + 1), memo, out);
            labels.pop();
        }
    }
}

fn rgs_prefixes(depth: usize) -> Vec<(Vec<usize>, usize)> {
    let mut out = vec![(Vec::new(), 0usize)];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|(p, b)| {
                (0..=b).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    (q, b.max(x + 1))
                })
            })
            .collect();
    }
    out
}

/// `E Phi_N` of the word `m_1^e1 ... m_L^eL` as the sum of `tau^0_N[T^pi]` over all vertex
/// partitions. With `prune`, subtrees whose weights vanish for the centered model are skipped.
pub fn full_trace_expect(
    letters: &[Letter],
    k: usize,
    n: usize,
    model: &TensorModel,
    prune: bool,
) -> Result<FullTraceReport> {
    let t = TestHypergraph::from_letters(k, letters)?;
    let nv = t.num_vertices;
    if nv > MAX_ORACLE_VERTICES {
        return Err(Error::BoundExceeded { what: "oracle vertex count kL", value: nv, bound: MAX_ORACLE_VERTICES });
    }
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    model.validate()?;
    let table = MomentTable::new(model, n, k, letters.len());
    let slots: Vec<(Vec<usize>, Eps)> = t.edges.iter().map(|e| (e.entry_slots(), e.letter.eps)).collect();
    let determined_at = slots.iter().map(|(s, _)| s.iter().max().unwrap() + 1).collect();
    let en = Enumerator {
        n_vertices: nv,
        big_n: n,
        k,
        slots,
        determined_at,
        table: &table,
        prune: prune && model.is_centered(),
    };
    let tallies: Vec<Tally> = rgs_prefixes(nv.min(5))
        .into_par_iter()
        .map(|(mut labels, blocks)| {
            let mut memo = HashMap::new();
            let mut tally = Tally::default();
            en.dfs(&mut labels, blocks, &mut memo, &mut tally);
            tally
        })
        .collect();
    let mut report = FullTraceReport { exact: Complex64::zero(), partitions_visited: 0, pruned_count: 0 };
    for t in tallies {
        report.exact += t.sum;
        report.partitions_visited += t.visited;
        report.pruned_count += t.pruned;
    }
    Ok(report)
}

/// Exact `E[E_N(word)]`: the coefficient of `u_eta` is `E Phi_N(word U_eta^*)`.
pub fn cond_expect_oracle(w: &Word, n: usize, model: &TensorModel) -> Result<GroupAlgebraElement<Complex64>> {
    let mut out = GroupAlgebraElement::zero(w.k);
    for eta in enumerate_group(w.k)? {
        let shifted = w.then(&eta.inverse());
        let r = full_trace_expect(&shifted.absorbed(), w.k, n, model, true)?;
        out.add_term(&eta, r.exact);
    }
    Ok(out)
}

fn entry_of<T: Real>(t: &Tensor<T>, slots: &[usize], labels: &[usize], eps: Eps, idx: &mut [usize]) -> Complex64 {
    for (i, &v) in idx.iter_mut().zip(slots) {
        *i = labels[v];
    }
    let z = t.get(idx);
    let z = Complex64::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
    if eps.is_star() {
        z.conj()
    } else {
        z
    }
}

fn edge_slots(edges: &[HyperEdge]) -> Vec<(Vec<usize>, Eps)> {
    edges.iter().map(|e| (e.entry_slots(), e.letter.eps)).collect()
}

/// `(1/N^k) Tr[T(M)]`: the sum over all labelings `V -> [N]` of the product of referenced entries.
pub fn direct_trace<T: Real>(t: &Tensor<T>, g: &TestHypergraph) -> Result<Complex64> {
    let (n, nv) = (t.n(), g.num_vertices);
    let count = (n as u64).checked_pow(nv as u32).unwrap_or(u64::MAX);
    if count > MAX_LABELINGS {
        return Err(Error::BoundExceeded {
            what: "vertex labelings N^kL",
            value: count as usize,
            bound: MAX_LABELINGS as usize,
        });
    }
    if t.k() != g.k {
        return Err(Error::DegreeMismatch { left: t.k(), right: g.k });
    }
    let slots = edge_slots(&g.edges);
    let mut labels = vec![0usize; nv];
    let mut idx = vec![0usize; 2 * g.k];
    let mut acc = Complex64::zero();
    for _ in 0..count {
        let mut prod = Complex64::one();
        for (s, eps) in &slots {
            prod *= entry_of(t, s, &labels, *eps, &mut idx);
        }
        acc += prod;
        for l in labels.iter_mut() {
            *l += 1;
            if *l < n {
                break;
            }
            *l = 0;
        }
    }
    Ok(acc / (n as f64).powi(g.k as i32))
}

/// `(1/N^k) Tr^0[T^pi(M)]` for one tensor: the sum over injective block labelings.
pub fn injective_trace_sample<T: Real>(t: &Tensor<T>, g: &TestHypergraph, pi: &VertexPartition) -> Result<Complex64> {
    let (n, b) = (t.n(), pi.num_blocks());
    if b > n {
        return Ok(Complex64::zero());
    }
    let count = (n as u64).checked_pow(b as u32).unwrap_or(u64::MAX);
    if count > MAX_LABELINGS {
        return Err(Error::BoundExceeded {
            what: "injective labelings",
            value: count as usize,
            bound: MAX_LABELINGS as usize,
        });
    }
    let slots = edge_slots(&g.edges);
    let mut idx = vec![0usize; 2 * g.k];
    let mut labels = vec![0usize; pi.len()];
    let mut acc = Complex64::zero();
    // odometer over block values, skipping non-injective assignments
    let mut vals = vec![0usize; b];
    loop {
        let mut seen = vec![false; n];
        if vals.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
            for (v, &bl) in pi.labels().iter().enumerate() {
                labels[v] = vals[bl];
            }
            let mut prod = Complex64::one();
            for (s, eps) in &slots {
                prod *= entry_of(t, s, &labels, *eps, &mut idx);
            }
            acc += prod;
        }
        let Some(pos) = vals.iter().position(|&x| x + 1 < n) else { break };
        vals[pos] += 1;
        for x in &mut vals[..pos] {
            *x = 0;
        }
    }
    Ok(acc / (n as f64).powi(g.k as i32))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QProfile {
    /// `q(pi, l)` for `l = 0..=L`.
    pub sequence: Vec<i64>,
    pub final_q: i64,
}

/// `q(pi, l) = -k - k |skeleton edges of S_l^pi| + |vertices of S_l^pi|`, where the open strip
/// `S_l` holds the first `l` hyperedges and columns `0..=min(l, L-1)`, and skeleton edges are
/// the distinct vertex sets of its hyperedges.
pub fn q_profile(t: &TestHypergraph, pi: &VertexPartition) -> Result<QProfile> {
    let q = quotient(t, pi)?;
    let (k, l) = (t.k as i64, t.edges.len());
    let mut sequence = Vec::with_capacity(l + 1);
    for step in 0..=l {
        let last_col = step.min(l - 1);
        let mut verts: Vec<usize> =
            (0..=last_col).flat_map(|c| (0..t.k).map(move |r| r + t.k * c)).map(|v| pi.labels()[v]).collect();
        verts.sort_unstable();
        verts.dedup();
        let mut skeleton: Vec<Vec<usize>> = q.edges[..step]
            .iter()
            .map(|e| {
                let mut s: Vec<usize> = e.inputs.iter().chain(&e.outputs).copied().collect();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        skeleton.sort();
        skeleton.dedup();
        sequence.push(-k - k * skeleton.len() as i64 + verts.len() as i64);
    }
    let final_q = *sequence.last().unwrap();
    Ok(QProfile { sequence, final_q })
}

/// Exponent `-k - k |classes| + |blocks|` of `N` in the injective weight of a quotient.
pub fn injective_exponent(q: &QuotientGraph) -> i64 {
    let k = q.k as i64;
    -k - k * dependence_classes(q).len() as i64 + q.num_vertices as i64
}

/// DOT text for a quotient: blocks as nodes, each hyperedge as a box node with
/// arrows from its outputs and to its inputs.
pub fn to_dot(q: &QuotientGraph) -> String {
    let mut s = String::from("digraph quotient {\n  node [shape=circle];\n");
    for v in 0..q.num_vertices {
        let _ = writeln!(s, "  v{v};");
    }
    for (i, e) in q.edges.iter().enumerate() {
        let _ = writeln!(s, "  e{i} [shape=box, label=\"{}\"];", e.letter);
        for &o in &e.outputs {
            let _ = writeln!(s, "  v{o} -> e{i};");
        }
        for &inp in &e.inputs {
            let _ = writeln!(s, "  e{i} -> v{inp};");
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{tau, Permutation};
    use crate::tensor::{flatten, phi_n, sample_tensor, word_eval};
    use crate::RandomTensor;

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_images(v).unwrap()
    }

    #[test]
    fn graph_layout() {
        let g = TestHypergraph::from_letters(1, &[Letter::one(p(&[1, 2]))]).unwrap();
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(g.edges()[0].inputs, g.edges()[0].outputs);
        let id = Permutation::identity(6);
        let g = TestHypergraph::from_letters(3, &vec![Letter::one(id); 4]).unwrap();
        assert_eq!((g.num_vertices(), g.len()), (12, 4));
        assert_eq!(g.edges()[3].inputs, vec![0, 1, 2]);
        assert_eq!(g.edges()[1].outputs, vec![3, 4, 5]);
        assert!(TestHypergraph::from_letters(2, &[]).is_err());
    }

    #[test]
    fn partitions_canonicalize() {
        let a = VertexPartition::new(&[5, 5, 2, 7, 2]);
        assert_eq!(a.labels(), &[0, 0, 1, 2, 1]);
        assert_eq!(a.num_blocks(), 3);
        let b = VertexPartition::from_identifications(5, &[(4, 2), (1, 0)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.blocks(), vec![vec![0, 1], vec![2, 4], vec![3]]);
    }

    #[test]
    fn quotient_extremes() {
        let letters = [Letter::one(p(&[2, 3, 1, 4])), Letter::star(p(&[1, 2, 3, 4]))];
        let g = TestHypergraph::from_letters(2, &letters).unwrap();
        let q = quotient(&g, &VertexPartition::singletons(4)).unwrap();
        assert_eq!(q.num_vertices, 4);
        for (qe, e) in q.edges.iter().zip(g.edges()) {
            assert_eq!((&qe.inputs, &qe.outputs), (&e.inputs, &e.outputs));
        }
        let q = quotient(&g, &VertexPartition::one_block(4)).unwrap();
        assert!(q.edges.iter().all(|e| e.inputs.iter().chain(&e.outputs).all(|&v| v == 0)));
        assert!(quotient(&g, &VertexPartition::one_block(3)).is_err());
    }

    #[test]
    fn bell_numbers() {
        let want = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597];
        for (n, &b) in want.iter().enumerate() {
            assert_eq!(bell(n), b);
        }
    }

    #[test]
    fn pairing_word_is_exactly_one() {
        for k in 1..=3 {
            let id = Permutation::identity(2 * k);
            let w = [Letter::one(id.clone()), Letter::star(id)];
            for n in 1..=4 {
                let r = full_trace_expect(&w, k, n, &TensorModel::ComplexGinibre, true).unwrap();
                assert!((r.exact - 1.0).norm() < 1e-12, "k={k} N={n}: {}", r.exact);
            }
        }
    }

    #[test]
    fn singleton_partition_example() {
        let id = Permutation::identity(2);
        let g = TestHypergraph::from_letters(1, &[Letter::one(id.clone()), Letter::star(id)]).unwrap();
        let q = quotient(&g, &VertexPartition::singletons(2)).unwrap();
        // both edges reference the same entry: one class, N^{-2k} N!/(N-2k)! (N^k E|x|^2)
        let v = inj_trace_expect(&q, 4, &TensorModel::ComplexGinibre);
        assert!((v - 0.75).norm() < 1e-15);
        let merged = quotient(&g, &VertexPartition::one_block(2)).unwrap();
        let w = inj_trace_expect(&merged, 4, &TensorModel::ComplexGinibre);
        assert!((v + w - 1.0).norm() < 1e-15);
    }

    #[test]
    fn odd_words_vanish() {
        let s = p(&[2, 4, 1, 3]);
        let w = [Letter::one(s.clone()), Letter::star(s.clone()), Letter::one(s)];
        for model in [TensorModel::ComplexGinibre, TensorModel::RealGinibre] {
            assert_eq!(full_trace_expect(&w, 2, 3, &model, false).unwrap().exact, Complex64::zero());
        }
    }

    #[test]
    fn pruning_preserves_the_sum() {
        let s = p(&[2, 4, 1, 3]);
        let w = [Letter::one(s.clone()), Letter::star(p(&[1, 2, 3, 4])), Letter::one(tau(2)), Letter::star(s)];
        for model in
            [TensorModel::ComplexGinibre, TensorModel::RealGinibre, "diluted:p=0.4,base=rademacher".parse().unwrap()]
        {
            let a = full_trace_expect(&w, 2, 3, &model, false).unwrap();
            let b = full_trace_expect(&w, 2, 3, &model, true).unwrap();
            assert!((a.exact - b.exact).norm() < 1e-14);
            assert_eq!(a.partitions_visited, bell(8));
            assert_eq!(b.partitions_visited + b.pruned_count, bell(8));
            assert!(b.pruned_count > 0);
        }
    }

    #[test]
    fn trace_identity_for_fixed_tensor() {
        let t: RandomTensor = sample_tensor(&TensorModel::ComplexGinibre, 3, 2, 4).unwrap();
        let s = p(&[3, 1, 4, 2]);
        let letters = vec![Letter::one(s.clone()), Letter::star(p(&[2, 1, 3, 4])), Letter::one(tau(2))];
        let g = TestHypergraph::from_letters(2, &letters).unwrap();
        let w = Word::plain(2, letters).unwrap();
        let direct = direct_trace(&t, &g).unwrap();
        let viaword = phi_n(&word_eval(&t, &w).unwrap());
        assert!((direct - viaword).norm() < 1e-12);
    }

    #[test]
    fn lemma_decomposition_for_fixed_tensor() {
        let t: RandomTensor = sample_tensor(&TensorModel::RealGinibre, 3, 1, 5).unwrap();
        let letters =
            vec![Letter::one(tau(1)), Letter::star(Permutation::identity(2)), Letter::one(Permutation::identity(2))];
        let g = TestHypergraph::from_letters(1, &letters).unwrap();
        let mut sum = Complex64::zero();
        for pi in all_partitions(3) {
            sum += injective_trace_sample(&t, &g, &pi).unwrap();
        }
        let direct = direct_trace(&t, &g).unwrap();
        assert!((sum - direct).norm() <= 1e-10 * direct.norm().max(1.0));
        let m = flatten(&t, &tau(1)).unwrap();
        assert!(m.max_abs_diff(&flatten(&t, &Permutation::identity(2)).unwrap().transpose()) == 0.0);
    }

    #[test]
    fn q_profile_is_monotone_and_nonpositive() {
        let s = p(&[2, 4, 1, 3]);
        let letters = vec![Letter::one(s.clone()), Letter::star(s.clone()), Letter::one(tau(2)), Letter::star(s)];
        let g = TestHypergraph::from_letters(2, &letters).unwrap();
        for pi in all_partitions(8) {
            let prof = q_profile(&g, &pi).unwrap();
            assert!(prof.sequence[0] <= 0);
            assert!(prof.sequence.windows(2).all(|w| w[1] <= w[0]), "{pi:?}: {:?}", prof.sequence);
        }
    }

    fn all_partitions(n: usize) -> Vec<VertexPartition> {
        rgs_prefixes(n).into_iter().map(|(l, _)| VertexPartition::new(&l)).collect()
    }

    #[test]
    fn dot_export() {
        let g = TestHypergraph::from_letters(1, &[Letter::one(tau(1)), Letter::star(tau(1))]).unwrap();
        let dot = to_dot(&quotient(&g, &VertexPartition::singletons(2)).unwrap());
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("v0 -> e0") && dot.contains("e0 -> v1"));
    }
}
