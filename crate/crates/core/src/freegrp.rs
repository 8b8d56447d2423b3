//! Free-group machinery: reduced words, folded subgroup graphs, finite
//! permutation quotients, coset products, and the deterministic search for a
//! quotient separating a family of coset products from the identity.
//!
//! Also the translation from total spaces over a bouquet: horizontal
//! subgroups, connecting words, and the double-coset products whose
//! separation forces strictness of induced covers.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::CellId;
use crate::error::Error;
use crate::gos::{horizontal_graph, horizontal_path, HorizontalStep, TotalSpace};

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

/// A word over generators `1..=rank`; negative entries are inverses.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<i32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn gen(j: usize) -> Self {
        Word(vec![j as i32 + 1])
    }

    /// Free reduction; idempotent.
    pub fn reduce(&self) -> Word {
        let mut out: Vec<i32> = Vec::with_capacity(self.0.len());
        for &x in &self.0 {
            if x == 0 {
                continue;
            }
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|x| -x).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v).reduce()
    }

    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Letters `a..z`, capitals for inverses.
    pub fn parse(s: &str) -> Result<Word, Error> {
        let mut out = Vec::new();
        for ch in s.chars() {
            if ch.is_ascii_lowercase() {
                out.push((ch as i32) - ('a' as i32) + 1);
            } else if ch.is_ascii_uppercase() {
                out.push(-((ch as i32) - ('A' as i32) + 1));
            } else if !ch.is_whitespace() {
                return Err(Error::InvalidWord(format!("unexpected character `{ch}`")));
            }
        }
        Ok(Word(out))
    }

    pub fn display(&self) -> String {
        self.0
            .iter()
            .map(|&x| {
                let j = (x.unsigned_abs() - 1) as u8;
                if x > 0 {
                    (b'a' + j) as char
                } else {
                    (b'A' + j) as char
                }
            })
            .collect()
    }
}

/// Steps of a horizontal path, read as a word: a forward crossing of the
/// loop `g{j}` contributes generator `j`.
pub fn word_of_steps(steps: &[HorizontalStep]) -> Result<Word, Error> {
    let mut out = Vec::new();
    for s in steps {
        let j: i32 = s
            .label
            .strip_prefix('g')
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::InvalidInput(format!("edge `{}` is not a bouquet loop", s.label)))?;
        out.push(if s.forward { j } else { -j });
    }
    Ok(Word(out).reduce())
}

// ---------------------------------------------------------------------------
// Stallings graphs
// ---------------------------------------------------------------------------

/// Folded, based, labeled graph of a finitely generated subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallingsGraph {
    pub rank: usize,
    pub base: usize,
    /// out[v][j] = target of the j-labeled edge leaving v
    pub out: Vec<Vec<Option<usize>>>,
    /// inn[v][j] = source of the j-labeled edge entering v
    pub inn: Vec<Vec<Option<usize>>>,
}

impl StallingsGraph {
    pub fn trivial(rank: usize) -> Self {
        StallingsGraph { rank, base: 0, out: vec![vec![None; rank]], inn: vec![vec![None; rank]] }
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    /// Wedge of subdivided loops, folded to completion.
    pub fn from_generators(rank: usize, gens: &[Word]) -> Result<Self, Error> {
        for g in gens {
            if g.max_generator() > rank {
                return Err(Error::InvalidWord(format!(
                    "generator uses letter beyond rank {rank}"
                )));
            }
        }
        let mut b = RawGraph::new(rank);
        let base = b.new_vertex();
        for g in gens {
            let w = g.reduce();
            if w.0.is_empty() {
                continue;
            }
            let mut cur = base;
            for (i, &x) in w.0.iter().enumerate() {
                let next = if i + 1 == w.0.len() { base } else { b.new_vertex() };
                if x > 0 {
                    b.add_edge(cur, (x - 1) as usize, next);
                } else {
                    b.add_edge(next, (-x - 1) as usize, cur);
                }
                cur = next;
            }
        }
        Ok(b.fold(base))
    }

    /// A labeled graph given explicitly, folded.
    pub fn from_labeled_edges(
        rank: usize,
        vertices: usize,
        edges: &[(usize, usize, usize)], // (from, label, to)
        base: usize,
    ) -> Self {
        let mut b = RawGraph::new(rank);
        for _ in 0..vertices {
            b.new_vertex();
        }
        for &(u, j, v) in edges {
            b.add_edge(u, j, v);
        }
        b.fold(base)
    }

    /// Trace a reduced word from `from`; `None` when the trace leaves the graph.
    pub fn trace(&self, from: usize, w: &Word) -> Option<usize> {
        let mut cur = from;
        for &x in &w.reduce().0 {
            cur = if x > 0 {
                self.out[cur][(x - 1) as usize]?
            } else {
                self.inn[cur][(-x - 1) as usize]?
            };
        }
        Some(cur)
    }

    /// Membership of a word in the subgroup.
    pub fn member(&self, w: &Word) -> bool {
        self.trace(self.base, w) == Some(self.base)
    }

    /// A spanning tree from the base: per vertex, the word labeling the tree
    /// path from the base.
    fn tree_words(&self) -> Vec<Option<Word>> {
        let mut words: Vec<Option<Word>> = vec![None; self.vertex_count()];
        words[self.base] = Some(Word::empty());
        let mut queue = VecDeque::from([self.base]);
        while let Some(v) = queue.pop_front() {
            let wv = words[v].clone().unwrap();
            for j in 0..self.rank {
                if let Some(u) = self.out[v][j] {
                    if words[u].is_none() {
                        words[u] = Some(wv.concat(&Word(vec![j as i32 + 1])));
                        queue.push_back(u);
                    }
                }
                if let Some(u) = self.inn[v][j] {
                    if words[u].is_none() {
                        words[u] = Some(wv.concat(&Word(vec![-(j as i32 + 1)])));
                        queue.push_back(u);
                    }
                }
            }
        }
        words
    }

    /// A free generating set read off a spanning tree.
    pub fn subgroup_generators(&self) -> Vec<Word> {
        let words = self.tree_words();
        let mut gens = Vec::new();
        let mut seen_tree: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
        // reconstruct tree edges: those used by tree words
        for (v, wv) in words.iter().enumerate() {
            let Some(wv) = wv else { continue };
            if let Some(&last) = wv.0.last() {
                let mut prefix = wv.clone();
                prefix.0.pop();
                let u = self.trace(self.base, &prefix).unwrap();
                if last > 0 {
                    seen_tree.insert((u, (last - 1) as usize, v));
                } else {
                    seen_tree.insert((v, (-last - 1) as usize, u));
                }
            }
        }
        for u in 0..self.vertex_count() {
            for j in 0..self.rank {
                if let Some(v) = self.out[u][j] {
                    if words[u].is_none() || words[v].is_none() {
                        continue;
                    }
                    if seen_tree.contains(&(u, j, v)) {
                        continue;
                    }
                    let w = words[u]
                        .clone()
                        .unwrap()
                        .concat(&Word(vec![j as i32 + 1]))
                        .concat(&words[v].clone().unwrap().inverse());
                    if !w.0.is_empty() {
                        gens.push(w);
                    }
                }
            }
        }
        gens
    }
}

struct RawGraph {
    rank: usize,
    out: Vec<Vec<(usize, usize)>>, // (label, target)
    inn: Vec<Vec<(usize, usize)>>, // (label, source)
}

impl RawGraph {
    fn new(rank: usize) -> Self {
        RawGraph { rank, out: Vec::new(), inn: Vec::new() }
    }

    fn new_vertex(&mut self) -> usize {
        self.out.push(Vec::new());
        self.inn.push(Vec::new());
        self.out.len() - 1
    }

    fn add_edge(&mut self, u: usize, label: usize, v: usize) {
        self.out[u].push((label, v));
        self.inn[v].push((label, u));
    }

    /// Stallings folding by repeated merging of same-label siblings.
    fn fold(self, base: usize) -> StallingsGraph {
        let n = self.out.len();
        let mut dsu: Vec<usize> = (0..n).collect();
        fn find(dsu: &mut [usize], mut i: usize) -> usize {
            while dsu[i] != i {
                dsu[i] = dsu[dsu[i]];
                i = dsu[i];
            }
            i
        }
        loop {
            let mut merged = false;
            for v in 0..n {
                if find(&mut dsu, v) != v {
                    continue;
                }
                // collect current edges at the class representative
                let mut out_by_label: BTreeMap<usize, usize> = BTreeMap::new();
                let mut inn_by_label: BTreeMap<usize, usize> = BTreeMap::new();
                let members: Vec<usize> =
                    (0..n).filter(|&u| find(&mut dsu, u) == v).collect();
                for &m in &members {
                    for &(l, t) in &self.out[m] {
                        let t = find(&mut dsu, t);
                        if let Some(prev) = out_by_label.insert(l, t) {
                            if prev != t {
                                let (a, b) = (prev.min(t), prev.max(t));
                                dsu[b] = a;
                                merged = true;
                            }
                        }
                    }
                    for &(l, s) in &self.inn[m] {
                        let s = find(&mut dsu, s);
                        if let Some(prev) = inn_by_label.insert(l, s) {
                            if prev != s {
                                let (a, b) = (prev.min(s), prev.max(s));
                                dsu[b] = a;
                                merged = true;
                            }
                        }
                    }
                }
            }
            if !merged {
                break;
            }
        }
        // compact classes
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut dsu, i);
            let next = remap.len();
            remap.entry(r).or_insert(next);
        }
        let m = remap.len();
        let mut out = vec![vec![None; self.rank]; m];
        let mut inn = vec![vec![None; self.rank]; m];
        for u in 0..n {
            let cu = remap[&find(&mut dsu, u)];
            for &(l, t) in &self.out[u].clone() {
                let ct = remap[&find(&mut dsu, t)];
                out[cu][l] = Some(ct);
                inn[ct][l] = Some(cu);
            }
        }
        StallingsGraph { rank: self.rank, base: remap[&find(&mut dsu, base)], out, inn }
    }
}

// ---------------------------------------------------------------------------
// Finite quotients
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Perm(pub Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut out = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            out[x] = i;
        }
        Perm(out)
    }

    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Perm {
        let mut p: Vec<usize> = (0..n).collect();
        for c in cycles {
            for i in 0..c.len() {
                p[c[i]] = c[(i + 1) % c.len()];
            }
        }
        Perm(p)
    }
}

pub const MAX_QUOTIENT_SIZE: usize = 100_000;

/// Generator images in a symmetric group plus the generated element table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteQuotient {
    pub rank: usize,
    pub degree: usize,
    pub gens: Vec<Perm>,
    pub elements: Vec<Perm>,
    #[serde(skip)]
    index: HashMap<Perm, usize>,
}

impl PartialEq for FiniteQuotient {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.degree == other.degree && self.gens == other.gens
    }
}

impl FiniteQuotient {
    pub fn new(rank: usize, degree: usize, gens: Vec<Perm>) -> Result<Self, Error> {
        if gens.len() != rank {
            return Err(Error::InvalidInput("one generator image per generator".into()));
        }
        for g in &gens {
            if g.0.len() != degree {
                return Err(Error::InvalidInput("permutation degree mismatch".into()));
            }
            let mut seen = vec![false; degree];
            for &x in &g.0 {
                if x >= degree || seen[x] {
                    return Err(Error::InvalidInput("not a permutation".into()));
                }
                seen[x] = true;
            }
        }
        // close under products
        let id = Perm::identity(degree);
        let mut elements = vec![id.clone()];
        let mut index: HashMap<Perm, usize> = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let cur = elements[i].clone();
            for g in &gens {
                for h in [g.clone(), g.inverse()] {
                    let next = h.compose(&cur);
                    if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(next.clone())
                    {
                        let k = elements.len();
                        if k >= MAX_QUOTIENT_SIZE {
                            return Err(Error::SizeBound(format!(
                                "quotient exceeds {MAX_QUOTIENT_SIZE} elements"
                            )));
                        }
                        elements.push(next);
                        slot.insert(k);
                        queue.push_back(k);
                    }
                }
            }
        }
        Ok(FiniteQuotient { rank, degree, gens, elements, index })
    }

    pub fn rebuild_index(&mut self) {
        self.index = self.elements.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity_index(&self) -> usize {
        self.index[&Perm::identity(self.degree)]
    }

    pub fn element_index(&self, p: &Perm) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Image of a word.
    pub fn image_of_word(&self, w: &Word) -> Result<Perm, Error> {
        if w.max_generator() > self.rank {
            return Err(Error::InvalidWord("word uses letter beyond quotient rank".into()));
        }
        let mut acc = Perm::identity(self.degree);
        for &x in &w.0 {
            let g = &self.gens[(x.unsigned_abs() - 1) as usize];
            let step = if x > 0 { g.clone() } else { g.inverse() };
            acc = acc.compose(&step);
        }
        Ok(acc)
    }

    /// Indices of the subgroup of `Q` generated by the images of a free
    /// generating set of `H`.
    pub fn image_of_subgroup(&self, h: &StallingsGraph) -> Result<BTreeSet<usize>, Error> {
        let mut gens = Vec::new();
        for w in h.subgroup_generators() {
            gens.push(self.image_of_word(&w)?);
        }
        let mut set: BTreeSet<usize> = BTreeSet::from([self.identity_index()]);
        let mut queue: VecDeque<usize> = set.iter().copied().collect();
        while let Some(i) = queue.pop_front() {
            let cur = &self.elements[i];
            for g in &gens {
                for h in [g.clone(), g.inverse()] {
                    let next = h.compose(cur);
                    let k = self.index[&next];
                    if set.insert(k) {
                        queue.push_back(k);
                    }
                }
            }
        }
        Ok(set)
    }

    /// Does the word lie in the kernel?
    pub fn in_kernel(&self, w: &Word) -> Result<bool, Error> {
        Ok(self.image_of_word(w)?.is_identity())
    }
}

/// Diagonal quotient into the product group, acting on disjoint points.
pub fn intersect(a: &FiniteQuotient, b: &FiniteQuotient) -> Result<FiniteQuotient, Error> {
    if a.rank != b.rank {
        return Err(Error::Mismatch("quotient ranks differ".into()));
    }
    let degree = a.degree + b.degree;
    let mut gens = Vec::with_capacity(a.rank);
    for j in 0..a.rank {
        let mut p: Vec<usize> = a.gens[j].0.clone();
        p.extend(b.gens[j].0.iter().map(|&x| x + a.degree));
        gens.push(Perm(p));
    }
    FiniteQuotient::new(a.rank, degree, gens)
}

// ---------------------------------------------------------------------------
// Coset products
// ---------------------------------------------------------------------------

/// `g0 · H1 · g1 · H2 · g2 ⋯ Hm · gm` with `m >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetProduct {
    pub rank: usize,
    pub head: Word,
    pub factors: Vec<(StallingsGraph, Word)>,
}

impl CosetProduct {
    pub fn double_coset(rank: usize, h1: StallingsGraph, w: Word, h2: StallingsGraph) -> Self {
        CosetProduct { rank, head: Word::empty(), factors: vec![(h1, w), (h2, Word::empty())] }
    }
}

/// Image of the whole product in `Q`, by iterated subset multiplication.
pub fn product_image(q: &FiniteQuotient, p: &CosetProduct) -> Result<BTreeSet<usize>, Error> {
    let mut set: BTreeSet<usize> = BTreeSet::new();
    set.insert(q.element_index(&q.image_of_word(&p.head)?).unwrap());
    for (h, w) in &p.factors {
        let img = q.image_of_subgroup(h)?;
        let mut next: BTreeSet<usize> = BTreeSet::new();
        for &s in &set {
            for &t in &img {
                let prod = q.elements[s].compose(&q.elements[t]);
                next.insert(q.element_index(&prod).unwrap());
            }
        }
        let gw = q.image_of_word(w)?;
        set = next
            .into_iter()
            .map(|s| q.element_index(&q.elements[s].compose(&gw)).unwrap())
            .collect();
    }
    Ok(set)
}

/// A quotient separates the product when the identity avoids its image.
pub fn separates(q: &FiniteQuotient, p: &CosetProduct) -> Result<bool, Error> {
    Ok(!product_image(q, p)?.contains(&q.identity_index()))
}

// ---------------------------------------------------------------------------
// Quotient search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Budget {
    pub max_degree: usize,
    pub max_seconds: f64,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_degree: 8, max_seconds: 60.0, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SearchTrace {
    pub candidates_tried: usize,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Exhausted {
    pub trace: SearchTrace,
}

/// Named permutation groups whose element tuples seed the search, ordered by
/// degree then size.
fn catalog_groups(max_degree: usize) -> Vec<(String, usize, Vec<Perm>)> {
    fn cyclic(n: usize) -> Vec<Perm> {
        let r = Perm::from_cycles(n, &[&(0..n).collect::<Vec<_>>()]);
        let mut out = vec![Perm::identity(n)];
        let mut cur = r.clone();
        while !cur.is_identity() {
            out.push(cur.clone());
            cur = r.compose(&cur);
        }
        out
    }
    fn closure(n: usize, gens: &[Perm]) -> Vec<Perm> {
        let mut set: BTreeSet<Perm> = BTreeSet::from([Perm::identity(n)]);
        let mut queue: VecDeque<Perm> = set.iter().cloned().collect();
        while let Some(cur) = queue.pop_front() {
            for g in gens {
                let next = g.compose(&cur);
                if set.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        set.into_iter().collect()
    }
    fn dihedral(n: usize) -> Vec<Perm> {
        let r = Perm::from_cycles(n, &[&(0..n).collect::<Vec<_>>()]);
        let mut refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        let s = Perm(std::mem::take(&mut refl));
        closure(n, &[r, s])
    }
    fn direct_square(g: &[Perm], n: usize) -> Vec<Perm> {
        let mut out = Vec::with_capacity(g.len() * g.len());
        for a in g {
            for b in g {
                let mut p = a.0.clone();
                p.extend(b.0.iter().map(|&x| x + n));
                out.push(Perm(p));
            }
        }
        out
    }
    let s3 = closure(3, &[Perm::from_cycles(3, &[&[0, 1, 2]]), Perm::from_cycles(3, &[&[0, 1]])]);
    let a4 = closure(4, &[
        Perm::from_cycles(4, &[&[0, 1], &[2, 3]]),
        Perm::from_cycles(4, &[&[0, 1, 2]]),
    ]);
    let s4 = closure(4, &[Perm::from_cycles(4, &[&[0, 1, 2, 3]]), Perm::from_cycles(4, &[&[0, 1]])]);
    let c2 = cyclic(2);
    let c3 = cyclic(3);
    let mut groups: Vec<(String, usize, Vec<Perm>)> = vec![
        ("C2".into(), 2, c2.clone()),
        ("C3".into(), 3, c3.clone()),
        ("S3".into(), 3, s3.clone()),
        ("C4".into(), 4, cyclic(4)),
        ("C2xC2".into(), 4, direct_square(&c2, 2)),
        ("D4".into(), 4, dihedral(4)),
        ("A4".into(), 4, a4),
        ("S4".into(), 4, s4),
        ("C5".into(), 5, cyclic(5)),
        ("D5".into(), 5, dihedral(5)),
        ("C6".into(), 6, cyclic(6)),
        ("C3xC3".into(), 6, direct_square(&c3, 3)),
        ("D6".into(), 6, dihedral(6)),
        ("S3xS3".into(), 6, direct_square(&s3, 3)),
        ("C7".into(), 7, cyclic(7)),
        ("C8".into(), 8, cyclic(8)),
        ("D8".into(), 8, dihedral(8)),
    ];
    groups.retain(|(_, d, _)| *d <= max_degree);
    groups
}

/// The deterministic candidate stream: all rank-tuples of elements of each
/// catalog group, then seeded pseudorandom tuples of increasing degree.
pub struct QuotientCandidates {
    rank: usize,
    budget: Budget,
    groups: Vec<(String, usize, Vec<Perm>)>,
    group_idx: usize,
    tuple_idx: usize,
    rng: ChaCha8Rng,
    random_degree: usize,
    random_in_degree: usize,
    pub exhausted_catalog: bool,
}

pub const RANDOM_TUPLES_PER_DEGREE: usize = 64;

impl QuotientCandidates {
    pub fn new(rank: usize, budget: &Budget) -> Self {
        QuotientCandidates {
            rank,
            budget: budget.clone(),
            groups: catalog_groups(budget.max_degree),
            group_idx: 0,
            tuple_idx: 0,
            rng: ChaCha8Rng::seed_from_u64(budget.seed),
            random_degree: 2,
            random_in_degree: 0,
            exhausted_catalog: false,
        }
    }
}

impl Iterator for QuotientCandidates {
    type Item = (String, usize, Vec<Perm>);

    fn next(&mut self) -> Option<Self::Item> {
        if !self.exhausted_catalog {
            while self.group_idx < self.groups.len() {
                let (name, degree, elements) = &self.groups[self.group_idx];
                let total = elements.len().pow(self.rank as u32);
                if self.tuple_idx >= total {
                    self.group_idx += 1;
                    self.tuple_idx = 0;
                    continue;
                }
                let mut idx = self.tuple_idx;
                self.tuple_idx += 1;
                let mut tuple = Vec::with_capacity(self.rank);
                for _ in 0..self.rank {
                    tuple.push(elements[idx % elements.len()].clone());
                    idx /= elements.len();
                }
                return Some((format!("{name}#{}", self.tuple_idx - 1), *degree, tuple));
            }
            self.exhausted_catalog = true;
        }
        // random stage: sweep degrees 2..=max_degree forever
        if self.budget.max_degree < 2 {
            return None;
        }
        if self.random_in_degree >= RANDOM_TUPLES_PER_DEGREE {
            self.random_in_degree = 0;
            self.random_degree += 1;
            if self.random_degree > self.budget.max_degree {
                self.random_degree = 2;
            }
        }
        let d = self.random_degree;
        self.random_in_degree += 1;
        let mut tuple = Vec::with_capacity(self.rank);
        for _ in 0..self.rank {
            let mut p: Vec<usize> = (0..d).collect();
            p.shuffle(&mut self.rng);
            tuple.push(Perm(p));
        }
        Some((format!("rand-d{d}-{}", self.random_in_degree - 1), d, tuple))
    }
}

/// First quotient in the deterministic enumeration separating all products.
pub fn find_separating_quotient(
    rank: usize,
    products: &[CosetProduct],
    budget: &Budget,
) -> Result<FiniteQuotient, Exhausted> {
    find_separating_quotient_with(rank, products, budget, |_| true)
}

/// Same search with an extra acceptance predicate on candidates.
pub fn find_separating_quotient_with(
    rank: usize,
    products: &[CosetProduct],
    budget: &Budget,
    accept: impl Fn(&FiniteQuotient) -> bool + Sync,
) -> Result<FiniteQuotient, Exhausted> {
    let start = Instant::now();
    let mut trace = SearchTrace::default();
    let mut stream = QuotientCandidates::new(rank, budget);
    const CHUNK: usize = 256;
    // hard cap so an unseparable instance terminates as Exhausted
    const MAX_CANDIDATES: usize = 400_000;
    loop {
        if start.elapsed().as_secs_f64() > budget.max_seconds {
            trace.notes.push("time budget exhausted".into());
            return Err(Exhausted { trace });
        }
        let chunk: Vec<(String, usize, Vec<Perm>)> = (&mut stream).take(CHUNK).collect();
        if chunk.is_empty() || trace.candidates_tried >= MAX_CANDIDATES {
            trace.notes.push("candidate stream exhausted".into());
            return Err(Exhausted { trace });
        }
        trace.candidates_tried += chunk.len();
        let results: Vec<Option<FiniteQuotient>> = chunk
            .par_iter()
            .map(|(_, degree, tuple)| {
                let q = FiniteQuotient::new(rank, *degree, tuple.clone()).ok()?;
                if !accept(&q) {
                    return None;
                }
                for p in products {
                    if !separates(&q, p).ok()? {
                        return None;
                    }
                }
                Some(q)
            })
            .collect();
        if let Some(q) = results.into_iter().flatten().next() {
            return Ok(q);
        }
    }
}

// ---------------------------------------------------------------------------
// Horizontal subgroups of total spaces over a bouquet
// ---------------------------------------------------------------------------

fn bouquet_rank(t: &TotalSpace) -> Result<usize, Error> {
    if !t.gos.graph.is_bouquet() {
        return Err(Error::Precondition("underlying graph is not a bouquet".into()));
    }
    Ok(t.gos.graph.edges.len())
}

/// The horizontal graph of a 0-cube as a folded based labeled graph: the
/// Stallings graph of the subgroup of horizontal closed paths at that cube.
pub fn horizontal_subgroup(t: &TotalSpace, zero_cube: &str) -> Result<StallingsGraph, Error> {
    let rank = bouquet_rank(t)?;
    let hg = horizontal_graph(t, zero_cube)?;
    let verts: Vec<&CellId> = hg.vertices.iter().collect();
    let vidx: BTreeMap<&CellId, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut edges = Vec::new();
    for e in &hg.edges {
        let j: usize = e
            .label
            .strip_prefix('g')
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidInput(format!("loop `{}` is not g<j>", e.label)))?;
        edges.push((vidx[&e.from], j - 1, vidx[&e.to]));
    }
    let base = *vidx
        .get(&zero_cube.to_string())
        .ok_or_else(|| Error::UnknownCell(zero_cube.to_string()))?;
    Ok(StallingsGraph::from_labeled_edges(rank, verts.len(), &edges, base))
}

/// The word of one horizontal path between two 0-cubes, or `None` when they
/// lie in different components.
pub fn connecting_word(t: &TotalSpace, from: &str, to: &str) -> Result<Option<Word>, Error> {
    bouquet_rank(t)?;
    match horizontal_path(t, from, to)? {
        None => Ok(None),
        Some(steps) => Ok(Some(word_of_steps(&steps)?)),
    }
}

/// One double-coset product `K_i · w_ij · K_j` per ordered pair of distinct
/// 0-cubes in a common horizontal component.
pub fn strictness_products(t: &TotalSpace) -> Result<Vec<CosetProduct>, Error> {
    let rank = bouquet_rank(t)?;
    let mut out = Vec::new();
    let zero_cubes: Vec<CellId> = t.complex.vertices.iter().cloned().collect();
    let mut seen: BTreeSet<(CellId, CellId)> = BTreeSet::new();
    for a in &zero_cubes {
        let hg = horizontal_graph(t, a)?;
        for b in &hg.vertices {
            if a == b || seen.contains(&(a.clone(), b.clone())) {
                continue;
            }
            seen.insert((a.clone(), b.clone()));
            let ka = horizontal_subgroup(t, a)?;
            let kb = horizontal_subgroup(t, b)?;
            let w = connecting_word(t, a, b)?.expect("same component");
            out.push(CosetProduct::double_coset(rank, ka, w, kb));
        }
    }
    Ok(out)
}

/// Decision procedure for `w ∈ K1 · w0 · K2`, via emptiness of the
/// intersection `K1·w ∩ w0·K2` checked on a product automaton. Independent
/// of the horizontal-graph tracing route.
pub fn double_coset_contains(
    k1: &StallingsGraph,
    w0: &Word,
    k2: &StallingsGraph,
    w: &Word,
) -> bool {
    // automaton A: K1 followed by a tail spelling w; accepts K1·w
    // automaton B: a tail spelling w0 into K2; accepts w0·K2
    let a = with_tail(k1, &w.reduce(), true);
    let b = with_tail(k2, &w0.reduce(), false);
    // search for a common reduced word: states (u, v, last letter)
    let mut seen: BTreeSet<(usize, usize, i32)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, usize, i32)> = VecDeque::new();
    queue.push_back((a.start, b.start, 0));
    seen.insert((a.start, b.start, 0));
    while let Some((u, v, last)) = queue.pop_front() {
        if u == a.accept && v == b.accept {
            return true;
        }
        for x in a.alphabet() {
            if x == -last {
                continue;
            }
            let (Some(u2), Some(v2)) = (a.step(u, x), b.step(v, x)) else { continue };
            if seen.insert((u2, v2, x)) {
                queue.push_back((u2, v2, x));
            }
        }
    }
    false
}

struct TailAutomaton {
    rank: usize,
    out: Vec<Vec<Option<usize>>>,
    inn: Vec<Vec<Option<usize>>>,
    start: usize,
    accept: usize,
}

impl TailAutomaton {
    fn alphabet(&self) -> impl Iterator<Item = i32> + '_ {
        (1..=self.rank as i32).flat_map(|j| [j, -j])
    }
    fn step(&self, s: usize, x: i32) -> Option<usize> {
        if x > 0 {
            self.out[s][(x - 1) as usize]
        } else {
            self.inn[s][(-x - 1) as usize]
        }
    }
}

/// `suffix = true`: graph then tail (accepts `K·w`, start = base, accept =
/// tail end). `suffix = false`: tail then graph (accepts `w·K`).
fn with_tail(k: &StallingsGraph, w: &Word, suffix: bool) -> TailAutomaton {
    let _n = k.vertex_count();
    let mut out = k.out.clone();
    let mut inn = k.inn.clone();
    let add_vertex = |out: &mut Vec<Vec<Option<usize>>>, inn: &mut Vec<Vec<Option<usize>>>| {
        out.push(vec![None; k.rank]);
        inn.push(vec![None; k.rank]);
        out.len() - 1
    };
    let connect = |out: &mut Vec<Vec<Option<usize>>>,
                       inn: &mut Vec<Vec<Option<usize>>>,
                       u: usize,
                       x: i32,
                       v: usize| {
        if x > 0 {
            out[u][(x - 1) as usize] = Some(v);
            inn[v][(x - 1) as usize] = Some(u);
        } else {
            inn[u][(-x - 1) as usize] = Some(v);
            out[v][(-x - 1) as usize] = Some(u);
        }
    };
    if suffix {
        let mut cur = k.base;
        for &x in &w.0 {
            // follow existing edges where they already exist, so the
            // automaton stays deterministic after folding
            if let Some(next) = (TailAutomaton { rank: k.rank, out: out.clone(), inn: inn.clone(), start: 0, accept: 0 }).step(cur, x) {
                cur = next;
                continue;
            }
            let next = add_vertex(&mut out, &mut inn);
            connect(&mut out, &mut inn, cur, x, next);
            cur = next;
        }
        TailAutomaton { rank: k.rank, out, inn, start: k.base, accept: cur }
    } else {
        // build the tail backwards from the base
        let mut cur = k.base;
        for &x in w.0.iter().rev() {
            if let Some(prev) = (TailAutomaton { rank: k.rank, out: out.clone(), inn: inn.clone(), start: 0, accept: 0 }).step(cur, -x) {
                cur = prev;
                continue;
            }
            let prev = add_vertex(&mut out, &mut inn);
            connect(&mut out, &mut inn, prev, x, cur);
            cur = prev;
        }
        TailAutomaton { rank: k.rank, out, inn, start: cur, accept: k.base }
    }
}

/// All elements of the subgroup with reduced length at most `len`.
pub fn bounded_elements(k: &StallingsGraph, len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    // BFS over (vertex, word) with non-backtracking steps
    let mut layer: Vec<(usize, Word)> = vec![(k.base, Word::empty())];
    out.insert(Word::empty());
    for _ in 0..len {
        let mut next = Vec::new();
        for (v, w) in &layer {
            let last = w.0.last().copied().unwrap_or(0);
            for j in 0..k.rank {
                let x = j as i32 + 1;
                if let Some(u) = k.out[*v][j] {
                    if last != -x {
                        let mut w2 = w.clone();
                        w2.0.push(x);
                        if u == k.base {
                            out.insert(w2.clone());
                        }
                        next.push((u, w2));
                    }
                }
                if let Some(u) = k.inn[*v][j] {
                    if last != x {
                        let mut w2 = w.clone();
                        w2.0.push(-x);
                        if u == k.base {
                            out.insert(w2.clone());
                        }
                        next.push((u, w2));
                    }
                }
            }
        }
        layer = next;
    }
    out
}
