//! Labelled-graph simulation with exact largest-component tracking.
//!
//! Every vertex carries a component label. An insertion joining two
//! components relabels the smaller one. A deletion runs two breadth-first
//! searches from the endpoints in lockstep; if either reaches the other
//! endpoint the component is intact, otherwise the side that ran out first is
//! split off under a fresh label. A histogram of component sizes keeps the
//! maximum current.

use std::collections::{HashMap, VecDeque};
use std::ops::ControlFlow;

use rand::seq::index;
use rand::{Rng, RngCore};

use crate::analytic::c_epsilon;
use crate::error::{domain, Error, Result};
use crate::model::DerivedParams;
use crate::rng::{exponential, open_unit, rng_from_seed};
use crate::simulate::{HittingSample, Passage};

type Vertex = u32;

fn pair_key(u: Vertex, v: Vertex) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    (u64::from(a) << 32) | u64::from(b)
}

/// Maps a pair index in `0..N` to the pair `(u, v)`, `u < v`, in
/// lexicographic order.
fn unrank_pair(n: u64, k: u64) -> (Vertex, Vertex) {
    // row u holds n-1-u pairs; rows before u hold u(2n-u-1)/2
    let before = |u: u64| u * (2 * n - u - 1) / 2;
    let nf = n as f64;
    let disc = (2.0 * nf - 1.0).powi(2) - 8.0 * k as f64;
    let mut u = (((2.0 * nf - 1.0) - disc.max(0.0).sqrt()) / 2.0).floor() as u64;
    u = u.min(n - 2);
    while u > 0 && before(u) > k {
        u -= 1;
    }
    while before(u + 1) <= k {
        u += 1;
    }
    let v = u + 1 + (k - before(u));
    (u as Vertex, v as Vertex)
}

/// Graph on `n` labelled vertices with dynamic component bookkeeping.
#[derive(Debug, Clone)]
pub struct GraphState {
    n: usize,
    time: f64,
    adjacency: Vec<Vec<Vertex>>,
    edges: Vec<(Vertex, Vertex)>,
    edge_index: HashMap<u64, usize>,
    label: Vec<u32>,
    comp_size: Vec<u32>,
    free_labels: Vec<u32>,
    size_count: Vec<u32>,
    largest: usize,
    // BFS scratch
    mark: Vec<u32>,
    epoch: u32,
}

impl GraphState {
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1 && n < u32::MAX as usize / 2);
        let mut size_count = vec![0; n + 1];
        size_count[1] = n as u32;
        Self {
            n,
            time: 0.0,
            adjacency: vec![Vec::new(); n],
            edges: Vec::new(),
            edge_index: HashMap::new(),
            label: (0..n as u32).collect(),
            comp_size: vec![1; n],
            free_labels: Vec::new(),
            size_count,
            largest: 1,
            mark: vec![0; n],
            epoch: 0,
        }
    }

    /// Graph with the given edges inserted in order. Duplicates are ignored.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            if !g.has_edge(u, v) {
                g.insert(u, v);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_index.contains_key(&pair_key(u, v))
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v as usize]
    }

    /// Component label of `v`. Labels are stable only between events.
    pub fn component_of(&self, v: Vertex) -> u32 {
        self.label[v as usize]
    }

    pub fn component_size(&self, v: Vertex) -> usize {
        self.comp_size[self.label[v as usize] as usize] as usize
    }

    pub fn largest_component_size(&self) -> usize {
        self.largest
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(2);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 2;
        }
        self.epoch
    }

    fn add_size(&mut self, size: usize) {
        self.size_count[size] += 1;
        self.largest = self.largest.max(size);
    }

    fn remove_size(&mut self, size: usize) {
        self.size_count[size] -= 1;
        while self.size_count[self.largest] == 0 {
            self.largest -= 1;
        }
    }

    /// Relabels every vertex reachable from `start` to `to`.
    fn relabel_from(&mut self, start: Vertex, to: u32) {
        let from = self.label[start as usize];
        let mut queue = VecDeque::from([start]);
        self.label[start as usize] = to;
        while let Some(x) = queue.pop_front() {
            for w in 0..self.adjacency[x as usize].len() {
                let y = self.adjacency[x as usize][w];
                if self.label[y as usize] == from {
                    self.label[y as usize] = to;
                    queue.push_back(y);
                }
            }
        }
    }

    /// Adds the absent edge `{u, v}`.
    pub fn insert(&mut self, u: Vertex, v: Vertex) {
        assert!(u != v, "self-loop");
        let key = pair_key(u, v);
        assert!(!self.edge_index.contains_key(&key), "duplicate edge");
        self.edge_index.insert(key, self.edges.len());
        self.edges.push((u, v));
        let (lu, lv) = (self.label[u as usize], self.label[v as usize]);
        if lu != lv {
            let (su, sv) = (self.comp_size[lu as usize], self.comp_size[lv as usize]);
            // relabel the smaller side before linking so the search stays inside it
            let (keep, small_root, small_label) = if su >= sv { (lu, v, lv) } else { (lv, u, lu) };
            self.relabel_from(small_root, keep);
            self.free_labels.push(small_label);
            let merged = su + sv;
            self.comp_size[keep as usize] = merged;
            self.add_size(merged as usize);
            self.remove_size(su as usize);
            self.remove_size(sv as usize);
        }
        self.adjacency[u as usize].push(v);
        self.adjacency[v as usize].push(u);
    }

    fn unlink(&mut self, u: Vertex, v: Vertex) {
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.adjacency[a as usize];
            let pos = list.iter().position(|&x| x == b).expect("edge in adjacency");
            list.swap_remove(pos);
        }
    }

    fn remove_at(&mut self, idx: usize) -> (Vertex, Vertex) {
        let (u, v) = self.edges.swap_remove(idx);
        self.edge_index.remove(&pair_key(u, v));
        if let Some(&(a, b)) = self.edges.get(idx) {
            self.edge_index.insert(pair_key(a, b), idx);
        }
        self.unlink(u, v);
        self.repair_after_delete(u, v);
        (u, v)
    }

    /// Removes the present edge `{u, v}`.
    pub fn remove(&mut self, u: Vertex, v: Vertex) {
        let idx = *self.edge_index.get(&pair_key(u, v)).expect("edge present");
        self.remove_at(idx);
    }

    fn repair_after_delete(&mut self, u: Vertex, v: Vertex) {
        let side_u = self.next_epoch();
        let side_v = side_u + 1;
        self.mark[u as usize] = side_u;
        self.mark[v as usize] = side_v;
        let mut qu = VecDeque::from([u]);
        let mut qv = VecDeque::from([v]);
        let mut seen_u = vec![u];
        let mut seen_v = vec![v];
        // one vertex expansion per side per round
        let separated = loop {
            match self.expand(&mut qu, &mut seen_u, side_u, side_v) {
                Expansion::Met => break None,
                Expansion::Exhausted => break Some(seen_u),
                Expansion::Continue => {}
            }
            match self.expand(&mut qv, &mut seen_v, side_v, side_u) {
                Expansion::Met => break None,
                Expansion::Exhausted => break Some(seen_v),
                Expansion::Continue => {}
            }
        };
        if let Some(part) = separated {
            let old = self.label[u as usize];
            let total = self.comp_size[old as usize] as usize;
            let fresh = self.free_labels.pop().expect("a label is free after a split");
            for &x in &part {
                self.label[x as usize] = fresh;
            }
            let (a, b) = (part.len(), total - part.len());
            self.comp_size[fresh as usize] = a as u32;
            self.comp_size[old as usize] = b as u32;
            self.add_size(a);
            self.add_size(b);
            self.remove_size(total);
        }
    }

    fn expand(
        &mut self,
        queue: &mut VecDeque<Vertex>,
        seen: &mut Vec<Vertex>,
        own: u32,
        other: u32,
    ) -> Expansion {
        let Some(x) = queue.pop_front() else {
            return Expansion::Exhausted;
        };
        for w in 0..self.adjacency[x as usize].len() {
            let y = self.adjacency[x as usize][w];
            let m = self.mark[y as usize];
            if m == other {
                return Expansion::Met;
            }
            if m != own {
                self.mark[y as usize] = own;
                seen.push(y);
                queue.push_back(y);
            }
        }
        if queue.is_empty() {
            Expansion::Exhausted
        } else {
            Expansion::Continue
        }
    }

    /// Largest component size by a full breadth-first search.
    pub fn recompute_largest(&self) -> usize {
        component_sizes(self.n, &self.adjacency).into_iter().max().unwrap_or(0)
    }

    /// Checks labels, sizes and the tracked maximum against a full search.
    pub fn verify(&self) -> std::result::Result<(), String> {
        let mut seen = vec![false; self.n];
        let mut sizes = Vec::new();
        let mut labels_used = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let l = self.label[s];
            let mut count = 0usize;
            let mut queue = VecDeque::from([s as Vertex]);
            seen[s] = true;
            while let Some(x) = queue.pop_front() {
                count += 1;
                if self.label[x as usize] != l {
                    return Err(format!("vertex {x} has label {} in component {l}", self.label[x as usize]));
                }
                for &y in &self.adjacency[x as usize] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        queue.push_back(y);
                    }
                }
            }
            if self.comp_size[l as usize] as usize != count {
                return Err(format!("label {l} records size {} but has {count}", self.comp_size[l as usize]));
            }
            labels_used.push(l);
            sizes.push(count);
        }
        labels_used.sort_unstable();
        if labels_used.windows(2).any(|w| w[0] == w[1]) {
            return Err("two components share a label".into());
        }
        let max = sizes.iter().copied().max().unwrap_or(0);
        if max != self.largest {
            return Err(format!("tracked largest {} but true largest {max}", self.largest));
        }
        for (size, &c) in self.size_count.iter().enumerate() {
            let real = sizes.iter().filter(|&&s| s == size).count();
            if size > 0 && c as usize != real {
                return Err(format!("histogram has {c} components of size {size}, true {real}"));
            }
        }
        Ok(())
    }

    /// Uniformly random absent pair. Rejection sampling while at most half
    /// the pairs are present, otherwise indexing into the absent set.
    pub(crate) fn sample_absent_pair<R: RngCore + ?Sized>(&self, rng: &mut R) -> (Vertex, Vertex) {
        let n = self.n as u64;
        let total = n * (n - 1) / 2;
        let present = self.edges.len() as u64;
        assert!(present < total, "complete graph has no absent pair");
        if 2 * present <= total {
            loop {
                let u = rng.random_range(0..self.n as Vertex);
                let mut v = rng.random_range(0..self.n as Vertex - 1);
                if v >= u {
                    v += 1;
                }
                if !self.has_edge(u, v) {
                    return (u.min(v), u.max(v));
                }
            }
        }
        let mut k = rng.random_range(0..total - present);
        for u in 0..self.n as Vertex {
            for v in u + 1..self.n as Vertex {
                if !self.has_edge(u, v) {
                    if k == 0 {
                        return (u, v);
                    }
                    k -= 1;
                }
            }
        }
        unreachable!("absent pair count mismatch")
    }
}

enum Expansion {
    Met,
    Exhausted,
    Continue,
}

fn component_sizes(n: usize, adjacency: &[Vec<Vertex>]) -> Vec<usize> {
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        let mut count = 0;
        while let Some(x) = queue.pop_front() {
            count += 1;
            for &y in &adjacency[x] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    queue.push_back(y as usize);
                }
            }
        }
        sizes.push(count);
    }
    sizes
}

pub fn largest_component_size(state: &GraphState) -> usize {
    state.largest_component_size()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Insert,
    Delete,
}

/// One edge toggle, reported after the state has been updated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEvent {
    pub time: f64,
    pub kind: EventKind,
    pub u: Vertex,
    pub v: Vertex,
    pub edges: usize,
    pub largest: usize,
}

/// Receives every event of a run; returning `Break` stops the run.
pub trait GraphObserver {
    fn on_event(&mut self, state: &GraphState, event: &GraphEvent) -> ControlFlow<()>;
}

impl<F> GraphObserver for F
where
    F: FnMut(&GraphState, &GraphEvent) -> ControlFlow<()>,
{
    fn on_event(&mut self, state: &GraphState, event: &GraphEvent) -> ControlFlow<()> {
        self(state, event)
    }
}

/// Checks the bookkeeping against a full search after every event.
#[derive(Debug, Default)]
pub struct VerifyingObserver {
    pub events: u64,
    pub failure: Option<String>,
}

impl GraphObserver for VerifyingObserver {
    fn on_event(&mut self, state: &GraphState, event: &GraphEvent) -> ControlFlow<()> {
        self.events += 1;
        match state.verify() {
            Ok(()) if state.edge_count() == event.edges => ControlFlow::Continue(()),
            Ok(()) => {
                self.failure = Some("edge count mismatch".into());
                ControlFlow::Break(())
            }
            Err(e) => {
                self.failure = Some(e);
                ControlFlow::Break(())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GraphSimulation {
    pub state: GraphState,
    pub events: u64,
    /// Whether an observer ended the run before the horizon.
    pub stopped: bool,
}

fn check_graph_params(d: &DerivedParams) -> Result<()> {
    if d.n() >= u32::MAX as u64 / 2 {
        return Err(Error::InvalidModel(format!("n = {} too large for labelled simulation", d.n())));
    }
    Ok(())
}

/// Advances `state` until the clock would pass `horizon` or the observer
/// breaks.
pub fn run_graph<R: RngCore + ?Sized, O: GraphObserver + ?Sized>(
    d: &DerivedParams,
    state: &mut GraphState,
    horizon: f64,
    rng: &mut R,
    observer: &mut O,
) -> (u64, bool) {
    let mut count = 0u64;
    loop {
        let m = state.edge_count() as u64;
        let up = d.birth_rate_unchecked(m);
        let total = up + d.death_rate_unchecked(m);
        let dt = exponential(rng, total);
        if state.time + dt > horizon {
            return (count, false);
        }
        state.time += dt;
        let (kind, (u, v)) = if open_unit(rng) * total <= up {
            let (u, v) = state.sample_absent_pair(rng);
            state.insert(u, v);
            (EventKind::Insert, (u, v))
        } else {
            let idx = rng.random_range(0..state.edges.len());
            (EventKind::Delete, state.remove_at(idx))
        };
        count += 1;
        let event = GraphEvent {
            time: state.time,
            kind,
            u,
            v,
            edges: state.edge_count(),
            largest: state.largest,
        };
        if observer.on_event(state, &event).is_break() {
            return (count, true);
        }
    }
}

/// Runs the labelled graph from the empty graph.
pub fn simulate_graph<O: GraphObserver + ?Sized>(
    d: &DerivedParams,
    horizon: f64,
    seed: u64,
    observer: &mut O,
) -> Result<GraphSimulation> {
    check_graph_params(d)?;
    if !(horizon > 0.0) {
        return Err(domain("horizon", horizon, "(0, inf]"));
    }
    let mut state = GraphState::empty(d.n() as usize);
    let (events, stopped) = run_graph(d, &mut state, horizon, &mut rng_from_seed(seed), observer);
    Ok(GraphSimulation {
        state,
        events,
        stopped,
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(domain("eps", eps, "(0, 1)"))
    }
}

/// `⌈eps·n⌉`, with a relative guard so that e.g. `0.3·500` is 150, not 151.
pub fn component_threshold(eps: f64, n: u64) -> u64 {
    let x = eps * n as f64;
    (x - x.abs() * 1e-12).ceil().max(0.0) as u64
}

/// Time until the empty graph first has a component of at least `⌈eps·n⌉`
/// vertices, censored at `cap`.
pub fn sample_component_hitting(d: &DerivedParams, eps: f64, seed: u64, cap: f64) -> Result<HittingSample> {
    check_eps(eps)?;
    if !(cap > 0.0) {
        return Err(domain("cap", cap, "(0, inf]"));
    }
    let target = component_threshold(eps, d.n());
    if target <= 1 {
        return Ok(HittingSample {
            start: 1,
            target,
            passage: Passage::Hit(0.0),
            seed,
        });
    }
    let mut hit = None;
    let mut stop = |_: &GraphState, e: &GraphEvent| {
        if e.largest as u64 >= target {
            hit = Some(e.time);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    simulate_graph(d, cap, seed, &mut stop)?;
    Ok(HittingSample {
        start: 1,
        target,
        passage: hit.map_or(Passage::Censored { cap }, Passage::Hit),
        seed,
    })
}

/// One paired run: the component-size passage and the edge-count passage
/// to `[c_{eps+delta} n]` on the same path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmergenceSample {
    pub seed: u64,
    /// First time a component reaches `⌈eps·n⌉`.
    pub component: Passage,
    /// First time the edge count reaches the paired target.
    pub edge_count: Passage,
    /// Largest component at the edge-count passage (0 if censored).
    pub largest_at_edge_passage: usize,
    /// Whether the component threshold held at the edge-count passage.
    pub dominated: bool,
}

/// Thresholds of a paired emergence run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmergenceTargets {
    pub component_size: u64,
    pub edge_density: f64,
    pub edge_count: u64,
}

pub fn emergence_targets(d: &DerivedParams, eps: f64, delta: f64) -> Result<EmergenceTargets> {
    check_eps(eps)?;
    if !(delta > 0.0 && eps + delta < 1.0) {
        return Err(domain("delta", delta, format!("(0, {})", 1.0 - eps)));
    }
    let edge_density = c_epsilon(eps + delta)?;
    let edge_count = d.count_at_density(edge_density);
    if edge_count > d.pairs() {
        return Err(Error::EdgeCount {
            count: edge_count,
            max: d.pairs(),
        });
    }
    Ok(EmergenceTargets {
        component_size: component_threshold(eps, d.n()),
        edge_density,
        edge_count,
    })
}

/// Runs from the empty graph until both passages have happened or `cap`.
pub fn sample_emergence(d: &DerivedParams, eps: f64, delta: f64, seed: u64, cap: f64) -> Result<EmergenceSample> {
    let targets = emergence_targets(d, eps, delta)?;
    if !(cap > 0.0) {
        return Err(domain("cap", cap, "(0, inf]"));
    }
    let mut component = (targets.component_size <= 1).then_some(0.0);
    let mut edge = (targets.edge_count == 0).then_some((0.0, 1usize));
    let pending = component.is_none() || edge.is_none();
    let mut watch = |_: &GraphState, e: &GraphEvent| {
        if component.is_none() && e.largest as u64 >= targets.component_size {
            component = Some(e.time);
        }
        if edge.is_none() && e.edges as u64 >= targets.edge_count {
            edge = Some((e.time, e.largest));
        }
        if component.is_some() && edge.is_some() {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    if pending {
        simulate_graph(d, cap, seed, &mut watch)?;
    }
    let largest = edge.map_or(0, |e| e.1);
    Ok(EmergenceSample {
        seed,
        component: component.map_or(Passage::Censored { cap }, Passage::Hit),
        edge_count: edge.map_or(Passage::Censored { cap }, |e| Passage::Hit(e.0)),
        largest_at_edge_passage: largest,
        dominated: edge.is_some() && largest as u64 >= targets.component_size,
    })
}

/// Disjoint sets with union by size and path halving.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = self.parent[x as usize];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns the size of the result.
    pub fn union(&mut self, a: u32, b: u32) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return self.size[ra as usize] as usize;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.size[ra as usize] as usize
    }
}

/// Largest component of `G(n, m)`: `m` distinct pairs chosen uniformly.
pub fn static_er_largest_component(n: u64, m: u64, seed: u64) -> Result<usize> {
    if n == 0 || n >= u32::MAX as u64 / 2 {
        return Err(domain("n", n as f64, "[1, 2^31)"));
    }
    let total = n * (n - 1) / 2;
    if m > total {
        return Err(Error::EdgeCount { count: m, max: total });
    }
    let mut rng = rng_from_seed(seed);
    let mut sets = DisjointSets::new(n as usize);
    let mut largest = 1;
    for k in index::sample(&mut rng, total as usize, m as usize) {
        let (u, v) = unrank_pair(n, k as u64);
        largest = largest.max(sets.union(u, v));
    }
    Ok(largest)
}
