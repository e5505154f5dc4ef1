//! Column-by-column transfer-matrix sweep over a rectangle `W` cells high.
//!
//! Vertices are added one at a time, bottom to top within a column. Before
//! vertex `(x, r)` is added the cut-line crosses, in order from the bottom:
//! the horizontal edges leaving rows `0..r` of column `x`, the vertical edge
//! `(x, r-1)-(x, r)` (the kink), and the horizontal edges entering rows
//! `r..=W` of column `x`. That is `W + 2` slots, and the two edges entering
//! the new vertex always sit in slots `r` and `r + 1`. The two edges leaving
//! it (right, then up) take over the same two slots, so the packed key never
//! needs re-indexing inside a column; between columns the empty kink slot
//! moves from the top back to the bottom.
//!
//! Each signature prescribes how the occupied cut edges continue to the
//! right; every target produced by an update is one consistent refinement of
//! that prescription, so each walk follows exactly one chain of signatures.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::modseries::{ModulusSet, TruncatedPolynomial};
use crate::pruning::{key_additional_steps, CutGeometry};
use crate::signature::{decode, scan_accessible, validate, SignatureKey, Target, MAX_SLOTS};

pub type StateMap = FxHashMap<SignatureKey, TruncatedPolynomial>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("width {0} needs {slots} key slots, more than the {max} available", slots = .0 + 2, max = MAX_SLOTS)]
    TooWide(usize),
    #[error("forbidden kink state '{kink}' at column {column}, row {row} in signature {signature}")]
    ForbiddenKink { kink: String, column: usize, row: usize, signature: String },
    #[error("invalid signature {signature} generated at column {column}, row {row}: {reason}")]
    InvalidState { signature: String, column: usize, row: usize, reason: String },
    #[error("free-edge count grew from {from} to {to} outside the first column (column {column}, row {row})")]
    FreeEdgeCreated { from: usize, to: usize, column: usize, row: usize },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Where the kink currently sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepGeometry {
    pub width: usize,
    /// Index of the last vertex column.
    pub max_columns: usize,
    pub column: usize,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub width: usize,
    /// Index of the last vertex column; the widest box has this length.
    pub columns: usize,
    pub n_max: u32,
    pub prune: bool,
    /// Number of key-range shards processed independently.
    pub workers: usize,
    /// Validate every generated signature (slow; for tests).
    pub check_states: bool,
}

impl SweepConfig {
    pub fn new(width: usize, columns: usize, n_max: u32) -> Self {
        Self { width, columns, n_max, prune: true, workers: 1, check_states: false }
    }
}

/// `per_column[x]` collects walks whose right-most vertex is in column `x`
/// (their box is `x` cells long). Counts are of undirected walks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionLedger {
    pub per_column: Vec<TruncatedPolynomial>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepStats {
    /// Largest state map seen after any vertex step.
    pub max_states: usize,
    /// Total stored polynomial terms at the step with the most states.
    pub max_terms: usize,
    /// Sum over vertex steps of the number of source states processed.
    pub state_steps: u64,
    pub bound_evaluations: u64,
    /// Most signature slots read by one lower-bound evaluation.
    pub max_bound_visits: u64,
    pub total_bound_visits: u64,
}

impl SweepStats {
    fn merge(&mut self, other: &SweepStats) {
        self.state_steps += other.state_steps;
        self.bound_evaluations += other.bound_evaluations;
        self.max_bound_visits = self.max_bound_visits.max(other.max_bound_visits);
        self.total_bound_visits += other.total_bound_visits;
    }
}

/// The empty boundary before anything has been placed.
pub fn seed(width: usize, moduli: &ModulusSet) -> StateMap {
    let _ = width;
    let mut map = StateMap::default();
    map.insert(SignatureKey(0), TruncatedPolynomial::one(moduli));
    map
}

/// One update of the vertex at `geom.column, geom.row`: returns the new
/// state map and the polynomial of walks completed at this vertex (both
/// borders touched).
pub fn kink_update(
    states: &StateMap,
    geom: &SweepGeometry,
    n_max: u32,
    prune: bool,
    moduli: &ModulusSet,
) -> Result<(StateMap, TruncatedPolynomial), EngineError> {
    let mut step = VertexStep::new(geom, n_max, prune, false, moduli);
    let mut out = StateMap::default();
    let mut done = TruncatedPolynomial::zero();
    let mut stats = SweepStats::default();
    step.apply(states.iter(), &mut out, &mut done, &mut stats)?;
    Ok((out, done))
}

/// Emitted by the transition generator: target key, number of newly occupied
/// edges, and whether the walk was completed.
#[derive(Debug, Clone, Copy)]
struct Emit {
    key: SignatureKey,
    added: u32,
    completed: bool,
}

struct VertexStep<'a> {
    width: usize,
    column: usize,
    row: usize,
    slots: usize,
    can_right: bool,
    can_up: bool,
    n_max: u32,
    prune: bool,
    check: bool,
    moduli: &'a ModulusSet,
    emits: Vec<Emit>,
    targets: Vec<Target>,
}

impl<'a> VertexStep<'a> {
    fn new(geom: &SweepGeometry, n_max: u32, prune: bool, check: bool, moduli: &'a ModulusSet) -> Self {
        Self {
            width: geom.width,
            column: geom.column,
            row: geom.row,
            slots: geom.width + 2,
            can_right: geom.column < geom.max_columns,
            can_up: geom.row < geom.width,
            n_max,
            prune,
            check,
            moduli,
            emits: Vec::with_capacity(32),
            targets: Vec::with_capacity(16),
        }
    }

    fn describe(&self, key: SignatureKey) -> String {
        decode(key, self.slots).map(|s| s.to_string()).unwrap_or_else(|_| format!("{:#x}", key.0))
    }

    /// Fills `self.emits` with every legal successor of `key`.
    fn transitions(&mut self, key: SignatureKey) -> Result<(), EngineError> {
        self.emits.clear();
        let k = self.row;
        let below = key.get(k);
        let left = key.get(k + 1);
        let base = key.with(k, 0).with(k + 1, 0);
        let started = key.edges() != 0;

        match (below, left) {
            (0, 0) => {
                self.push(base, 0, false, started);
                if !started {
                    // First vertex of a walk: an end-point or an interior
                    // vertex with two free continuations.
                    if self.can_right {
                        self.push(base.with(k, 3), 1, true, false);
                    }
                    if self.can_up {
                        self.push(base.with(k + 1, 3), 1, true, false);
                    }
                    if self.can_right && self.can_up {
                        self.push(base.with(k, 3).with(k + 1, 3), 2, true, false);
                    }
                    return Ok(());
                }
                self.targets.clear();
                scan_accessible(|i| base.get(i), self.slots, k, k + 2, &mut self.targets);
                for t in std::mem::take(&mut self.targets).iter() {
                    self.insertions(base, k, *t);
                }
            }
            (s, 0) | (0, s) => {
                if self.can_right {
                    self.push(base.with(k, s), 1, true, true);
                }
                if self.can_up {
                    self.push(base.with(k + 1, s), 1, true, true);
                }
                if s == 3 {
                    self.push(base, 0, true, true);
                }
            }
            (1, 2) => self.push(base, 0, true, true),
            (a, b) => {
                return Err(EngineError::ForbiddenKink {
                    kink: format!("{a}{b}"),
                    column: self.column,
                    row: self.row,
                    signature: self.describe(key),
                })
            }
        }
        Ok(())
    }

    /// New edges on an empty kink attaching to `target`.
    fn insertions(&mut self, base: SignatureKey, k: usize, target: Target) {
        let (right, up) = (self.can_right, self.can_up);
        match target {
            Target::Free(p) => {
                // The free edge becomes one end of an arc whose other end is
                // the new edge; its label depends on which side it lies.
                let (p_state, new_state) = if p < k { (1, 2) } else { (2, 1) };
                let b = base.with(p, p_state);
                if right {
                    self.push(b.with(k, new_state), 1, true, true);
                }
                if up {
                    self.push(b.with(k + 1, new_state), 1, true, true);
                }
                if right && up {
                    // One new edge pairs with the old free edge, the other
                    // inherits the free end.
                    self.push(b.with(k, new_state).with(k + 1, 3), 2, true, true);
                    self.push(b.with(k, 3).with(k + 1, new_state), 2, true, true);
                }
            }
            Target::Arc { lower, upper } => {
                if !(right && up) {
                    return;
                }
                let next = if lower < k && upper > k + 1 {
                    // Inside the arc: 1..00..2 -> 1..21..2
                    base.with(k, 2).with(k + 1, 1)
                } else if upper < k {
                    // Above the arc: 1..2..00 -> 1..1..22
                    base.with(upper, 1).with(k, 2).with(k + 1, 2)
                } else {
                    // Below the arc: 00..1..2 -> 11..2..2
                    base.with(lower, 2).with(k, 1).with(k + 1, 1)
                };
                self.push(next, 2, true, true);
            }
        }
    }

    #[inline]
    fn push(&mut self, mut key: SignatureKey, added: u32, on_walk: bool, started: bool) {
        if on_walk {
            if self.row == 0 {
                key.0 |= SignatureKey::BOTTOM;
            }
            if self.row == self.width {
                key.0 |= SignatureKey::TOP;
            }
        }
        if key.edges() == 0 {
            if started {
                if key.bottom_touched() && key.top_touched() {
                    self.emits.push(Emit { key, added, completed: true });
                }
            } else if self.column == 0 {
                self.emits.push(Emit { key, added, completed: false });
            }
            return;
        }
        // The next vertex joins its two incoming edges; unless they are the
        // two ends of one arc the state is dead.
        let k = self.row + 1;
        if k + 1 < self.slots {
            let (v, h) = (key.get(k), key.get(k + 1));
            if v != 0 && h != 0 && !(v == 1 && h == 2) {
                return;
            }
        }
        self.emits.push(Emit { key, added, completed: false });
    }

    fn check_target(&self, source: SignatureKey, target: SignatureKey) -> Result<(), EngineError> {
        let sig = decode(target, self.slots).map_err(|e| self.invalid(target, e.to_string()))?;
        validate(&sig).map_err(|e| self.invalid(target, e.to_string()))?;
        let k = self.row + 1;
        if k + 1 < self.slots {
            let (v, h) = (target.get(k), target.get(k + 1));
            if v != 0 && h != 0 && !(v == 1 && h == 2) {
                return Err(self.invalid(target, format!("forbidden kink '{v}{h}'")));
            }
        }
        let free = |key: SignatureKey| (0..self.slots).filter(|&i| key.get(i) == 3).count();
        let (before, after) = (free(source), free(target));
        if after > before && self.column > 0 {
            return Err(EngineError::FreeEdgeCreated { from: before, to: after, column: self.column, row: self.row });
        }
        Ok(())
    }

    fn invalid(&self, key: SignatureKey, reason: String) -> EngineError {
        EngineError::InvalidState { signature: self.describe(key), column: self.column, row: self.row, reason }
    }

    fn apply<'s>(
        &mut self,
        sources: impl Iterator<Item = (&'s SignatureKey, &'s TruncatedPolynomial)>,
        out: &mut StateMap,
        done: &mut TruncatedPolynomial,
        stats: &mut SweepStats,
    ) -> Result<(), EngineError> {
        let geom = CutGeometry { width: self.width as u32, column: self.column as u32, kink: self.row as u32 + 1 };
        for (&key, poly) in sources {
            stats.state_steps += 1;
            let Some(lowest) = poly.min_degree() else { continue };
            self.transitions(key)?;
            for i in 0..self.emits.len() {
                let e = self.emits[i];
                if e.completed {
                    done.add_shifted(poly, e.added, self.n_max, self.moduli);
                    continue;
                }
                if self.check {
                    self.check_target(key, e.key)?;
                }
                let mut limit = self.n_max;
                if self.prune && e.key.edges() != 0 {
                    let mut visits = 0;
                    let extra = key_additional_steps(e.key, self.slots as u32, &geom, &mut visits);
                    stats.bound_evaluations += 1;
                    stats.total_bound_visits += visits;
                    stats.max_bound_visits = stats.max_bound_visits.max(visits);
                    if lowest + e.added + extra > self.n_max {
                        continue;
                    }
                    limit = self.n_max - extra;
                }
                out.entry(e.key).or_default().add_shifted(poly, e.added, limit, self.moduli);
            }
        }
        out.retain(|_, p| !p.is_zero());
        Ok(())
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Slots `lo..=hi` in two-bit layout.
fn slot_mask(lo: usize, hi: usize) -> u64 {
    let bits = |n: usize| if n >= 32 { u64::MAX } else { (1u64 << (2 * n)) - 1 };
    bits(hi + 1) & !bits(lo)
}

/// Re-shards `states` so that every key lands in the shard chosen by the
/// occupation of the slots outside `touched`. Updates only change the
/// occupation of the kink slots, so no state ever leaves its shard while the
/// kink stays inside `touched`.
fn redistribute(shards: Vec<StateMap>, count: usize, touched: (usize, usize), rotate: bool) -> Vec<StateMap> {
    let keep = !slot_mask(touched.0, touched.1) & SignatureKey::EDGE_MASK;
    let mut out: Vec<StateMap> = (0..count).map(|_| StateMap::default()).collect();
    for map in shards {
        for (key, poly) in map {
            let key = if rotate {
                if key.edges() == 0 {
                    // Walks may only start in the first column.
                    continue;
                }
                SignatureKey(((key.edges() << 2) & SignatureKey::EDGE_MASK) | (key.0 & !SignatureKey::EDGE_MASK))
            } else {
                key
            };
            let shard = if count == 1 { 0 } else { (mix(key.occupation() & keep) % count as u64) as usize };
            out[shard].insert(key, poly);
        }
    }
    out
}

/// Runs the full sweep and returns the per-column completion ledger.
pub fn sweep(cfg: &SweepConfig, moduli: &ModulusSet) -> Result<(CompletionLedger, SweepStats), EngineError> {
    let w = cfg.width;
    if w + 2 > MAX_SLOTS {
        return Err(EngineError::TooWide(w));
    }
    let shards_n = cfg.workers.max(1);
    let mut ledger = vec![TruncatedPolynomial::zero(); cfg.columns + 1];
    let mut stats = SweepStats::default();
    let mut shards = vec![seed(w, moduli)];

    // Two phases per column when sharding: the lower half of the rows, then
    // the upper half, each keyed on the half it does not touch.
    let phases: Vec<(usize, usize)> = if shards_n > 1 && w >= 1 {
        let mid = (w + 1) / 2;
        vec![(0, mid - 1), (mid, w)]
    } else {
        vec![(0, w)]
    };

    for x in 0..=cfg.columns {
        for (pi, &(r0, r1)) in phases.iter().enumerate() {
            let rotate = x > 0 && pi == 0;
            if shards_n > 1 || rotate {
                shards = redistribute(shards, shards_n, (r0, r1 + 1), rotate);
            }
            let results: Vec<Result<(StateMap, Vec<TruncatedPolynomial>, SweepStats, Vec<(usize, usize)>), EngineError>> =
                shards
                    .into_par_iter()
                    .map(|mut map| {
                        let mut local = SweepStats::default();
                        let mut done = Vec::with_capacity(r1 - r0 + 1);
                        let mut sizes = Vec::with_capacity(r1 - r0 + 1);
                        for r in r0..=r1 {
                            let geom = SweepGeometry { width: w, max_columns: cfg.columns, column: x, row: r };
                            let mut step = VertexStep::new(&geom, cfg.n_max, cfg.prune, cfg.check_states, moduli);
                            let mut next = StateMap::with_capacity_and_hasher(map.len(), Default::default());
                            let mut finished = TruncatedPolynomial::zero();
                            step.apply(map.iter(), &mut next, &mut finished, &mut local)?;
                            map = next;
                            done.push(finished);
                            let terms = map.values().map(|p| p.stored_terms(moduli.len())).sum();
                            sizes.push((map.len(), terms));
                        }
                        Ok((map, done, local, sizes))
                    })
                    .collect();
            let mut next_shards = Vec::with_capacity(results.len());
            let mut totals = vec![(0usize, 0usize); r1 - r0 + 1];
            for res in results {
                let (map, done, local, sizes) = res?;
                for p in &done {
                    ledger[x].add_shifted(p, 0, cfg.n_max, moduli);
                }
                for (t, s) in totals.iter_mut().zip(sizes) {
                    t.0 += s.0;
                    t.1 += s.1;
                }
                stats.merge(&local);
                next_shards.push(map);
            }
            for (states, terms) in totals {
                if states > stats.max_states {
                    stats.max_states = states;
                    stats.max_terms = terms;
                }
            }
            shards = next_shards;
        }
        if shards.iter().all(|m| m.is_empty()) {
            break;
        }
    }
    Ok((CompletionLedger { per_column: ledger }, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{encode, Signature};

    fn ms() -> ModulusSet {
        ModulusSet::new(&[1_000_000_007]).unwrap()
    }

    fn key(s: &str) -> SignatureKey {
        encode(&Signature::parse(s, false, false).unwrap()).unwrap()
    }

    fn successors(source: &str, width: usize, column: usize, row: usize) -> Vec<(String, u32)> {
        let moduli = ms();
        let mut states = StateMap::default();
        states.insert(key(source), TruncatedPolynomial::one(&moduli));
        let geom = SweepGeometry { width, max_columns: 10, column, row };
        let (out, _) = kink_update(&states, &geom, 30, false, &moduli).unwrap();
        let mut v: Vec<(String, u32)> = out
            .iter()
            .map(|(k, p)| {
                let s = decode(SignatureKey(k.edges()), width + 2).unwrap().to_string();
                (s[..width + 2].to_string(), p.min_degree().unwrap())
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn seed_is_single_empty_state() {
        for w in [0, 2] {
            let s = seed(w, &ms());
            assert_eq!(s.len(), 1);
            assert_eq!(s[&SignatureKey(0)], TruncatedPolynomial::one(&ms()));
        }
    }

    #[test]
    fn zero_columns_complete_nothing_for_wide_rectangles() {
        // A single column of height 2 only holds vertical walks, which are
        // counted by the width-0 sweep instead; column 0 of the width-2 sweep
        // still records them but nothing lies beyond it.
        let (ledger, _) = sweep(&SweepConfig::new(2, 0, 9), &ms()).unwrap();
        assert_eq!(ledger.per_column.len(), 1);
    }

    #[test]
    fn straight_walks_in_width_zero() {
        let moduli = ms();
        let (ledger, _) = sweep(&SweepConfig::new(0, 3, 9), &moduli).unwrap();
        assert!(ledger.per_column[0].is_zero());
        for c in 1..=3u32 {
            let p = &ledger.per_column[c as usize];
            assert_eq!(p.min_degree(), Some(c));
            assert_eq!(p.max_degree(1), Some(c));
            assert_eq!(p.coefficient(c, 1), vec![1]);
        }
    }

    #[test]
    fn arc_inserted_inside_enclosing_arc() {
        // Width 2, kink on row 1: slots are [row0 out, kink, row1 in, row2 in].
        let succ = successors("1002", 2, 1, 1);
        assert!(succ.contains(&("1212".to_string(), 2)), "{succ:?}");
        assert!(succ.contains(&("1002".to_string(), 0)));
    }

    #[test]
    fn free_edge_below_gains_arc_or_edge() {
        let succ = successors("3000", 2, 1, 1);
        let names: Vec<&str> = succ.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(names, vec!["1020", "1200", "1230", "1320", "3000"]);
    }

    #[test]
    fn forbidden_kink_aborts() {
        let moduli = ms();
        let mut states = StateMap::default();
        states.insert(key("2100"), TruncatedPolynomial::one(&moduli));
        let geom = SweepGeometry { width: 2, max_columns: 4, column: 1, row: 0 };
        let err = kink_update(&states, &geom, 9, false, &moduli).unwrap_err();
        assert!(matches!(err, EngineError::ForbiddenKink { ref kink, .. } if kink == "21"), "{err}");
    }

    #[test]
    fn too_wide_is_a_configuration_error() {
        assert_eq!(sweep(&SweepConfig::new(30, 1, 61), &ms()).unwrap_err(), EngineError::TooWide(30));
    }

    #[test]
    fn slot_masks() {
        assert_eq!(slot_mask(0, 0), 0b11);
        assert_eq!(slot_mask(1, 2), 0b1111_00);
        assert_eq!(slot_mask(0, 31), u64::MAX);
    }
}
