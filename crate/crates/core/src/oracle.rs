//! Brute-force depth-first enumeration of walks from the origin.
//!
//! This is the reference every other part of the crate is tested against, so
//! it stays deliberately plain: an occupancy grid, four neighbours, no
//! symmetry tricks. Work is split over short prefixes and the integer tallies
//! are summed afterwards, so the result does not depend on scheduling.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::modseries::{Quantity, SeriesTable};

const STEPS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
const PREFIX_DEPTH: usize = 4;

/// Running description of the current walk, updated incrementally.
#[derive(Debug, Clone, Copy)]
struct Walk {
    x: i32,
    y: i32,
    min_x: i32,
    max_x: i32,
    min_y: i32,
    max_y: i32,
    sum_x: i64,
    sum_y: i64,
    sum_sq: i64,
}

impl Walk {
    fn origin() -> Self {
        Self { x: 0, y: 0, min_x: 0, max_x: 0, min_y: 0, max_y: 0, sum_x: 0, sum_y: 0, sum_sq: 0 }
    }

    fn step(&self, dx: i32, dy: i32) -> Self {
        let (x, y) = (self.x + dx, self.y + dy);
        Self {
            x,
            y,
            min_x: self.min_x.min(x),
            max_x: self.max_x.max(x),
            min_y: self.min_y.min(y),
            max_y: self.max_y.max(y),
            sum_x: self.sum_x + x as i64,
            sum_y: self.sum_y + y as i64,
            sum_sq: self.sum_sq + (x as i64 * x as i64 + y as i64 * y as i64),
        }
    }
}

trait Tally: Default + Send {
    fn record(&mut self, walk: &Walk, n: usize);
    fn absorb(&mut self, other: Self);
}

#[derive(Default)]
struct Counts(Vec<u64>);

impl Tally for Counts {
    fn record(&mut self, _: &Walk, n: usize) {
        if self.0.len() <= n {
            self.0.resize(n + 1, 0);
        }
        self.0[n] += 1;
    }

    fn absorb(&mut self, other: Self) {
        add_vec(&mut self.0, other.0);
    }
}

/// Indexed by `n`, then vertical extent, then horizontal extent.
#[derive(Default)]
struct Boxes(Vec<Vec<Vec<u64>>>);

impl Tally for Boxes {
    fn record(&mut self, w: &Walk, n: usize) {
        while self.0.len() <= n {
            let m = self.0.len() + 1;
            self.0.push(vec![vec![0; m]; m]);
        }
        let (v, h) = ((w.max_y - w.min_y) as usize, (w.max_x - w.min_x) as usize);
        self.0[n][v][h] += 1;
    }

    fn absorb(&mut self, other: Self) {
        if self.0.len() < other.0.len() {
            let mut other = other;
            std::mem::swap(&mut self.0, &mut other.0);
            self.absorb(other);
            return;
        }
        for (mine, theirs) in self.0.iter_mut().zip(other.0) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                add_vec(a, b);
            }
        }
    }
}

/// Per length: end-to-end, pair-distance and doubled end-point-distance sums.
#[derive(Default)]
struct Metrics(Vec<[u64; 3]>);

impl Tally for Metrics {
    fn record(&mut self, w: &Walk, n: usize) {
        if self.0.len() <= n {
            self.0.resize(n + 1, [0; 3]);
        }
        let k = n as i64 + 1;
        let end_sq = w.x as i64 * w.x as i64 + w.y as i64 * w.y as i64;
        let pairs = k * w.sum_sq - (w.sum_x * w.sum_x + w.sum_y * w.sum_y);
        let ends = 2 * w.sum_sq + k * end_sq - 2 * (w.x as i64 * w.sum_x + w.y as i64 * w.sum_y);
        let row = &mut self.0[n];
        row[0] += end_sq as u64;
        row[1] += pairs as u64;
        row[2] += ends as u64;
    }

    fn absorb(&mut self, other: Self) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), [0; 3]);
        }
        for (a, b) in self.0.iter_mut().zip(other.0) {
            for i in 0..3 {
                a[i] += b[i];
            }
        }
    }
}

fn add_vec(a: &mut Vec<u64>, b: Vec<u64>) {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

struct Grid {
    side: i32,
    occupied: Vec<bool>,
}

impl Grid {
    fn new(n_max: usize) -> Self {
        let side = 2 * n_max as i32 + 3;
        Self { side, occupied: vec![false; (side * side) as usize] }
    }

    #[inline]
    fn index(&self, x: i32, y: i32) -> usize {
        let c = self.side / 2;
        ((y + c) * self.side + (x + c)) as usize
    }
}

fn extend<T: Tally>(grid: &mut Grid, walk: &Walk, n: usize, n_max: usize, tally: &mut T) {
    tally.record(walk, n);
    if n == n_max {
        return;
    }
    for (dx, dy) in STEPS {
        let idx = grid.index(walk.x + dx, walk.y + dy);
        if grid.occupied[idx] {
            continue;
        }
        grid.occupied[idx] = true;
        extend(grid, &walk.step(dx, dy), n + 1, n_max, tally);
        grid.occupied[idx] = false;
    }
}

/// All self-avoiding prefixes of exactly `depth` steps, tallying the shorter
/// ones on the way.
fn prefixes<T: Tally>(depth: usize, tally: &mut T) -> Vec<Vec<(i32, i32)>> {
    fn go<T: Tally>(path: &mut Vec<(i32, i32)>, walk: Walk, depth: usize, tally: &mut T, out: &mut Vec<Vec<(i32, i32)>>) {
        let n = path.len() - 1;
        if n == depth {
            out.push(path.clone());
            return;
        }
        tally.record(&walk, n);
        for (dx, dy) in STEPS {
            let next = (walk.x + dx, walk.y + dy);
            if path.contains(&next) {
                continue;
            }
            path.push(next);
            go(path, walk.step(dx, dy), depth, tally, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut vec![(0, 0)], Walk::origin(), depth, tally, &mut out);
    out
}

fn run<T: Tally>(n_max: usize) -> T {
    let depth = n_max.min(PREFIX_DEPTH);
    let mut total = T::default();
    let starts = prefixes(depth, &mut total);
    let parts: Vec<T> = starts
        .par_iter()
        .map(|path| {
            let mut grid = Grid::new(n_max);
            let mut walk = Walk::origin();
            for &(x, y) in path {
                let idx = grid.index(x, y);
                grid.occupied[idx] = true;
                if (x, y) != (0, 0) {
                    walk = walk.step(x - walk.x, y - walk.y);
                }
            }
            let mut tally = T::default();
            extend(&mut grid, &walk, depth, n_max, &mut tally);
            tally
        })
        .collect();
    for p in parts {
        total.absorb(p);
    }
    total
}

fn to_table(quantity: Quantity, values: impl IntoIterator<Item = u64>) -> SeriesTable {
    SeriesTable::exact(quantity, values.into_iter().map(BigUint::from).collect())
}

/// `c_0 ..= c_{n_max}`: walks from the origin, each direction counted.
pub fn count_walks(n_max: usize) -> SeriesTable {
    let Counts(c) = run::<Counts>(n_max);
    to_table(Quantity::Count, c).with_meta("source", "oracle")
}

/// Length polynomials of walks by exact bounding box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxTable {
    n_max: usize,
    /// `counts[n][v][h]`: walks of `n` steps whose box is `v` cells high and
    /// `h` cells long.
    counts: Vec<Vec<Vec<u64>>>,
}

impl BoxTable {
    pub fn compute(n_max: usize) -> Self {
        let Boxes(counts) = run::<Boxes>(n_max);
        Self { n_max, counts }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Coefficients for `n = 0..=n_max` of walks spanning a box `width` high
    /// and `length` long (one orientation only).
    pub fn spanning(&self, width: usize, length: usize) -> Vec<u64> {
        self.counts
            .iter()
            .map(|by_v| by_v.get(width).and_then(|by_h| by_h.get(length)).copied().unwrap_or(0))
            .collect()
    }
}

pub fn box_spanning_counts(width: usize, length: usize, n_max: usize) -> Vec<u64> {
    BoxTable::compute(n_max).spanning(width, length)
}

/// Integer-valued metric generating-function coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSeries {
    /// Sum over walks of the squared end-to-end distance.
    pub end_to_end: SeriesTable,
    /// Sum over walks of the squared distances between all vertex pairs.
    pub gyration: SeriesTable,
    /// Sum over walks of half the squared distances from every vertex to the
    /// two end-points.
    pub monomer: SeriesTable,
}

pub fn metric_sums(n_max: usize) -> MetricSeries {
    let Metrics(rows) = run::<Metrics>(n_max);
    for (n, r) in rows.iter().enumerate() {
        assert!(r[2] % 2 == 0, "odd end-point distance sum at n = {n}");
    }
    MetricSeries {
        end_to_end: to_table(Quantity::R2e, rows.iter().map(|r| r[0])).with_meta("source", "oracle"),
        gyration: to_table(Quantity::R2g, rows.iter().map(|r| r[1])).with_meta("source", "oracle"),
        monomer: to_table(Quantity::R2m, rows.iter().map(|r| r[2] / 2)).with_meta("source", "oracle"),
    }
}
