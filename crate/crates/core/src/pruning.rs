//! Lower bounds on the number of steps still needed to turn a partial
//! configuration into a walk that spans its rectangle.
//!
//! Because a signature prescribes how every occupied cut edge continues to
//! the right, the completion is fixed up to geometry and the bound reduces to
//! a single bracket scan:
//!
//! * each arc between rows `i < j` needs `j - i` vertical steps;
//! * an arc with other connections nested inside must detour around them,
//!   one extra column per nesting level, costing two horizontal steps per
//!   level (one out, one back);
//! * an unset border flag costs the distance from the nearest occupied edge
//!   to that border;
//! * the walk has to reach column `W`; the cheapest way is either pushing the
//!   farthest arc further right (two steps per column) or running a free end
//!   there (one step per column).
//!
//! Vertical and horizontal steps are counted on disjoint row gaps and column
//! gaps respectively, which keeps the sum admissible.

use crate::signature::{match_arcs, Arc, Signature, SignatureKey, Violation};

/// Geometry needed to price a plain (kink-free) cut-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PruneContext {
    /// Rectangle width in cells; rows run `0..=width`.
    pub width: u32,
    /// Column holding the right end-points of the cut edges.
    pub column: u32,
    pub n_max: u32,
}

/// Position of the cut-line inside a column sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutGeometry {
    pub width: u32,
    /// Column of the vertices currently being added.
    pub column: u32,
    /// Slot index of the vertical kink edge; slots below it already lead into
    /// the next column.
    pub kink: u32,
}

impl CutGeometry {
    #[inline]
    fn slot_position(&self, slot: u32) -> (u32, u32) {
        if slot < self.kink {
            (slot, self.column + 1)
        } else if slot == self.kink {
            (slot, self.column)
        } else {
            (slot - 1, self.column)
        }
    }
}

/// `sum over arcs of (upper - lower + 2 h)` where `h` is the number of nesting
/// levels inside the arc. Free and empty edges cost nothing.
pub fn connection_cost(arcs: &[Arc]) -> u32 {
    let mut sorted: Vec<&Arc> = arcs.iter().collect();
    sorted.sort_by_key(|a| a.upper);
    // Arcs sorted by upper end close children before parents.
    let mut heights: Vec<(usize, usize, u32)> = Vec::with_capacity(arcs.len());
    let mut total = 0u32;
    for a in sorted {
        let mut h = 0;
        let mut k = heights.len();
        while k > 0 && heights[k - 1].0 > a.lower {
            h = h.max(heights[k - 1].2 + 1);
            k -= 1;
        }
        heights.truncate(k);
        heights.push((a.lower, a.upper, h));
        total += (a.upper - a.lower) as u32 + 2 * h;
    }
    total
}

/// Vertical steps still needed to reach the bottom and top rows.
pub fn border_cost(sig: &Signature, ctx: &PruneContext) -> u32 {
    let rows: Vec<u32> = sig
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_occupied())
        .map(|(i, _)| i as u32)
        .collect();
    let (Some(&lo), Some(&hi)) = (rows.first(), rows.last()) else {
        return if sig.bottom_touched && sig.top_touched { 0 } else { ctx.width };
    };
    let mut cost = 0;
    if !sig.bottom_touched {
        cost += lo;
    }
    if !sig.top_touched {
        cost += ctx.width.saturating_sub(hi);
    }
    cost
}

/// Horizontal steps still needed to reach column `W`.
pub fn extension_cost(ctx: &PruneContext) -> u32 {
    ctx.width.saturating_sub(ctx.column)
}

pub fn should_prune(n_cur: u32, n_add: u32, ctx: &PruneContext) -> bool {
    n_cur + n_add > ctx.n_max
}

/// Combined bound for a plain cut-line whose edges all end in
/// `ctx.column`.
pub fn additional_steps(sig: &Signature, ctx: &PruneContext) -> Result<u32, Violation> {
    match_arcs(sig)?;
    let mut visits = 0;
    let entries = sig.edges.iter().enumerate().map(|(i, e)| (i as u32, ctx.column, e.code()));
    Ok(bound(entries, ctx.width, sig.bottom_touched, sig.top_touched, &mut visits))
}

/// Bound for a packed engine key. `visits` is incremented once per occupied
/// slot read; empty slots are skipped with a bit scan.
#[inline]
pub fn key_additional_steps(key: SignatureKey, slots: u32, geom: &CutGeometry, visits: &mut u64) -> u32 {
    let mut occupied = key.occupation() & ((1u64 << (2 * slots)) - 1);
    let entries = std::iter::from_fn(move || {
        if occupied == 0 {
            return None;
        }
        let s = occupied.trailing_zeros() / 2;
        occupied &= occupied - 1;
        let (row, col) = geom.slot_position(s);
        Some((row, col, key.get(s as usize)))
    });
    bound(entries, geom.width, key.bottom_touched(), key.top_touched(), visits)
}

const NO_CHILD: u32 = u32::MAX;

/// Single pass over `(row, column, state)` triples in cut order.
#[inline]
fn bound(
    entries: impl Iterator<Item = (u32, u32, u8)>,
    width: u32,
    bottom_touched: bool,
    top_touched: bool,
    visits: &mut u64,
) -> u32 {
    // (row, column, farthest column reached by anything nested inside)
    let mut stack = [(0u32, 0u32, NO_CHILD); 16];
    let mut sp = 0usize;
    let (mut vertical, mut horizontal) = (0u32, 0u32);
    let (mut min_row, mut max_row) = (u32::MAX, 0u32);
    let mut extension = u32::MAX;
    for (row, col, state) in entries {
        *visits += 1;
        if state == 0 {
            continue;
        }
        min_row = min_row.min(row);
        max_row = max_row.max(row);
        match state {
            1 => {
                stack[sp] = (row, col, NO_CHILD);
                sp += 1;
            }
            2 => {
                sp -= 1;
                let (lrow, lcol, child) = stack[sp];
                let mut reach = lcol.max(col);
                if child != NO_CHILD {
                    reach = reach.max(child + 1);
                }
                vertical += row - lrow;
                horizontal += 2 * reach - lcol - col;
                extension = extension.min(2 * width.saturating_sub(reach));
                if sp > 0 {
                    let parent = &mut stack[sp - 1].2;
                    *parent = if *parent == NO_CHILD { reach } else { (*parent).max(reach) };
                }
            }
            _ => {
                if sp > 0 {
                    let parent = &mut stack[sp - 1].2;
                    *parent = if *parent == NO_CHILD { col } else { (*parent).max(col) };
                }
                extension = extension.min(width.saturating_sub(col));
            }
        }
    }
    if min_row == u32::MAX {
        return 0;
    }
    if !bottom_touched {
        vertical += min_row;
    }
    if !top_touched {
        vertical += width.saturating_sub(max_row);
    }
    vertical + horizontal + extension
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(lower: usize, upper: usize, nesting: usize) -> Arc {
        Arc { lower, upper, nesting }
    }

    fn ctx(width: u32, column: u32) -> PruneContext {
        PruneContext { width, column, n_max: 2 * width + 1 }
    }

    #[test]
    fn connection_cost_examples() {
        assert_eq!(connection_cost(&[arc(0, 1, 0)]), 1);
        assert_eq!(connection_cost(&[arc(0, 3, 0), arc(1, 2, 1)]), 6);
        assert_eq!(connection_cost(&[]), 0);
        // Two siblings inside one arc: the outer arc detours one column.
        assert_eq!(connection_cost(&[arc(0, 5, 0), arc(1, 2, 1), arc(3, 4, 1)]), 5 + 2 + 1 + 1);
        // Three deep.
        assert_eq!(connection_cost(&[arc(0, 5, 0), arc(1, 4, 1), arc(2, 3, 2)]), (5 + 4) + (3 + 2) + 1);
    }

    #[test]
    fn connection_cost_ignores_free_and_empty_entries() {
        let plain = Signature::parse("1122", true, true).unwrap();
        let padded = Signature::parse("0130312020", true, true).unwrap();
        let shift = |s: &Signature| {
            let arcs = match_arcs(s).unwrap();
            arcs.iter().map(|a| a.upper - a.lower).sum::<usize>()
        };
        assert_eq!(connection_cost(&match_arcs(&plain).unwrap()), 6);
        // Padding stretches the arcs but the nesting term is unchanged.
        let padded_cost = connection_cost(&match_arcs(&padded).unwrap());
        assert_eq!(padded_cost - shift(&padded) as u32, 6 - shift(&plain) as u32);
    }

    #[test]
    fn border_cost_examples() {
        let s = Signature::parse("001002", true, true).unwrap();
        assert_eq!(border_cost(&s, &ctx(5, 0)), 0);
        let s = Signature::parse("001002", false, true).unwrap();
        assert_eq!(border_cost(&s, &ctx(5, 0)), 2);
        let s = Signature::parse("001020", true, false).unwrap();
        assert_eq!(border_cost(&s, &ctx(5, 0)), 1);
        assert!(border_cost(&Signature::empty(4), &ctx(3, 0)) >= 3);
    }

    #[test]
    fn extension_cost_examples() {
        assert_eq!(extension_cost(&ctx(10, 3)), 7);
        assert_eq!(extension_cost(&ctx(10, 12)), 0);
        assert_eq!(extension_cost(&ctx(0, 5)), 0);
    }

    #[test]
    fn prune_threshold() {
        let c = PruneContext { width: 20, column: 0, n_max: 41 };
        assert!(should_prune(30, 12, &c));
        assert!(!should_prune(30, 11, &c));
    }

    #[test]
    fn plain_cut_bound() {
        // One adjacent arc, both borders touched, past column W: one step.
        let s = Signature::parse("0120", true, true).unwrap();
        assert_eq!(additional_steps(&s, &ctx(3, 5)).unwrap(), 1);
        // Same arc at column 1 of a width-3 rectangle: the arc must also be
        // pushed out to column 3, two extra columns both ways.
        assert_eq!(additional_steps(&s, &ctx(3, 1)).unwrap(), 1 + 4);
        // A free end can walk there on its own.
        let s = Signature::parse("0123", true, true).unwrap();
        assert_eq!(additional_steps(&s, &ctx(3, 1)).unwrap(), 1 + 2);
        assert!(additional_steps(&Signature::parse("21", true, true).unwrap(), &ctx(1, 1)).is_err());
    }

    #[test]
    fn staircase_positions() {
        // Kink at slot 2 in column 4: slots 0,1 lead into column 5, slot 2 is
        // the vertical edge into (4, 2), slot 3 is the old edge into (4, 2).
        let g = CutGeometry { width: 3, column: 4, kink: 2 };
        assert_eq!(g.slot_position(0), (0, 5));
        assert_eq!(g.slot_position(1), (1, 5));
        assert_eq!(g.slot_position(2), (2, 4));
        assert_eq!(g.slot_position(3), (2, 4));
        assert_eq!(g.slot_position(4), (3, 4));
        // A kink pair '12' meets at one vertex and costs nothing.
        let key = crate::signature::encode(&Signature::parse("00120", true, true).unwrap()).unwrap();
        let mut visits = 0;
        assert_eq!(key_additional_steps(key, 5, &g, &mut visits), 0);
        assert_eq!(visits, 2);
    }
}
