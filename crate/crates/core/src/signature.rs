//! Cut-line signatures: edge states, bit packing, bracket matching and the
//! accessibility rules for inserting new connections.
//!
//! A signature lists the states of the edges crossed by the cut-line, read
//! from the bottom of the rectangle to the top. Lower/upper edges are the two
//! ends of an arc that still has to be joined to the right of the cut; a free
//! edge leads to an end-point of the walk. Reading lower as `(` and upper as
//! `)` always gives a balanced, non-crossing bracket word.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum EdgeState {
    Empty = 0,
    Lower = 1,
    Upper = 2,
    Free = 3,
}

impl EdgeState {
    #[inline]
    pub fn from_code(code: u8) -> Self {
        match code & 3 {
            0 => EdgeState::Empty,
            1 => EdgeState::Lower,
            2 => EdgeState::Upper,
            _ => EdgeState::Free,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn is_occupied(self) -> bool {
        self != EdgeState::Empty
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("invalid edge state character '{0}'")]
    BadState(char),
    #[error("{0} edge slots exceed the {max} slots of a packed key", max = MAX_SLOTS)]
    TooWide(usize),
    #[error("key has bits set beyond slot {0}")]
    WidthMismatch(usize),
    #[error(transparent)]
    Invalid(#[from] Violation),
}

/// First invariant a signature breaks.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("upper edge at position {0} has no lower partner below it")]
    UnmatchedUpper(usize),
    #[error("lower edge at position {0} has no upper partner above it")]
    UnmatchedLower(usize),
    #[error("{0} free edges (at most 2 allowed)")]
    TooManyFree(usize),
}

/// Edge states of a cut-line plus the two border-touch flags.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    pub edges: Vec<EdgeState>,
    pub bottom_touched: bool,
    pub top_touched: bool,
}

impl Signature {
    pub fn empty(edges: usize) -> Self {
        Self { edges: vec![EdgeState::Empty; edges], bottom_touched: false, top_touched: false }
    }

    /// Parses a digit string such as `"030010230"` (bottom edge first).
    /// Whitespace is ignored.
    pub fn parse(digits: &str, bottom_touched: bool, top_touched: bool) -> Result<Self, SignatureError> {
        let edges = digits
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(EdgeState::Empty),
                '1' => Ok(EdgeState::Lower),
                '2' => Ok(EdgeState::Upper),
                '3' => Ok(EdgeState::Free),
                other => Err(SignatureError::BadState(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { edges, bottom_touched, top_touched })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn free_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e == EdgeState::Free).count()
    }

    pub fn occupied_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_occupied()).count()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.edges {
            write!(f, "{}", e.code())?;
        }
        write!(f, " [{}{}]", self.bottom_touched as u8, self.top_touched as u8)
    }
}

/// Largest number of edge slots a packed key can hold.
pub const MAX_SLOTS: usize = 31;

/// Packed signature: slot `i` in bits `2i..2i+2`, bottom flag in bit 62 and
/// top flag in bit 63.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignatureKey(pub u64);

impl SignatureKey {
    pub const BOTTOM: u64 = 1 << 62;
    pub const TOP: u64 = 1 << 63;
    pub const EDGE_MASK: u64 = (1 << 62) - 1;

    #[inline]
    pub fn get(self, i: usize) -> u8 {
        ((self.0 >> (2 * i)) & 3) as u8
    }

    #[inline]
    pub fn with(self, i: usize, state: u8) -> Self {
        let shift = 2 * i;
        Self((self.0 & !(3 << shift)) | ((state as u64) << shift))
    }

    #[inline]
    pub fn edges(self) -> u64 {
        self.0 & Self::EDGE_MASK
    }

    #[inline]
    pub fn bottom_touched(self) -> bool {
        self.0 & Self::BOTTOM != 0
    }

    #[inline]
    pub fn top_touched(self) -> bool {
        self.0 & Self::TOP != 0
    }

    /// Bit mask with `01` in every occupied slot.
    #[inline]
    pub fn occupation(self) -> u64 {
        let e = self.edges();
        (e | (e >> 1)) & 0x1555_5555_5555_5555
    }
}

pub fn encode(sig: &Signature) -> Result<SignatureKey, SignatureError> {
    if sig.edges.len() > MAX_SLOTS {
        return Err(SignatureError::TooWide(sig.edges.len()));
    }
    let mut key = 0u64;
    for (i, e) in sig.edges.iter().enumerate() {
        key |= (e.code() as u64) << (2 * i);
    }
    if sig.bottom_touched {
        key |= SignatureKey::BOTTOM;
    }
    if sig.top_touched {
        key |= SignatureKey::TOP;
    }
    Ok(SignatureKey(key))
}

/// Unpacks `edges` slots; any set bit beyond them is a width mismatch.
pub fn decode(key: SignatureKey, edges: usize) -> Result<Signature, SignatureError> {
    if edges > MAX_SLOTS {
        return Err(SignatureError::TooWide(edges));
    }
    if key.edges() >> (2 * edges) != 0 {
        return Err(SignatureError::WidthMismatch(edges));
    }
    Ok(Signature {
        edges: (0..edges).map(|i| EdgeState::from_code(key.get(i))).collect(),
        bottom_touched: key.bottom_touched(),
        top_touched: key.top_touched(),
    })
}

/// A matched lower/upper pair. `nesting` counts the arcs strictly enclosing
/// this one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub lower: usize,
    pub upper: usize,
    pub nesting: usize,
}

pub type ArcList = Vec<Arc>;

/// Matches lower and upper edges as brackets. Arcs come out sorted by their
/// lower position.
pub fn match_arcs(sig: &Signature) -> Result<ArcList, Violation> {
    let mut open: Vec<usize> = Vec::new();
    let mut arcs = Vec::new();
    for (i, e) in sig.edges.iter().enumerate() {
        match e {
            EdgeState::Lower => open.push(i),
            EdgeState::Upper => {
                let lower = open.pop().ok_or(Violation::UnmatchedUpper(i))?;
                arcs.push(Arc { lower, upper: i, nesting: open.len() });
            }
            _ => {}
        }
    }
    if let Some(&pos) = open.first() {
        return Err(Violation::UnmatchedLower(pos));
    }
    arcs.sort_by_key(|a| a.lower);
    Ok(arcs)
}

pub fn validate(sig: &Signature) -> Result<(), Violation> {
    match_arcs(sig)?;
    let free = sig.free_count();
    if free > 2 {
        return Err(Violation::TooManyFree(free));
    }
    Ok(())
}

/// Something a new connection inserted on the cut-line may attach to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Arc { lower: usize, upper: usize },
    Free(usize),
}

/// Arcs and free edges reachable from the gap just below edge `gap` (so the
/// insertion sits between edges `gap - 1` and `gap`) without crossing any
/// arc.
///
/// Scanning outward from the gap, an arc whose nearer end is met at bracket
/// depth zero is reachable; everything nested inside it is skipped. The scan
/// stops at the arc enclosing the gap, which is itself reachable.
pub fn accessible_targets(sig: &Signature, gap: usize) -> Vec<Target> {
    let mut out = Vec::new();
    let gap = gap.min(sig.edges.len());
    scan_accessible(|i| sig.edges[i].code(), sig.edges.len(), gap, gap, &mut out);
    out.sort();
    out
}

/// Core of [`accessible_targets`] over raw state codes. Slots
/// `gap_lo..gap_hi` are the (empty) insertion site; the downward scan starts
/// at `gap_lo - 1` and the upward scan at `gap_hi`.
#[inline]
pub(crate) fn scan_accessible(get: impl Fn(usize) -> u8, len: usize, gap_lo: usize, gap_hi: usize, out: &mut Vec<Target>) {
    // Downward: uppers open a nested block, lowers close it.
    let mut depth = 0usize;
    let mut block_upper = 0usize;
    let mut enclosing_lower = None;
    for i in (0..gap_lo).rev() {
        match get(i) {
            2 => {
                if depth == 0 {
                    block_upper = i;
                }
                depth += 1;
            }
            1 => {
                if depth == 0 {
                    enclosing_lower = Some(i);
                    break;
                }
                depth -= 1;
                if depth == 0 {
                    out.push(Target::Arc { lower: i, upper: block_upper });
                }
            }
            3 if depth == 0 => out.push(Target::Free(i)),
            _ => {}
        }
    }

    let mut depth = 0usize;
    let mut block_lower = 0usize;
    for i in gap_hi..len {
        match get(i) {
            1 => {
                if depth == 0 {
                    block_lower = i;
                }
                depth += 1;
            }
            2 => {
                if depth == 0 {
                    if let Some(lower) = enclosing_lower {
                        out.push(Target::Arc { lower, upper: i });
                    }
                    break;
                }
                depth -= 1;
                if depth == 0 {
                    out.push(Target::Arc { lower: block_lower, upper: i });
                }
            }
            3 if depth == 0 => out.push(Target::Free(i)),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(s: &str) -> Signature {
        Signature::parse(s, false, false).unwrap()
    }

    /// Every valid signature of `n` edges: balanced brackets, at most two free.
    pub(crate) fn all_valid(n: usize) -> Vec<Signature> {
        let mut out = Vec::new();
        for code in 0..4u64.pow(n as u32) {
            let edges: Vec<EdgeState> = (0..n).map(|i| EdgeState::from_code((code >> (2 * i)) as u8)).collect();
            for flags in 0..4 {
                let s = Signature { edges: edges.clone(), bottom_touched: flags & 1 != 0, top_touched: flags & 2 != 0 };
                if validate(&s).is_ok() {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Independent reachability check: a target is reachable from the gap
    /// iff no arc has the gap on one side and the target on the other.
    fn reachable_by_crossing_test(sig: &Signature, gap: usize, target: Target) -> bool {
        let arcs = match_arcs(sig).unwrap();
        let gap_pos = gap as f64 - 0.5;
        let inside = |a: &Arc, p: f64| (a.lower as f64) < p && p < a.upper as f64;
        let probe = match target {
            Target::Arc { lower, .. } => lower as f64,
            Target::Free(p) => p as f64,
        };
        arcs.iter()
            .filter(|a| match target {
                Target::Arc { lower, upper } => !(a.lower == lower && a.upper == upper),
                Target::Free(_) => true,
            })
            .all(|a| inside(a, gap_pos) == inside(a, probe))
    }

    fn all_targets(sig: &Signature) -> Vec<Target> {
        let mut t: Vec<Target> = match_arcs(sig)
            .unwrap()
            .iter()
            .map(|a| Target::Arc { lower: a.lower, upper: a.upper })
            .collect();
        t.extend(sig.edges.iter().enumerate().filter(|(_, e)| **e == EdgeState::Free).map(|(i, _)| Target::Free(i)));
        t
    }

    #[test]
    fn printed_signatures_round_trip() {
        for s in ["030010230", "102001002", "300000012"] {
            let sg = Signature::parse(s, true, true).unwrap();
            assert!(validate(&sg).is_ok(), "{s}");
            let key = encode(&sg).unwrap();
            assert_eq!(decode(key, 9).unwrap(), sg);
        }
    }

    #[test]
    fn empty_signature_has_zero_edge_bits() {
        let key = encode(&Signature::empty(9)).unwrap();
        assert_eq!(key.edges(), 0);
        assert_eq!(key.0, 0);
        assert_eq!(decode(SignatureKey(0), 9).unwrap(), Signature::empty(9));
    }

    #[test]
    fn decode_rejects_wider_key() {
        let key = encode(&sig("0000000003")).unwrap();
        assert_eq!(decode(key, 9), Err(SignatureError::WidthMismatch(9)));
        assert!(encode(&Signature::empty(32)).is_err());
    }

    #[test]
    fn match_arcs_examples() {
        let a = |lower, upper, nesting| Arc { lower, upper, nesting };
        assert_eq!(match_arcs(&sig("1122")).unwrap(), vec![a(0, 3, 0), a(1, 2, 1)]);
        assert_eq!(match_arcs(&sig("1212")).unwrap(), vec![a(0, 1, 0), a(2, 3, 0)]);
        assert_eq!(match_arcs(&sig("102001002")).unwrap(), vec![a(0, 2, 0), a(5, 8, 0)]);
        assert_eq!(match_arcs(&sig("030010230")).unwrap(), vec![a(4, 6, 0)]);
        assert_eq!(match_arcs(&sig("21")), Err(Violation::UnmatchedUpper(0)));
        assert_eq!(match_arcs(&sig("1")), Err(Violation::UnmatchedLower(0)));
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate(&sig("2100")), Err(Violation::UnmatchedUpper(0)));
        assert_eq!(validate(&sig("3030 03")), Err(Violation::TooManyFree(3)));
        assert_eq!(validate(&sig("030010230")), Ok(()));
    }

    #[test]
    fn new_arc_below_four_arcs_reaches_three() {
        // Enclosing arc E = (0,7); inside it, above the gap: arc A = (1,2)
        // and arc B = (3,6) with arc C = (4,5) nested in B.
        let s = sig("11211222");
        let t = accessible_targets(&s, 1);
        assert_eq!(
            t,
            vec![
                Target::Arc { lower: 0, upper: 7 },
                Target::Arc { lower: 1, upper: 2 },
                Target::Arc { lower: 3, upper: 6 },
            ]
        );
    }

    #[test]
    fn insertion_inside_single_arc_reaches_it() {
        assert_eq!(accessible_targets(&sig("12"), 1), vec![Target::Arc { lower: 0, upper: 1 }]);
    }

    #[test]
    fn insertion_inside_inner_arc_cannot_reach_outer() {
        assert_eq!(accessible_targets(&sig("1122"), 2), vec![Target::Arc { lower: 1, upper: 2 }]);
        assert_eq!(
            accessible_targets(&sig("1122"), 1),
            vec![Target::Arc { lower: 0, upper: 3 }, Target::Arc { lower: 1, upper: 2 }]
        );
        assert_eq!(
            accessible_targets(&sig("312123"), 3),
            vec![Target::Arc { lower: 1, upper: 2 }, Target::Arc { lower: 3, upper: 4 }, Target::Free(0), Target::Free(5)]
        );
        assert_eq!(accessible_targets(&sig("1302"), 2), vec![Target::Arc { lower: 0, upper: 3 }, Target::Free(1)]);
        assert_eq!(accessible_targets(&sig("1320"), 4), vec![Target::Arc { lower: 0, upper: 2 }]);
    }

    #[test]
    fn exhaustive_accessibility_matches_crossing_test() {
        for n in 0..=6 {
            for s in all_valid(n).into_iter().filter(|s| !s.bottom_touched && !s.top_touched) {
                for gap in 0..=n {
                    let got = accessible_targets(&s, gap);
                    for t in all_targets(&s) {
                        assert_eq!(
                            got.contains(&t),
                            reachable_by_crossing_test(&s, gap, t),
                            "sig {s} gap {gap} target {t:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn exhaustive_round_trip_and_arc_counts() {
        for n in 0..=4 {
            let all = all_valid(n);
            let mut keys = std::collections::HashSet::new();
            for s in &all {
                let key = encode(s).unwrap();
                assert!(keys.insert(key), "duplicate key for {s}");
                assert_eq!(&decode(key, n).unwrap(), s);
                let arcs = match_arcs(s).unwrap();
                let brackets = s.edges.iter().filter(|e| matches!(e, EdgeState::Lower | EdgeState::Upper)).count();
                assert_eq!(2 * arcs.len(), brackets);
                for (i, a) in arcs.iter().enumerate() {
                    assert!(a.lower < a.upper);
                    for b in &arcs[i + 1..] {
                        let crossing = (a.lower < b.lower && b.lower < a.upper && a.upper < b.upper)
                            || (b.lower < a.lower && a.lower < b.upper && b.upper < a.upper);
                        assert!(!crossing);
                    }
                    let enclosing = arcs.iter().filter(|b| b.lower < a.lower && a.upper < b.upper).count();
                    assert_eq!(a.nesting, enclosing);
                }
            }
        }
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn arbitrary_edge_words_round_trip(codes in proptest::collection::vec(0u8..4, 0..=MAX_SLOTS), b: bool, t: bool) {
            let s = Signature { edges: codes.iter().map(|&c| EdgeState::from_code(c)).collect(), bottom_touched: b, top_touched: t };
            let key = encode(&s).unwrap();
            prop_assert_eq!(decode(key, s.len()).unwrap(), s);
        }
    }
}
