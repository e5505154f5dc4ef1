//! Truncated polynomials over machine-word moduli, CRT reconstruction and
//! the plain-text series file format shared by every tool in the crate.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModError {
    #[error("modulus must be at least 2, got {0}")]
    TooSmall(u64),
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("empty modulus set")]
    Empty,
    #[error("{residues} residues supplied for {moduli} moduli")]
    LengthMismatch { residues: usize, moduli: usize },
    #[error("residue {residue} is not reduced modulo {modulus}")]
    Unreduced { residue: u64, modulus: u64 },
    #[error("modulus {0} is too large for metric products (must be below 2^30)")]
    TooLargeForProducts(u64),
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Modulus(#[from] ModError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> SeriesError {
    SeriesError::Parse { line, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusKind {
    PowerOfTwo,
    Prime,
    General,
}

/// A single modulus. Power-of-two moduli reduce by masking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulus {
    value: u64,
    kind: ModulusKind,
}

impl Modulus {
    pub fn new(value: u64) -> Result<Self, ModError> {
        if value < 2 {
            return Err(ModError::TooSmall(value));
        }
        let kind = if value.is_power_of_two() {
            ModulusKind::PowerOfTwo
        } else if is_prime(value) {
            ModulusKind::Prime
        } else {
            ModulusKind::General
        };
        Ok(Self { value, kind })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn kind(&self) -> ModulusKind {
        self.kind
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            ModulusKind::PowerOfTwo => a.wrapping_add(b) & (self.value - 1),
            _ => {
                let (s, carry) = a.overflowing_add(b);
                if carry || s >= self.value {
                    s.wrapping_sub(self.value)
                } else {
                    s
                }
            }
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.value as u128) as u64
    }

    pub fn reduce(&self, v: &BigUint) -> u64 {
        let r = v % BigUint::from(self.value);
        r.iter_u64_digits().next().unwrap_or(0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    // Deterministic Miller-Rabin for 64-bit inputs.
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let m = Modulus { value: n, kind: ModulusKind::General };
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = m.mul(acc, b);
            }
            b = m.mul(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = m.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An ordered set of pairwise coprime moduli.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusSet {
    moduli: Vec<Modulus>,
}

pub const POW2_62: u64 = 1 << 62;

impl ModulusSet {
    pub fn new(values: &[u64]) -> Result<Self, ModError> {
        if values.is_empty() {
            return Err(ModError::Empty);
        }
        let moduli = values.iter().map(|&v| Modulus::new(v)).collect::<Result<Vec<_>, _>>()?;
        for (i, a) in values.iter().enumerate() {
            for b in &values[i + 1..] {
                if a.gcd(b) != 1 {
                    return Err(ModError::NotCoprime(*a, *b));
                }
            }
        }
        Ok(Self { moduli })
    }

    /// `{2^62, 2^62 - 1}`, enough for every count below 2^123.
    pub fn default_counts() -> Self {
        Self::new(&[POW2_62, POW2_62 - 1]).expect("default moduli are coprime")
    }

    /// Moduli used for series that need coefficient products must stay below
    /// 2^30 so a product of two residues fits a signed 64-bit word.
    pub fn check_product_safe(&self) -> Result<(), ModError> {
        match self.moduli.iter().find(|m| m.value >= 1 << 30) {
            Some(m) => Err(ModError::TooLargeForProducts(m.value)),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    pub fn values(&self) -> Vec<u64> {
        self.moduli.iter().map(|m| m.value).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Modulus> {
        self.moduli.iter()
    }

    pub fn get(&self, i: usize) -> &Modulus {
        &self.moduli[i]
    }

    pub fn product(&self) -> BigUint {
        self.moduli.iter().fold(BigUint::one(), |acc, m| acc * m.value)
    }
}

/// Generating function truncated at a fixed degree, one residue per modulus
/// per degree.
///
/// Only the window `lo..=hi` of degrees with at least one nonzero residue is
/// stored, degree-major: `coeffs[(d - lo) * m + j]` is the residue of the
/// degree-`d` coefficient modulo the `j`-th modulus. The empty polynomial has
/// no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TruncatedPolynomial {
    lo: u32,
    coeffs: Vec<u64>,
}

impl TruncatedPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant polynomial 1.
    pub fn one(moduli: &ModulusSet) -> Self {
        Self::monomial(0, moduli)
    }

    pub fn monomial(degree: u32, moduli: &ModulusSet) -> Self {
        Self { lo: degree, coeffs: vec![1; moduli.len()] }
    }

    /// Builds a polynomial from per-degree residue rows (`rows[d][j]`).
    pub fn from_rows(rows: &[Vec<u64>], moduli: &ModulusSet) -> Self {
        let mut p = Self { lo: 0, coeffs: Vec::with_capacity(rows.len() * moduli.len()) };
        for row in rows {
            assert_eq!(row.len(), moduli.len());
            for (j, &r) in row.iter().enumerate() {
                p.coeffs.push(r % moduli.get(j).value());
            }
        }
        p.trim(moduli.len());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest degree carrying a nonzero residue.
    pub fn min_degree(&self) -> Option<u32> {
        (!self.is_zero()).then_some(self.lo)
    }

    pub fn max_degree(&self, m: usize) -> Option<u32> {
        (!self.is_zero()).then(|| self.lo + (self.coeffs.len() / m) as u32 - 1)
    }

    /// Number of stored degrees (the window width).
    pub fn stored_terms(&self, m: usize) -> usize {
        self.coeffs.len() / m
    }

    /// Residues of the degree-`d` coefficient.
    pub fn coefficient(&self, d: u32, m: usize) -> Vec<u64> {
        match self.max_degree(m) {
            Some(hi) if d >= self.lo && d <= hi => {
                let at = (d - self.lo) as usize * m;
                self.coeffs[at..at + m].to_vec()
            }
            _ => vec![0; m],
        }
    }

    /// `self += x^shift * source`, dropping every term above `n_max`.
    pub fn add_shifted(&mut self, source: &Self, shift: u32, n_max: u32, moduli: &ModulusSet) {
        let m = moduli.len();
        let Some(src_hi) = source.max_degree(m) else { return };
        let new_lo = source.lo + shift;
        if new_lo > n_max {
            return;
        }
        let new_hi = (src_hi + shift).min(n_max);
        if self.is_zero() {
            self.lo = new_lo;
            let len = (new_hi - new_lo + 1) as usize * m;
            self.coeffs.clear();
            self.coeffs.extend_from_slice(&source.coeffs[..len]);
            self.trim(m);
            return;
        }
        let hi = self.max_degree(m).unwrap();
        if new_lo < self.lo {
            let pad = (self.lo - new_lo) as usize * m;
            self.coeffs.splice(0..0, std::iter::repeat(0).take(pad));
            self.lo = new_lo;
        }
        if new_hi > hi {
            let extra = (new_hi - hi) as usize * m;
            self.coeffs.extend(std::iter::repeat(0).take(extra));
        }
        let offset = (new_lo - self.lo) as usize * m;
        let len = (new_hi - new_lo + 1) as usize * m;
        let dst = self.coeffs[offset..offset + len].chunks_exact_mut(m);
        for (drow, srow) in dst.zip(source.coeffs[..len].chunks_exact(m)) {
            for ((t, &s), md) in drow.iter_mut().zip(srow).zip(moduli.iter()) {
                *t = md.add(*t, s);
            }
        }
        self.trim(m);
    }

    /// Drops every term of degree above `max_degree`.
    pub fn truncate(&mut self, max_degree: u32, m: usize) {
        let Some(hi) = self.max_degree(m) else { return };
        if max_degree < self.lo {
            self.coeffs.clear();
            self.lo = 0;
        } else if max_degree < hi {
            self.coeffs.truncate((max_degree - self.lo + 1) as usize * m);
            self.trim(m);
        }
    }

    /// Multiplies every coefficient by a small integer.
    pub fn scale(&mut self, factor: u64, moduli: &ModulusSet) {
        let m = moduli.len();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let md = moduli.get(i % m);
            *c = md.mul(*c, factor % md.value());
        }
        self.trim(m);
    }

    fn trim(&mut self, m: usize) {
        let first = self.coeffs.chunks(m).position(|row| row.iter().any(|&c| c != 0));
        match first {
            None => {
                self.coeffs.clear();
                self.lo = 0;
            }
            Some(skip) => {
                let last = self.coeffs.chunks(m).rposition(|row| row.iter().any(|&c| c != 0)).unwrap();
                self.coeffs.truncate((last + 1) * m);
                if skip > 0 {
                    self.coeffs.drain(..skip * m);
                    self.lo += skip as u32;
                }
            }
        }
    }

    /// Dense residue rows for degrees `0..=n_max`.
    pub fn to_rows(&self, n_max: u32, m: usize) -> Vec<Vec<u64>> {
        (0..=n_max).map(|d| self.coefficient(d, m)).collect()
    }
}

/// Chinese-remainder reconstruction of the unique representative in
/// `[0, prod m_i)`.
pub fn crt_reconstruct(residues: &[u64], moduli: &[u64]) -> Result<BigUint, ModError> {
    if residues.len() != moduli.len() {
        return Err(ModError::LengthMismatch { residues: residues.len(), moduli: moduli.len() });
    }
    let set = ModulusSet::new(moduli)?;
    for (&r, &m) in residues.iter().zip(moduli) {
        if r >= m {
            return Err(ModError::Unreduced { residue: r, modulus: m });
        }
    }
    let product = BigInt::from(set.product());
    let mut acc = BigInt::zero();
    for (&r, &m) in residues.iter().zip(moduli) {
        let mi = BigInt::from(m);
        let partial = &product / &mi;
        let egcd = (&partial % &mi).extended_gcd(&mi);
        let inv = egcd.x.mod_floor(&mi);
        acc += BigInt::from(r) * partial * inv;
    }
    Ok(acc.mod_floor(&product).to_biguint().expect("non-negative"))
}

/// Which series a file carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Count,
    R2e,
    R2g,
    R2m,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Count => "count",
            Quantity::R2e => "r2e",
            Quantity::R2g => "r2g",
            Quantity::R2m => "r2m",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "count" => Ok(Quantity::Count),
            "r2e" => Ok(Quantity::R2e),
            "r2g" => Ok(Quantity::R2g),
            "r2m" => Ok(Quantity::R2m),
            other => Err(format!("unknown quantity '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesValues {
    Exact(Vec<BigUint>),
    /// `rows[i][j]` is coefficient `first_n + i` modulo `moduli[j]`.
    Residues { moduli: Vec<u64>, rows: Vec<Vec<u64>> },
}

/// Coefficients `c_first..c_last` plus free-form `key: value` metadata.
///
/// `lattice`, `quantity` and `moduli` are kept in typed fields; every other
/// header key (e.g. `wmax`, `generator`) lives in `meta` and is written back
/// in sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesTable {
    pub quantity: Quantity,
    pub first_n: usize,
    pub values: SeriesValues,
    pub meta: BTreeMap<String, String>,
}

impl SeriesTable {
    pub fn exact(quantity: Quantity, values: Vec<BigUint>) -> Self {
        Self { quantity, first_n: 0, values: SeriesValues::Exact(values), meta: BTreeMap::new() }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        match &self.values {
            SeriesValues::Exact(v) => v.len(),
            SeriesValues::Residues { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Last index `n` present.
    pub fn last_n(&self) -> Option<usize> {
        (!self.is_empty()).then(|| self.first_n + self.len() - 1)
    }

    /// Converts residue rows into exact integers; exact tables are cloned.
    pub fn to_exact(&self) -> Result<SeriesTable, ModError> {
        let values = match &self.values {
            SeriesValues::Exact(v) => v.clone(),
            SeriesValues::Residues { moduli, rows } => {
                rows.iter().map(|r| crt_reconstruct(r, moduli)).collect::<Result<_, _>>()?
            }
        };
        Ok(SeriesTable {
            quantity: self.quantity,
            first_n: self.first_n,
            values: SeriesValues::Exact(values),
            meta: self.meta.clone(),
        })
    }

    /// Exact coefficient at `n`, if stored.
    pub fn exact_at(&self, n: usize) -> Option<BigUint> {
        if n < self.first_n || n >= self.first_n + self.len() {
            return None;
        }
        let i = n - self.first_n;
        match &self.values {
            SeriesValues::Exact(v) => Some(v[i].clone()),
            SeriesValues::Residues { moduli, rows } => crt_reconstruct(&rows[i], moduli).ok(),
        }
    }

    /// Exact coefficients as a dense vector starting at `n = 0`; `None` when
    /// the table does not start at zero.
    pub fn coefficients(&self) -> Option<Vec<BigUint>> {
        if self.first_n != 0 {
            return None;
        }
        let t = self.to_exact().ok()?;
        match t.values {
            SeriesValues::Exact(v) => Some(v),
            SeriesValues::Residues { .. } => unreachable!(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# lattice: square").unwrap();
        writeln!(out, "# quantity: {}", self.quantity).unwrap();
        match &self.values {
            SeriesValues::Exact(_) => writeln!(out, "# moduli: exact").unwrap(),
            SeriesValues::Residues { moduli, .. } => {
                let list: Vec<String> = moduli.iter().map(u64::to_string).collect();
                writeln!(out, "# moduli: {}", list.join(",")).unwrap();
            }
        }
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        match &self.values {
            SeriesValues::Exact(vals) => {
                for (i, v) in vals.iter().enumerate() {
                    writeln!(out, "{}\t{}", self.first_n + i, v).unwrap();
                }
            }
            SeriesValues::Residues { rows, .. } => {
                for (i, row) in rows.iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(u64::to_string).collect();
                    writeln!(out, "{}\t{}", self.first_n + i, cells.join(",")).unwrap();
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SeriesError> {
        let mut quantity = Quantity::Count;
        let mut moduli: Option<Vec<u64>> = None;
        let mut meta = BTreeMap::new();
        let mut first_n: Option<usize> = None;
        let mut prev_n: Option<usize> = None;
        let mut exact = Vec::new();
        let mut rows = Vec::new();
        let mut in_body = false;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                if in_body {
                    return Err(parse_err(line_no, "header line after data"));
                }
                let Some((key, value)) = header.split_once(':') else {
                    return Err(parse_err(line_no, "header must be '# key: value'"));
                };
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "lattice" => {
                        if value != "square" {
                            return Err(parse_err(line_no, format!("unsupported lattice '{value}'")));
                        }
                    }
                    "quantity" => quantity = value.parse().map_err(|e: String| parse_err(line_no, e))?,
                    "moduli" => {
                        moduli = if value == "exact" {
                            None
                        } else {
                            let list = value
                                .split(',')
                                .map(|s| s.trim().parse::<u64>())
                                .collect::<Result<Vec<_>, _>>()
                                .map_err(|e| parse_err(line_no, format!("bad modulus list: {e}")))?;
                            ModulusSet::new(&list)?;
                            Some(list)
                        };
                    }
                    _ => {
                        meta.insert(key.to_string(), value.to_string());
                    }
                }
                continue;
            }
            in_body = true;
            let mut parts = line.split('\t');
            let (Some(n_str), Some(v_str), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(parse_err(line_no, "expected 'n<TAB>value'"));
            };
            let n: usize = n_str
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad index '{n_str}'")))?;
            match prev_n {
                None => first_n = Some(n),
                Some(p) if n == p => return Err(parse_err(line_no, format!("duplicate n = {n}"))),
                Some(p) if n < p => return Err(parse_err(line_no, format!("n decreases from {p} to {n}"))),
                Some(p) if n != p + 1 => return Err(parse_err(line_no, format!("gap between n = {p} and n = {n}"))),
                Some(_) => {}
            }
            prev_n = Some(n);
            match &moduli {
                None => {
                    let v = BigUint::from_str(v_str.trim())
                        .map_err(|_| parse_err(line_no, format!("bad integer '{v_str}'")))?;
                    exact.push(v);
                }
                Some(ms) => {
                    let row = v_str
                        .split(',')
                        .map(|s| s.trim().parse::<u64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| parse_err(line_no, format!("bad residue list '{v_str}'")))?;
                    if row.len() != ms.len() {
                        return Err(parse_err(line_no, format!("expected {} residues", ms.len())));
                    }
                    if let Some((r, m)) = row.iter().zip(ms).find(|(r, m)| r >= m) {
                        return Err(parse_err(line_no, format!("residue {r} not reduced modulo {m}")));
                    }
                    rows.push(row);
                }
            }
        }
        let values = match moduli {
            None => SeriesValues::Exact(exact),
            Some(moduli) => SeriesValues::Residues { moduli, rows },
        };
        Ok(SeriesTable { quantity, first_n: first_n.unwrap_or(0), values, meta })
    }
}

pub fn write_series(table: &SeriesTable, path: impl AsRef<Path>) -> Result<(), SeriesError> {
    std::fs::write(path, table.to_text())?;
    Ok(())
}

pub fn read_series(path: impl AsRef<Path>) -> Result<SeriesTable, SeriesError> {
    let text = std::fs::read_to_string(path)?;
    SeriesTable::parse(&text)
}

/// First index in the overlap of two tables where the exact coefficients
/// differ, together with both values.
pub fn first_mismatch(a: &SeriesTable, b: &SeriesTable) -> Result<Option<(usize, BigUint, BigUint)>, ModError> {
    let (Some(a_last), Some(b_last)) = (a.last_n(), b.last_n()) else { return Ok(None) };
    let lo = a.first_n.max(b.first_n);
    let hi = a_last.min(b_last);
    let (ea, eb) = (a.to_exact()?, b.to_exact()?);
    for n in lo..=hi {
        let (x, y) = (ea.exact_at(n).unwrap(), eb.exact_at(n).unwrap());
        if x != y {
            return Ok(Some((n, x, y)));
        }
    }
    Ok(None)
}

/// Size of the overlap `[max first, min last]`, zero when disjoint.
pub fn overlap_len(a: &SeriesTable, b: &SeriesTable) -> usize {
    match (a.last_n(), b.last_n()) {
        (Some(al), Some(bl)) => {
            let lo = a.first_n.max(b.first_n);
            let hi = al.min(bl);
            if hi >= lo { hi - lo + 1 } else { 0 }
        }
        _ => 0,
    }
}
