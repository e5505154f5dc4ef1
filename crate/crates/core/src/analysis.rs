//! Singularity analysis of power series.
//!
//! Differential approximants fit `sum_i Q_i(x) (x d/dx)^i F(x) = P(x)` to the
//! known coefficients. The linear system is solved exactly (fraction-free
//! elimination over big integers) and only the roots of `Q_K` are located in
//! floating point. Amplitude fits match the last few terms of a series to a
//! truncated asymptotic expansion around a known critical point.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::modseries::{ModError, SeriesTable};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("series must start at n = 0")]
    NotFromZero,
    #[error(transparent)]
    Modulus(#[from] ModError),
    #[error("approximant needs coefficients up to n = {needed}, series ends at {available}")]
    TooShort { needed: usize, available: usize },
    #[error("amplitudes must be positive and C nonzero")]
    BadAmplitudes,
    #[error("fit needs at least {needed} coefficients, series has {available}")]
    FitTooShort { needed: usize, available: usize },
}

/// One approximant: `degrees[i]` is the degree of `Q_i`, `inhomog` the
/// degree of `P` (`None` for a homogeneous equation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DASpec {
    pub degrees: Vec<usize>,
    pub inhomog: Option<usize>,
}

impl DASpec {
    pub fn order(&self) -> usize {
        self.degrees.len() - 1
    }

    fn unknowns(&self) -> usize {
        self.degrees.iter().map(|d| d + 1).sum::<usize>() - 1
    }

    /// Index of the last series coefficient entering the fit.
    pub fn last_n(&self) -> usize {
        self.inhomog.map_or(0, |l| l + 1) + self.unknowns() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityEstimate {
    pub x_c: f64,
    pub exponent: f64,
    /// Imaginary part of the root; nonzero means no real singularity was
    /// found and the estimate is flagged.
    pub imag: f64,
    pub last_n: usize,
    pub degrees: Vec<usize>,
    pub inhomog: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximantRoots {
    /// Real positive root of smallest modulus, if any.
    pub physical: Option<SingularityEstimate>,
    /// Real negative root within 5% of `-x_c`.
    pub antiferro: Option<SingularityEstimate>,
    /// Every root of `Q_K` with its exponent.
    pub all: Vec<SingularityEstimate>,
}

fn rational_series(series: &SeriesTable) -> Result<Vec<BigRational>, AnalysisError> {
    if series.first_n != 0 {
        return Err(AnalysisError::NotFromZero);
    }
    let exact = series.to_exact()?;
    let coeffs = exact.coefficients().ok_or(AnalysisError::NotFromZero)?;
    Ok(coeffs.into_iter().map(|c| BigRational::from_integer(BigInt::from(c))).collect())
}

/// Exact solution of `a x = b`, returned as integer numerators over a
/// common denominator. Rank-deficient but consistent systems yield the
/// solution with every non-pivot unknown set to zero; inconsistent systems
/// give `None`. Columns are eliminated in order, so earlier columns are
/// preferred as pivots.
fn solve_fraction_free(mut a: Vec<Vec<BigInt>>, mut b: Vec<BigInt>) -> Option<(Vec<BigInt>, BigInt)> {
    let rows = b.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut pivots: Vec<usize> = Vec::new();
    for c in 0..cols {
        let r = pivots.len();
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        if p != r {
            a.swap(p, r);
            b.swap(p, r);
        }
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            b[i] = (&a[r][c] * &b[i] - &a[i][c] * &b[r]) / &prev;
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
    }
    if b[pivots.len()..].iter().any(|v| !v.is_zero()) || pivots.is_empty() {
        return None;
    }
    let det = prev;
    let mut y = vec![BigInt::zero(); cols];
    for (r, &c) in pivots.iter().enumerate().rev() {
        let mut acc = &det * &b[r];
        for &j in &pivots[r + 1..] {
            acc -= &a[r][j] * &y[j];
        }
        y[c] = acc / &a[r][c];
    }
    Some((y, det))
}

/// Converts big integers to `f64` after dividing all of them by a common
/// power of two, so the largest lands near `2^60`.
fn to_f64_common(values: &[BigInt]) -> Vec<f64> {
    let top = values.iter().map(|v| v.bits()).max().unwrap_or(0) as i64;
    values
        .iter()
        .map(|v| {
            let bits = v.bits() as i64;
            let drop = (bits - 64).max(0);
            let head = (v >> drop as u64).to_f64().unwrap_or(0.0);
            head * 2f64.powi((drop - (top - 60).max(0)) as i32)
        })
        .collect()
}

fn eval(poly: &[f64], x: Complex64) -> Complex64 {
    poly.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn derivative(poly: &[f64]) -> Vec<f64> {
    poly.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect()
}

/// All complex roots of `poly` (ascending coefficients).
pub fn polynomial_roots(poly: &[f64]) -> Vec<Complex64> {
    let mut p = poly.to_vec();
    while p.last().is_some_and(|&c| c == 0.0) {
        p.pop();
    }
    let deg = p.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let mut companion = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -p[i] / lead;
    }
    let dp = derivative(&p);
    companion
        .complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..8 {
                let d = eval(&dp, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = eval(&p, z) / d;
                z -= step;
                if step.norm() <= 1e-17 * z.norm() {
                    break;
                }
            }
            z
        })
        .collect()
}

fn theta_power(n: usize, i: usize) -> BigInt {
    BigInt::from(n).pow(i as u32)
}

/// Fits one approximant and locates the singularities of `Q_K`.
pub fn differential_approximant(series: &SeriesTable, spec: &DASpec) -> Result<Option<ApproximantRoots>, AnalysisError> {
    let coeffs = rational_series(series)?;
    fit_approximant(&coeffs, spec)
}

fn fit_approximant(coeffs: &[BigRational], spec: &DASpec) -> Result<Option<ApproximantRoots>, AnalysisError> {
    let k = spec.order();
    let last = spec.last_n();
    if last >= coeffs.len() {
        return Err(AnalysisError::TooShort { needed: last, available: coeffs.len().saturating_sub(1) });
    }
    let first_eq = spec.inhomog.map_or(0, |l| l + 1);
    // Unknown layout: Q_K coefficients except its constant term (fixed to
    // 1), then Q_{K-1}, ..., Q_0.
    let mut columns: Vec<(usize, usize)> = Vec::new();
    for (i, &d) in spec.degrees.iter().enumerate().rev() {
        for j in 0..=d {
            if !(i == k && j == 0) {
                columns.push((i, j));
            }
        }
    }
    let size = columns.len();
    let mut a = Vec::with_capacity(size);
    let mut b = Vec::with_capacity(size);
    for n in first_eq..=last {
        let term = |i: usize, j: usize| -> BigRational {
            if j > n {
                return BigRational::zero();
            }
            &coeffs[n - j] * BigRational::from_integer(theta_power(n - j, i))
        };
        let row: Vec<BigRational> = columns.iter().map(|&(i, j)| term(i, j)).collect();
        let rhs = -term(k, 0);
        let lcm = row.iter().chain(std::iter::once(&rhs)).fold(BigInt::one(), |l, r| l.lcm(r.denom()));
        let scale = |r: &BigRational| (r * BigRational::from_integer(lcm.clone())).to_integer();
        a.push(row.iter().map(scale).collect::<Vec<_>>());
        b.push(scale(&rhs));
    }
    let Some((numer, det)) = solve_fraction_free(a, b) else { return Ok(None) };

    // Q_K and Q_{K-1} as integers over the common denominator `det`.
    let mut qk = vec![det.clone()];
    let mut qk1 = Vec::new();
    for (&(i, _), v) in columns.iter().zip(&numer) {
        if i == k {
            qk.push(v.clone());
        } else if i + 1 == k {
            qk1.push(v.clone());
        }
    }
    let mut both = qk.clone();
    both.extend(qk1.iter().cloned());
    let scaled = to_f64_common(&both);
    let (qk_f, qk1_f) = scaled.split_at(qk.len());
    let dqk = derivative(qk_f);

    let mut all = Vec::new();
    for z in polynomial_roots(qk_f) {
        let lambda = eval(qk1_f, z) / (z * eval(&dqk, z)) - (k as f64 - 1.0);
        all.push(SingularityEstimate {
            x_c: z.re,
            exponent: lambda.re,
            imag: z.im,
            last_n: last,
            degrees: spec.degrees.clone(),
            inhomog: spec.inhomog,
        });
    }
    let is_real = |e: &SingularityEstimate| e.imag.abs() <= 1e-12 * e.x_c.abs().max(1.0);
    let physical = all
        .iter()
        .filter(|e| is_real(e) && e.x_c > 0.0 && e.exponent.is_finite())
        .min_by(|a, b| a.x_c.total_cmp(&b.x_c))
        .cloned();
    let antiferro = physical.as_ref().and_then(|p| {
        all.iter()
            .filter(|e| is_real(e) && e.x_c < 0.0 && (e.x_c + p.x_c).abs() <= 0.05 * p.x_c)
            .min_by(|a, b| (a.x_c + p.x_c).abs().total_cmp(&(b.x_c + p.x_c).abs()))
            .cloned()
    });
    Ok(Some(ApproximantRoots { physical, antiferro, all }))
}

/// Summary over the approximants retained for one inhomogeneous degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub inhomog: Option<usize>,
    pub order: usize,
    pub estimates: Vec<SingularityEstimate>,
    /// Approximants with singular systems or no positive real root.
    pub rejected: usize,
    pub x_c: Option<(f64, f64)>,
    pub exponent: Option<(f64, f64)>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> Option<(f64, f64)> {
    let n = values.clone().count();
    if n == 0 {
        return None;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = if n > 1 { values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    Some((mean, var.sqrt()))
}

/// Approximant degree sets of order `order` with `Q_K` of degree `n_k` and
/// the other degrees within one of it.
fn degree_sets(order: usize, n_k: usize) -> Vec<Vec<usize>> {
    let mut sets = vec![vec![]];
    for _ in 0..order {
        sets = sets
            .into_iter()
            .flat_map(|s: Vec<usize>| {
                [n_k.wrapping_sub(1), n_k, n_k + 1]
                    .into_iter()
                    .filter(|&d| d <= n_k + 1)
                    .map(move |d| {
                        let mut t = s.clone();
                        t.push(d);
                        t
                    })
            })
            .collect();
    }
    for s in &mut sets {
        s.push(n_k);
    }
    sets
}

/// Every approximant of the given order and inhomogeneous degree that uses
/// at least `min_terms` coefficients and fits in the series.
pub fn da_scan(
    series: &SeriesTable,
    order: usize,
    inhomog: Option<usize>,
    min_terms: usize,
) -> Result<ScanRow, AnalysisError> {
    Ok(da_scan_rational(&rational_series(series)?, order, inhomog, min_terms))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Drops estimates far from the median (spurious roots picked as the
/// physical singularity) and computes mean and spread of the rest.
fn summarize(estimates: Vec<SingularityEstimate>, mut rejected: usize, order: usize, inhomog: Option<usize>) -> ScanRow {
    let mut kept = estimates;
    if !kept.is_empty() {
        let mid = median(kept.iter().map(|e| e.x_c).collect());
        let before = kept.len();
        kept.retain(|e| (e.x_c - mid).abs() <= 1e-3 * mid.abs());
        rejected += before - kept.len();
    }
    let x_c = mean_std(kept.iter().map(|e| e.x_c));
    let exponent = mean_std(kept.iter().map(|e| e.exponent));
    ScanRow { inhomog, order, estimates: kept, rejected, x_c, exponent }
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("L,K,last_n,x_c,exponent\n");
    for row in rows {
        let l = row.inhomog.map_or("-".to_string(), |l| l.to_string());
        for e in &row.estimates {
            writeln!(out, "{l},{},{},{:.15e},{:.15e}", row.order, e.last_n, e.x_c, e.exponent).unwrap();
        }
    }
    out
}

pub fn scan_summary(rows: &[ScanRow]) -> String {
    let mut out = String::from("L,K,count,rejected,x_c_mean,x_c_std,exponent_mean,exponent_std\n");
    for row in rows {
        let l = row.inhomog.map_or("-".to_string(), |l| l.to_string());
        let (xm, xs) = row.x_c.unwrap_or((f64::NAN, f64::NAN));
        let (em, es) = row.exponent.unwrap_or((f64::NAN, f64::NAN));
        writeln!(
            out,
            "{l},{},{},{},{xm:.12},{xs:.3e},{em:.9},{es:.3e}",
            row.order,
            row.estimates.len(),
            row.rejected
        )
        .unwrap();
    }
    out
}

/// Leading and alternating exponents of the fitted expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitModel {
    pub leading: f64,
    pub alternating: f64,
}

impl FitModel {
    pub const COUNT: Self = Self { leading: 11.0 / 32.0, alternating: -1.5 };
    pub const END_TO_END: Self = Self { leading: 59.0 / 32.0, alternating: -1.5 };
    pub const MONOMER: Self = Self { leading: 91.0 / 32.0, alternating: 1.0 };
    pub const GYRATION: Self = Self { leading: 123.0 / 32.0, alternating: 2.0 };

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "count" => Some(Self::COUNT),
            "r2e" => Some(Self::END_TO_END),
            "r2m" => Some(Self::MONOMER),
            "r2g" => Some(Self::GYRATION),
            _ => None,
        }
    }
}

pub const DEFAULT_X_C: f64 = 0.379052277752;

/// Correction exponents of the leading part: `0, 1, 3/2, 2, 5/2, ...`.
fn leading_correction(j: usize) -> f64 {
    match j {
        0 => 0.0,
        _ => (j as f64 + 1.0) / 2.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeFit {
    pub model: FitModel,
    pub k: usize,
    pub m: usize,
    /// `(n, a_0)` for every window end `n`; `None` marks an ill-conditioned
    /// window.
    pub trajectory: Vec<(usize, Option<f64>)>,
}

impl AmplitudeFit {
    /// `a_0` from the window ending at the last coefficient.
    pub fn estimate(&self) -> Option<f64> {
        self.trajectory.last().and_then(|&(_, a)| a)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("inv_n,a0_estimate\n");
        for &(n, a) in &self.trajectory {
            match a {
                Some(a) => writeln!(out, "{:.12e},{a:.15e}", 1.0 / n as f64).unwrap(),
                None => writeln!(out, "{:.12e},nan", 1.0 / n as f64).unwrap(),
            }
        }
        out
    }
}

/// Solves for `a_0..a_{k-1}, b_0..b_{m-1}` in
/// `c_n = mu^n n^g (sum_j a_j n^{-e_j}) + (-mu)^n n^h (sum_j b_j n^{-j})`
/// using the `k + m` coefficients ending at each `n`.
pub fn amplitude_fit(
    coeffs: &[f64],
    model: FitModel,
    x_c: f64,
    k: usize,
    m: usize,
) -> Result<AmplitudeFit, AnalysisError> {
    let p = k + m;
    if coeffs.len() < p + 1 {
        return Err(AnalysisError::FitTooShort { needed: p + 1, available: coeffs.len() });
    }
    let ln_mu = -x_c.ln();
    // Working in r_n = c_n / (mu^n n^g) keeps the system well scaled.
    let reduced = |n: usize| coeffs[n] / (n as f64 * ln_mu + model.leading * (n as f64).ln()).exp();
    let mut trajectory = Vec::new();
    for end in p.max(1)..coeffs.len() {
        let start = end + 1 - p;
        if start == 0 {
            continue;
        }
        let mut a = DMatrix::<f64>::zeros(p, p);
        let mut b = DVector::<f64>::zeros(p);
        for (row, n) in (start..=end).enumerate() {
            let nf = n as f64;
            for j in 0..k {
                a[(row, j)] = nf.powf(-leading_correction(j));
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..m {
                a[(row, k + j)] = sign * nf.powf(model.alternating - model.leading - j as f64);
            }
            b[row] = reduced(n);
        }
        let solved = a.lu().solve(&b).filter(|x| x.iter().all(|v| v.is_finite()));
        trajectory.push((end, solved.map(|x| x[0])));
    }
    Ok(AmplitudeFit { model, k, m, trajectory })
}

/// Floating-point view of an exact series.
pub fn series_as_f64(series: &SeriesTable) -> Result<Vec<f64>, AnalysisError> {
    let exact = series.to_exact()?;
    let coeffs = exact.coefficients().ok_or(AnalysisError::NotFromZero)?;
    Ok(coeffs.iter().map(|c: &BigUint| c.to_f64().unwrap_or(f64::INFINITY)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalRatios {
    pub d_over_c: f64,
    pub e_over_c: f64,
    /// `(246/91) D/C - 2 E/C + 1/2`, predicted to vanish.
    pub f: f64,
}

pub fn universal_ratios(a: f64, c: f64, d: f64, e: f64) -> Result<UniversalRatios, AnalysisError> {
    if !(a > 0.0 && c != 0.0 && c.is_finite() && d.is_finite() && e.is_finite()) {
        return Err(AnalysisError::BadAmplitudes);
    }
    let d_over_c = d / c;
    let e_over_c = e / c;
    Ok(UniversalRatios { d_over_c, e_over_c, f: 246.0 / 91.0 * d_over_c - 2.0 * e_over_c + 0.5 })
}

/// Series of `(1 - x/x_c)^(-exponent)` with rational `x_c` and `exponent`,
/// for checking the approximant machinery.
pub fn power_law_series(x_c: &BigRational, exponent: &BigRational, terms: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(terms);
    let mut c = BigRational::one();
    for n in 0..terms {
        out.push(c.clone());
        // c_{n+1} = c_n (exponent + n) / ((n + 1) x_c)
        let nn = BigRational::from_integer(BigInt::from(n));
        c = c * (exponent + &nn) / ((nn + BigRational::one()) * x_c);
    }
    out
}

/// Approximant analysis on rational coefficients.
pub fn differential_approximant_rational(
    coeffs: &[BigRational],
    spec: &DASpec,
) -> Result<Option<ApproximantRoots>, AnalysisError> {
    fit_approximant(coeffs, spec)
}

/// [`da_scan`] over rational coefficients.
pub fn da_scan_rational(
    coeffs: &[BigRational],
    order: usize,
    inhomog: Option<usize>,
    min_terms: usize,
) -> ScanRow {
    let available = coeffs.len() - 1;
    let mut specs = Vec::new();
    for n_k in 1..=available {
        for degrees in degree_sets(order, n_k) {
            let spec = DASpec { degrees, inhomog };
            if spec.last_n() <= available && spec.last_n() + 1 >= min_terms {
                specs.push(spec);
            }
        }
    }
    let results: Vec<Option<SingularityEstimate>> =
        specs.par_iter().map(|s| fit_approximant(coeffs, s).ok().flatten().and_then(|r| r.physical)).collect();
    let rejected = results.iter().filter(|r| r.is_none()).count();
    summarize(results.into_iter().flatten().collect(), rejected, order, inhomog)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn fraction_free_solver() {
        let a = vec![
            vec![BigInt::from(2), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(3)],
        ];
        let b = vec![BigInt::from(3), BigInt::from(5)];
        let (y, det) = solve_fraction_free(a, b).unwrap();
        assert_eq!(det, BigInt::from(5));
        assert_eq!(y, vec![BigInt::from(4), BigInt::from(7)]);
        let singular = vec![vec![BigInt::from(1), BigInt::from(2)], vec![BigInt::from(2), BigInt::from(4)]];
        assert!(solve_fraction_free(singular.clone(), vec![BigInt::from(1), BigInt::from(1)]).is_none());
        // Consistent but rank one: the second unknown is left at zero.
        let (y, det) = solve_fraction_free(singular, vec![BigInt::from(3), BigInt::from(6)]).unwrap();
        assert_eq!((y, det), (vec![BigInt::from(3), BigInt::from(0)], BigInt::from(1)));
    }

    #[test]
    fn roots_of_known_polynomials() {
        let mut r: Vec<f64> = polynomial_roots(&[6.0, -5.0, 1.0]).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] - 2.0).abs() < 1e-14 && (r[1] - 3.0).abs() < 1e-14);
        assert!(polynomial_roots(&[1.0]).is_empty());
    }

    #[test]
    fn first_order_equation_is_recovered_exactly() {
        let coeffs = power_law_series(&ratio(1, 3), &ratio(3, 2), 30);
        let spec = DASpec { degrees: vec![1, 1], inhomog: Some(0) };
        let roots = differential_approximant_rational(&coeffs, &spec).unwrap().unwrap();
        let p = roots.physical.unwrap();
        assert!((p.x_c - 1.0 / 3.0).abs() < 1e-13);
        assert!((p.exponent - 1.5).abs() < 1e-12);
    }

    #[test]
    fn higher_orders_recover_a_pure_power_law() {
        let coeffs = power_law_series(&ratio(2, 5), &ratio(7, 4), 40);
        for order in 1..=3 {
            let row = da_scan_rational(&coeffs, order, Some(0), 10);
            let (x, sx) = row.x_c.unwrap();
            let (g, _) = row.exponent.unwrap();
            assert!((x - 0.4).abs() < 1e-10, "K={order}: {x}");
            assert!(sx < 1e-10);
            assert!((g - 1.75).abs() < 1e-9, "K={order}: {g}");
        }
    }

    #[test]
    fn degree_sets_stay_within_one() {
        let sets = degree_sets(2, 3);
        assert_eq!(sets.len(), 9);
        assert!(sets.iter().all(|s| s.len() == 3 && s[2] == 3 && s[..2].iter().all(|&d| (2..=4).contains(&d))));
        assert_eq!(degree_sets(1, 0), vec![vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn amplitude_fit_is_exact_on_its_own_ansatz() {
        let mu = 1.0 / DEFAULT_X_C;
        let coeffs: Vec<f64> = (0..40)
            .map(|n| {
                let nf = (n as f64).max(1.0);
                mu.powi(n) * nf.powf(11.0 / 32.0) * (1.25 - 0.3 / nf)
                    + if n % 2 == 0 { 1.0 } else { -1.0 } * mu.powi(n) * nf.powf(-1.5) * 0.2
            })
            .collect();
        let fit = amplitude_fit(&coeffs, FitModel::COUNT, DEFAULT_X_C, 2, 1).unwrap();
        assert!((fit.estimate().unwrap() - 1.25).abs() < 1e-9);
        let plain: Vec<f64> = (0..20).map(|n| mu.powi(n) * (n as f64).powf(11.0 / 32.0) * 1.25).collect();
        let fit = amplitude_fit(&plain, FitModel::COUNT, DEFAULT_X_C, 1, 0).unwrap();
        assert!(fit.trajectory.iter().all(|(_, a)| (a.unwrap() - 1.25).abs() < 1e-12));
    }

    #[test]
    fn ratios() {
        let r = universal_ratios(1.17704242, 0.771182, 0.1081975, 0.339043).unwrap();
        assert!(r.f.abs() < 1.5e-5, "{}", r.f);
        let r = universal_ratios(1.0, 1.0, 0.0, 0.25).unwrap();
        assert!(r.f.abs() < 1e-15);
        assert!(universal_ratios(1.0, 0.0, 1.0, 1.0).is_err());
        let a = universal_ratios(1.0, 0.7, 0.1, 0.3).unwrap();
        let b = universal_ratios(1.0, 1.4, 0.2, 0.6).unwrap();
        assert!((a.f - b.f).abs() < 1e-15);
    }
}
