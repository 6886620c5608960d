//! Pfaffians of complex skew-symmetric matrices.
//!
//! The production routine is Parlett–Reid elimination: the matrix is reduced
//! to skew-tridiagonal form with partial pivoting, and the Pfaffian is the
//! product of the super-diagonal entries `A[k, k+1]` for even `k`, with one
//! sign flip per row/column interchange. The exponential expansion along the
//! first row is kept for testing small matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Default tolerance for the skewness check, relative to the largest entry.
pub const SKEW_TOL: f64 = 1e-12;

/// Pivots smaller than this multiple of the largest entry count as zero.
pub const PIVOT_TOL: f64 = 1e-13;

/// A complex skew-symmetric matrix of even or odd order.
///
/// Construction checks `S + Sᵀ ≈ 0` and then stores the exact
/// antisymmetrisation `(S − Sᵀ)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    entries: DMatrix<Complex64>,
}

impl SkewMatrix {
    /// Check skewness to [`SKEW_TOL`] and symmetrise.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(entries, SKEW_TOL)
    }

    /// Check skewness to `tol` (relative to the largest entry) and symmetrise.
    pub fn with_tolerance(entries: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        if !entries.is_square() {
            return domain(format!(
                "skew matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            ));
        }
        let scale = max_abs(&entries).max(1.0);
        let resid = max_abs(&(&entries + entries.transpose()));
        if resid > tol * scale {
            return domain(format!(
                "matrix is not skew-symmetric: max |S + S^T| = {resid:e}"
            ));
        }
        let sym = (&entries - entries.transpose()) * Complex64::new(0.5, 0.0);
        Ok(Self { entries: sym })
    }

    /// Build from the strict upper triangle; `upper(i, j)` is called for `i < j`.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = upper(i, j);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Self { entries: m }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// Principal minor on the given index list (in the given order).
    pub fn minor(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let entries = DMatrix::from_fn(k, k, |r, c| self.entries[(idx[r], idx[c])]);
        Self { entries }
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Pfaffian by Parlett–Reid elimination, `O(n³)`.
///
/// Returns `1` for the empty matrix and `0` when a pivot falls below
/// [`PIVOT_TOL`] times the largest entry.
pub fn pfaffian(s: &SkewMatrix) -> Result<Complex64> {
    let n = s.n();
    if n % 2 == 1 {
        return domain(format!("Pfaffian needs even order, got {n}"));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut a = s.entries.clone();
    let threshold = PIVOT_TOL * max_abs(&a);
    let mut pf = Complex64::new(1.0, 0.0);
    for k in (0..n - 1).step_by(2) {
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].norm();
        for r in k + 2..n {
            let v = a[(r, k)].norm();
            if v > best {
                best = v;
                kp = r;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if best <= threshold {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let pivot = a[(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|c| a[(k, c)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|r| a[(r, k + 1)]).collect();
            let m = n - k - 2;
            for i in 0..m {
                for j in 0..m {
                    a[(k + 2 + i, k + 2 + j)] += tau[i] * col[j] - col[i] * tau[j];
                }
            }
        }
    }
    Ok(pf)
}

/// Pfaffian by expansion along the first row. Exponential cost; for tests.
pub fn pfaffian_expansion(s: &SkewMatrix) -> Result<Complex64> {
    let n = s.n();
    if n % 2 == 1 {
        return domain(format!("Pfaffian needs even order, got {n}"));
    }
    if n > 12 {
        return Err(Error::Capacity(format!(
            "expansion Pfaffian limited to n <= 12, got {n}"
        )));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(expand(s.matrix(), &idx))
}

fn expand(m: &DMatrix<Complex64>, idx: &[usize]) -> Complex64 {
    if idx.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let first = idx[0];
    let mut total = Complex64::new(0.0, 0.0);
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != j).collect();
        let term = m[(first, j)] * expand(m, &rest);
        if pos % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// `(Pf(E S Eᵀ), det(E)·Pf(S))` for the caller to compare.
pub fn congruence_check(e: &DMatrix<Complex64>, s: &SkewMatrix) -> Result<(Complex64, Complex64)> {
    if e.nrows() != s.n() || e.ncols() != s.n() {
        return domain(format!(
            "congruence needs a {0}x{0} matrix, got {1}x{2}",
            s.n(),
            e.nrows(),
            e.ncols()
        ));
    }
    let transformed = e * s.matrix() * e.transpose();
    let lhs = pfaffian(&SkewMatrix::with_tolerance(transformed, 1e-9)?)?;
    let rhs = e.determinant() * pfaffian(s)?;
    Ok((lhs, rhs))
}

/// Ordered excitation subsets `(I, J)` with entries in `−M..=M`.
///
/// `I` labels anti-periodic modes, `J` periodic modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SubsetPair {
    pub i: Vec<i64>,
    pub j: Vec<i64>,
}

impl SubsetPair {
    /// Validate that both lists are strictly increasing.
    pub fn new(i: Vec<i64>, j: Vec<i64>) -> Result<Self> {
        for (name, list) in [("I", &i), ("J", &j)] {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return domain(format!("subset {name} = {list:?} must be strictly increasing"));
            }
        }
        Ok(Self { i, j })
    }

    /// The empty pair, whose ratio is 1.
    pub fn vacuum() -> Self {
        Self { i: vec![], j: vec![] }
    }

    pub fn len(&self) -> usize {
        self.i.len() + self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_even(&self) -> bool {
        self.len() % 2 == 0
    }

    /// Check every index lies in `−M..=M`.
    pub fn check_range(&self, m: usize) -> Result<()> {
        let mi = m as i64;
        if let Some(bad) = self.i.iter().chain(&self.j).find(|k| k.abs() > mi) {
            return domain(format!("index {bad} outside -{m}..={m}"));
        }
        Ok(())
    }

    /// Positions in the universe `[A modes (n), P modes (n)]`, `I` first.
    pub fn universe_indices(&self, m: usize) -> Vec<usize> {
        let n = 2 * m + 1;
        let to_pos = |k: &i64| (k + m as i64) as usize;
        self.i
            .iter()
            .map(to_pos)
            .chain(self.j.iter().map(|k| n + to_pos(k)))
            .collect()
    }

    /// Build from bit masks over positions `0..2M+1` (bit `i` ↔ index `i − M`).
    pub fn from_masks(mask_a: u64, mask_p: u64, m: usize) -> Self {
        let n = 2 * m + 1;
        let list = |mask: u64| {
            (0..n)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| b as i64 - m as i64)
                .collect()
        };
        Self { i: list(mask_a), j: list(mask_p) }
    }
}

/// Pfaffian of the principal minor of `r` selected by `pair`.
///
/// `r` is indexed over the universe of `2(2M+1)` modes, anti-periodic modes
/// first; the minor lists the `I` rows before the `J` rows.
pub fn sub_pfaffian(r: &SkewMatrix, pair: &SubsetPair) -> Result<Complex64> {
    if !pair.is_even() {
        return domain(format!(
            "sub-Pfaffian needs #I + #J even, got {} + {}",
            pair.i.len(),
            pair.j.len()
        ));
    }
    if r.n() % 2 != 0 {
        return domain(format!("universe size {} must be 2(2M+1)", r.n()));
    }
    let m = (r.n() / 2 - 1) / 2;
    pair.check_range(m)?;
    pfaffian(&r.minor(&pair.universe_indices(m)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_is_one() {
        let s = SkewMatrix::new(DMatrix::zeros(0, 0)).unwrap();
        assert_eq!(pfaffian(&s).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn two_by_two() {
        let a = c(0.3, -1.2);
        let s = SkewMatrix::from_upper(2, |_, _| a);
        assert!((pfaffian(&s).unwrap() - a).norm() < 1e-15);
    }

    #[test]
    fn four_by_four_closed_form() {
        let vals = [c(1.0, 0.5), c(-0.2, 2.0), c(0.7, 0.0), c(3.0, -1.0), c(0.1, 0.1), c(-1.5, 0.4)];
        let mut it = vals.iter();
        let s = SkewMatrix::from_upper(4, |_, _| *it.next().unwrap());
        let m = s.matrix();
        let want = m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)];
        assert!((pfaffian(&s).unwrap() - want).norm() < 1e-14);
        assert!((pfaffian_expansion(&s).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn odd_order_rejected() {
        let s = SkewMatrix::from_upper(3, |_, _| c(1.0, 0.0));
        assert!(pfaffian(&s).is_err());
    }

    #[test]
    fn non_skew_rejected() {
        let m = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(SkewMatrix::new(m).is_err());
    }

    #[test]
    fn singular_gives_zero() {
        let s = SkewMatrix::from_upper(4, |i, _| if i == 0 { c(0.0, 0.0) } else { c(1.0, 0.0) });
        assert_eq!(pfaffian(&s).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn sub_pfaffian_vacuum_and_pair() {
        let m = 1;
        let s = SkewMatrix::from_upper(6, |i, j| c(i as f64 + 1.0, j as f64));
        assert_eq!(sub_pfaffian(&s, &SubsetPair::vacuum()).unwrap(), c(1.0, 0.0));
        let pair = SubsetPair::new(vec![0], vec![-1]).unwrap();
        let got = sub_pfaffian(&s, &pair).unwrap();
        assert_eq!(got, s.matrix()[(1, 3)]);
        let odd = SubsetPair::new(vec![0], vec![]).unwrap();
        assert!(sub_pfaffian(&s, &odd).is_err());
        assert_eq!(pair.universe_indices(m), vec![1, 3]);
    }

    #[test]
    fn subset_must_increase() {
        assert!(SubsetPair::new(vec![1, 0], vec![]).is_err());
        assert!(SubsetPair::new(vec![0, 0], vec![]).is_err());
    }
}
