//! Exact rational arithmetic and labeled dense linear algebra.
//!
//! Every coefficient in this crate is a [`Rational`]: an arbitrary precision
//! fraction kept in lowest terms with a positive denominator. Matrices carry
//! their row and column labels so that rank and triangularity statements can
//! be phrased in terms of partitions and multisets rather than raw indices.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational number, normalized on every operation.
pub type Rational = num_rational::BigRational;

/// `num / den` as a [`Rational`]. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders `n` as `num/den`, or `num` when the denominator is one.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Always renders `num/den`, including a denominator of one.
pub fn fmt_rational_strict(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(n))
        }
    }
}

/// Which side of the diagonal must vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangularMode {
    /// Entries strictly below the diagonal vanish.
    Upper,
    /// Entries strictly above the diagonal vanish.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangularity {
    pub triangular: bool,
    pub diagonal_nonzero: bool,
}

/// Dense matrix over the rationals with labeled axes.
#[derive(Clone, PartialEq)]
pub struct LabeledMatrix<R, C = R> {
    rows: Vec<R>,
    cols: Vec<C>,
    entries: Vec<Rational>,
}

impl<R: Clone + Eq + Hash + fmt::Debug, C: Clone + Eq + Hash + fmt::Debug> LabeledMatrix<R, C> {
    pub fn zeros(rows: Vec<R>, cols: Vec<C>) -> Result<Self> {
        check_unique(&rows)?;
        check_unique(&cols)?;
        let entries = vec![Rational::zero(); rows.len() * cols.len()];
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix entry by entry.
    pub fn from_fn(
        rows: Vec<R>,
        cols: Vec<C>,
        mut f: impl FnMut(&R, &C) -> Rational,
    ) -> Result<Self> {
        check_unique(&rows)?;
        check_unique(&cols)?;
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for r in &rows {
            for c in &cols {
                entries.push(f(r, c));
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Row-major entries; `entries.len()` must equal `rows.len() * cols.len()`.
    pub fn from_entries(rows: Vec<R>, cols: Vec<C>, entries: Vec<Rational>) -> Result<Self> {
        check_unique(&rows)?;
        check_unique(&cols)?;
        if entries.len() != rows.len() * cols.len() {
            return Err(Error::Shape(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows.len(),
                cols.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn row_labels(&self) -> &[R] {
        &self.rows
    }

    pub fn col_labels(&self) -> &[C] {
        &self.cols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        let n = self.cols.len();
        self.entries[i * n + j] = v;
    }

    pub fn entry(&self, r: &R, c: &C) -> Option<&Rational> {
        let i = self.rows.iter().position(|x| x == r)?;
        let j = self.cols.iter().position(|x| x == c)?;
        Some(self.get(i, j))
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        let n = self.cols.len();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn transpose(&self) -> LabeledMatrix<C, R> {
        let (m, n) = (self.nrows(), self.ncols());
        let mut entries = Vec::with_capacity(m * n);
        for j in 0..n {
            for i in 0..m {
                entries.push(self.get(i, j).clone());
            }
        }
        LabeledMatrix {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            entries,
        }
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<Rational>> = (0..self.nrows()).map(|i| self.row(i).to_vec()).collect();
        rank_of_rows(&rows)
    }

    /// Restricts to the given row labels (in the given order).
    pub fn select_rows(&self, keep: &[R]) -> Result<Self> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|r| {
                self.rows
                    .iter()
                    .position(|x| x == r)
                    .ok_or_else(|| Error::LabelMismatch(format!("unknown row label {r:?}")))
            })
            .collect::<Result<_>>()?;
        let mut entries = Vec::with_capacity(idx.len() * self.ncols());
        for &i in &idx {
            entries.extend_from_slice(self.row(i));
        }
        Self::from_entries(keep.to_vec(), self.cols.clone(), entries)
    }

    pub fn map_cols<D: Clone + Eq + Hash + fmt::Debug>(
        &self,
        f: impl Fn(&C) -> D,
    ) -> Result<LabeledMatrix<R, D>> {
        let cols = self.cols.iter().map(f).collect();
        LabeledMatrix::from_entries(self.rows.clone(), cols, self.entries.clone())
    }

    /// Multiplies `self` by the column vector `x` (indexed like the columns).
    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.ncols());
        (0..self.nrows())
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }
}

impl<L: Clone + Eq + Hash + fmt::Debug> LabeledMatrix<L, L> {
    /// Checks triangularity after sorting both axes by `key`.
    ///
    /// Row and column label sets must coincide.
    pub fn is_triangular<K: Ord>(
        &self,
        key: impl Fn(&L) -> K,
        mode: TriangularMode,
    ) -> Result<Triangularity> {
        let row_set: HashSet<&L> = self.rows.iter().collect();
        let col_set: HashSet<&L> = self.cols.iter().collect();
        if row_set != col_set {
            return Err(Error::LabelMismatch("row and column labels differ".into()));
        }
        let mut row_idx: Vec<usize> = (0..self.nrows()).collect();
        row_idx.sort_by_key(|&i| key(&self.rows[i]));
        let col_idx: Vec<usize> = row_idx
            .iter()
            .map(|&i| {
                self.cols
                    .iter()
                    .position(|c| *c == self.rows[i])
                    .expect("label sets checked")
            })
            .collect();
        let mut triangular = true;
        let mut diagonal_nonzero = true;
        for (a, &i) in row_idx.iter().enumerate() {
            for (b, &j) in col_idx.iter().enumerate() {
                let v = self.get(i, j);
                let forbidden = match mode {
                    TriangularMode::Upper => a > b,
                    TriangularMode::Lower => a < b,
                };
                if forbidden && !v.is_zero() {
                    triangular = false;
                }
                if a == b && v.is_zero() {
                    diagonal_nonzero = false;
                }
            }
        }
        Ok(Triangularity {
            triangular,
            diagonal_nonzero,
        })
    }

    /// Solves `self * x = b` for square invertible `self`.
    pub fn solve(&self, b: &[Rational]) -> Result<Vec<Rational>> {
        let n = self.nrows();
        if n != self.ncols() || b.len() != n {
            return Err(Error::Shape("solve needs a square system".into()));
        }
        let mut a: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut row = self.row(i).to_vec();
                row.push(b[i].clone());
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(Error::Singular)?;
            a.swap(col, pivot);
            let inv = a[col][col].recip();
            for v in a[col].iter_mut().skip(col) {
                *v = &*v * &inv;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for k in col..=n {
                        let sub = &f * &a[col][k];
                        a[r][k] -= sub;
                    }
                }
            }
        }
        Ok(a.into_iter()
            .map(|mut row| row.pop().expect("augmented column"))
            .collect())
    }
}

impl<R: fmt::Debug, C: fmt::Debug> fmt::Debug for LabeledMatrix<R, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LabeledMatrix {}x{}", self.rows.len(), self.cols.len())?;
        for (i, r) in self.rows.iter().enumerate() {
            let n = self.cols.len();
            let row: Vec<String> = self.entries[i * n..(i + 1) * n]
                .iter()
                .map(fmt_rational)
                .collect();
            writeln!(f, "  {r:?}: [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn check_unique<L: Eq + Hash + fmt::Debug>(labels: &[L]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::LabelMismatch(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// A vector of rationals indexed by labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector<L> {
    pub labels: Vec<L>,
    pub values: Vec<Rational>,
}

impl<L: Clone + Eq + Hash + fmt::Debug> LabeledVector<L> {
    pub fn new(labels: Vec<L>, values: Vec<Rational>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::Shape("label/value length mismatch".into()));
        }
        check_unique(&labels)?;
        Ok(Self { labels, values })
    }

    /// Values reordered to follow `order`.
    fn aligned(&self, order: &[L]) -> Result<Vec<Rational>> {
        if order.len() != self.labels.len() {
            return Err(Error::LabelMismatch(
                "vectors have different label sets".into(),
            ));
        }
        order
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|x| x == l)
                    .map(|i| self.values[i].clone())
                    .ok_or_else(|| Error::LabelMismatch(format!("label {l:?} missing")))
            })
            .collect()
    }
}

/// Whether `v` lies in the rational span of `basis`.
pub fn in_span<L: Clone + Eq + Hash + fmt::Debug>(
    v: &LabeledVector<L>,
    basis: &[LabeledVector<L>],
) -> Result<bool> {
    let order = &v.labels;
    let rows: Vec<Vec<Rational>> = basis
        .iter()
        .map(|b| b.aligned(order))
        .collect::<Result<_>>()?;
    let base_rank = rank_of_rows(&rows);
    let mut with_v = rows;
    with_v.push(v.values.clone());
    Ok(rank_of_rows(&with_v) == base_rank)
}

/// Rank of a list of equal-length rational rows by fraction-free elimination.
///
/// Each row is scaled to integers by the lcm of its denominators, then
/// Bareiss elimination keeps every intermediate value an exact integer minor.
pub fn rank_of_rows(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.iter().filter_map(|r| integer_row(r)).collect();
    let Some(ncols) = m.first().map(Vec::len) else {
        return 0;
    };
    let nrows = m.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = &pivot_row[col];
        for row in rest.iter_mut() {
            let lead = row[col].clone();
            for k in col + 1..ncols {
                let v = pivot * &row[k] - &lead * &pivot_row[k];
                row[k] = v / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = pivot.clone();
        rank += 1;
    }
    rank
}

/// Clears denominators; `None` for an all-zero row.
fn integer_row(r: &[Rational]) -> Option<Vec<BigInt>> {
    if r.iter().all(Zero::is_zero) {
        return None;
    }
    let l = r.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut out: Vec<BigInt> = r.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let g = out.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_one() {
        for x in &mut out {
            *x = &*x / &g;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Plain Gaussian elimination over the rationals, used as an oracle.
    fn naive_rank(rows: &[Vec<Rational>]) -> usize {
        let mut a = rows.to_vec();
        let (m, n) = (a.len(), a.first().map_or(0, Vec::len));
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..m).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for r in rank + 1..m {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &a[rank][col];
                for k in col..n {
                    let sub = &f * &a[rank][k];
                    a[r][k] -= sub;
                }
            }
            rank += 1;
        }
        rank
    }

    fn mat(rows: &[&[i64]]) -> LabeledMatrix<usize> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let entries = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| int(v)))
            .collect();
        LabeledMatrix::from_entries((0..r).collect(), (0..c).collect(), entries).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(mat(&[&[1, 0], &[0, 1]]).rank(), 2);
        assert_eq!(mat(&[&[0, 0], &[0, 0]]).rank(), 0);
        assert_eq!(mat(&[&[1, 2], &[2, 4]]).rank(), 1);
    }

    #[test]
    fn rank_with_fractions() {
        let m = LabeledMatrix::from_entries(
            vec![0, 1],
            vec![0, 1],
            vec![rat(1, 2), rat(1, 3), rat(3, 2), int(1)],
        )
        .unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn triangular_examples() {
        let id = mat(&[&[1, 0], &[0, 1]]);
        for mode in [TriangularMode::Upper, TriangularMode::Lower] {
            let t = id.is_triangular(|&i| i, mode).unwrap();
            assert!(t.triangular && t.diagonal_nonzero);
            let t = id.is_triangular(|&i| std::cmp::Reverse(i), mode).unwrap();
            assert!(t.triangular && t.diagonal_nonzero);
        }
        let low = mat(&[&[1, 0], &[5, 1]]);
        let t = low.is_triangular(|&i| i, TriangularMode::Lower).unwrap();
        assert_eq!(
            t,
            Triangularity {
                triangular: true,
                diagonal_nonzero: true
            }
        );
        let swap = mat(&[&[0, 1], &[1, 0]]);
        for mode in [TriangularMode::Upper, TriangularMode::Lower] {
            assert!(!swap.is_triangular(|&i| i, mode).unwrap().triangular);
        }
    }

    #[test]
    fn triangularity_depends_on_order() {
        let low = mat(&[&[1, 0], &[5, 1]]);
        assert!(
            low.is_triangular(|&i| i, TriangularMode::Lower)
                .unwrap()
                .triangular
        );
        assert!(
            !low.is_triangular(|&i| std::cmp::Reverse(i), TriangularMode::Lower)
                .unwrap()
                .triangular
        );
        assert!(
            low.is_triangular(|&i| std::cmp::Reverse(i), TriangularMode::Upper)
                .unwrap()
                .triangular
        );
    }

    #[test]
    fn triangular_rejects_mismatched_labels() {
        let m = LabeledMatrix::from_entries(vec![0, 1], vec![0, 2], vec![int(1); 4]).unwrap();
        assert!(m.is_triangular(|&i| i, TriangularMode::Upper).is_err());
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(LabeledMatrix::<u8>::zeros(vec![1, 1], vec![2]).is_err());
    }

    #[test]
    fn span_examples() {
        let b0 = LabeledVector::new(vec!['x', 'y'], vec![int(1), int(0)]).unwrap();
        assert!(in_span(&b0.clone(), std::slice::from_ref(&b0)).unwrap());
        let zero = LabeledVector::new(vec!['y', 'x'], vec![int(0), int(0)]).unwrap();
        assert!(in_span(&zero, std::slice::from_ref(&b0)).unwrap());
        let perp = LabeledVector::new(vec!['x', 'y'], vec![int(0), int(1)]).unwrap();
        assert!(!in_span(&perp, std::slice::from_ref(&b0)).unwrap());
        // labels are matched by name, not position
        let same = LabeledVector::new(vec!['y', 'x'], vec![int(0), int(3)]).unwrap();
        assert!(in_span(&same, std::slice::from_ref(&b0)).unwrap());
        let other = LabeledVector::new(vec!['x', 'z'], vec![int(0), int(1)]).unwrap();
        assert!(in_span(&other, &[b0]).is_err());
    }

    #[test]
    fn solve_small_system() {
        let m = mat(&[&[2, 1], &[1, 3]]);
        let x = m.solve(&[int(3), int(5)]).unwrap();
        assert_eq!(x, vec![rat(4, 5), rat(7, 5)]);
        assert!(mat(&[&[1, 2], &[2, 4]]).solve(&[int(1), int(1)]).is_err());
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["0", "-3", "7/24", "-1/1152"] {
            assert_eq!(fmt_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(fmt_rational_strict(&int(1)), "1/1");
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<Rational>>> {
        (1usize..=12, 1usize..=12).prop_flat_map(|(m, n)| {
            prop::collection::vec(
                prop::collection::vec((-4i64..=4, 1i64..=3, 0u8..3), n).prop_map(|row| {
                    // bias towards zeros so that rank deficiency actually occurs
                    row.into_iter()
                        .map(|(a, b, z)| if z == 0 { int(0) } else { rat(a, b) })
                        .collect::<Vec<_>>()
                }),
                m,
            )
        })
    }

    proptest! {
        #[test]
        fn bareiss_matches_naive(rows in small_matrix()) {
            prop_assert_eq!(rank_of_rows(&rows), naive_rank(&rows));
        }

        #[test]
        fn rank_of_transpose(rows in small_matrix()) {
            let (m, n) = (rows.len(), rows[0].len());
            let entries = rows.concat();
            let a = LabeledMatrix::from_entries((0..m).collect(), (0..n).collect(), entries).unwrap();
            prop_assert_eq!(a.rank(), a.transpose().rank());
        }

        #[test]
        fn duplicated_rows_do_not_raise_rank(rows in small_matrix()) {
            let mut doubled = rows.clone();
            doubled.extend(rows.iter().map(|r| r.iter().map(|x| x * int(-2)).collect::<Vec<_>>()));
            prop_assert_eq!(rank_of_rows(&doubled), rank_of_rows(&rows));
        }
    }
}
