//! Ranks of the combinatorial kappa ring and the genus-1 generator matrices.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactalg::{in_span, LabeledMatrix, LabeledVector, Rational};
use crate::partitions::{
    binomial, enumerate, enumerate_at_most, enumerate_bounded, enumerate_exact_len, factorial,
    Partition,
};
use crate::pushforward::{Basis, FormalExpr};
use crate::relations::{j_lead, reduction_expansion, threshold};
use crate::strata::{enum_q, genus1_q, pair_formal, pair_psi, ThetaMultiset};

/// Rank of `κ_c^d(M_{g,n})` next to the closed formula, where one is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankReport {
    pub d: u32,
    pub g: u32,
    pub n: u32,
    pub matrix_rank: usize,
    pub formula_value: Option<usize>,
    pub q_count: usize,
    pub p_count: usize,
}

impl RankReport {
    /// True unless a formula exists and differs from the computed rank.
    pub fn agrees(&self) -> bool {
        self.formula_value.is_none_or(|f| f == self.matrix_rank)
    }
}

impl Serialize for RankReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(6))?;
        map.serialize_entry("d", &self.d)?;
        map.serialize_entry("g", &self.g)?;
        map.serialize_entry("n", &self.n)?;
        map.serialize_entry("rank", &self.matrix_rank)?;
        map.serialize_entry("formula", &self.formula_value)?;
        map.serialize_entry("agrees", &self.agrees())?;
        map.end()
    }
}

/// `(<ψ(p), q>)` over `p ∈ P(d)` and `q ∈ Q(d; g, n)`.
pub fn pairing_matrix(d: u32, g: u32, n: u32) -> Result<LabeledMatrix<Partition, ThetaMultiset>> {
    let rows = enumerate(d);
    let cols = enum_q(d, g, n)?;
    let cells: Vec<(usize, usize)> = (0..rows.len())
        .flat_map(|i| (0..cols.len()).map(move |j| (i, j)))
        .collect();
    let entries = cells
        .par_iter()
        .map(|&(i, j)| pair_psi(&rows[i], &cols[j], g, n))
        .collect::<Result<Vec<_>>>()?;
    LabeledMatrix::from_entries(rows, cols, entries)
}

/// `|P_1(d, n - d)|`.
pub fn genus1_rank_formula(d: u32, n: u32) -> Result<usize> {
    if d > n {
        return Err(Error::Precondition(format!("d = {d} exceeds n = {n}")));
    }
    Ok(enumerate_bounded(d, 1, (n - d) as usize).len())
}

/// `|P(d, n - 2 - d)|`.
pub fn genus0_rank_formula(d: u32, n: u32) -> Result<usize> {
    if d + 2 > n {
        return Err(Error::Precondition(format!(
            "d = {d} exceeds n - 2 = {}",
            n as i64 - 2
        )));
    }
    Ok(enumerate_at_most(d, (n - 2 - d) as usize).len())
}

pub fn rank_kappa_c(d: u32, g: u32, n: u32) -> Result<RankReport> {
    let m = pairing_matrix(d, g, n)?;
    let formula_value = match g {
        0 => Some(genus0_rank_formula(d, n)?),
        1 => Some(genus1_rank_formula(d, n)?),
        _ => None,
    };
    Ok(RankReport {
        d,
        g,
        n,
        matrix_rank: m.rank(),
        formula_value,
        q_count: m.ncols(),
        p_count: m.nrows(),
    })
}

/// `C(n + e, e) C(g + e, e) / (e + 1)!`.
pub fn asymptotic_formula(g: u32, e: u32, n: u32) -> Rational {
    let num = binomial(n as u64 + e as u64, e as u64) * binomial(g as u64 + e as u64, e as u64);
    Rational::new(num, factorial(e as usize + 1))
}

/// The generator sets `A1(d; 1, n)` and `A2(d; 1, n)`.
///
/// `A1` holds `q_l(n)` with `n - d` parts, all at least 2, summing to `n - l`.
/// `A2` holds `q_l(1, n_2, ..)` with `n - d` parts, `sum_{i>=2} n_i = n - l - 1`
/// and every `n_i <= l + 1`; it is parametrized by `P(d, n - d)`.
pub fn generators_a(d: u32, n: u32) -> Result<(Vec<ThetaMultiset>, Vec<ThetaMultiset>)> {
    if n <= d {
        return Err(Error::Precondition(format!(
            "need n - d >= 1, got ({d}, {n})"
        )));
    }
    let k = (n - d) as usize;
    let mut a1 = Vec::new();
    for (l, small) in a1_labels(d, n) {
        let parts: Vec<u32> = small.parts().iter().map(|x| x + 1).collect();
        a1.push(genus1_q(l, &Partition::new(parts))?);
    }
    let mut a2 = Vec::new();
    if d >= 1 {
        for m in enumerate_at_most(d, k) {
            let l = m.parts()[0];
            let mut parts: Vec<u32> = m.parts()[1..].iter().map(|x| x + 1).collect();
            parts.resize(k, 1);
            a2.push(genus1_q(l, &Partition::new(parts))?);
        }
    }
    Ok((a1, a2))
}

/// `(l, n - 1)` for each `q_l(n) ∈ A1(d; 1, n)`, with `n - 1 ∈ P(d - l; n - d)`.
fn a1_labels(d: u32, n: u32) -> Vec<(u32, Partition)> {
    let k = (n - d) as usize;
    let mut out = Vec::new();
    for l in 1..=(2 * d).saturating_sub(n) {
        for small in enumerate_exact_len(d - l, k) {
            out.push((l, small));
        }
    }
    out
}

/// `𝔮(m) = q_0(m̂)` on `M_{1, 2d}`.
pub fn frak_q(m: &Partition) -> Result<ThetaMultiset> {
    genus1_q(0, &m.hat())
}

/// `P(d) ∖ P(d, n - d)`, in partition order.
pub fn long_index(d: u32, n: u32) -> Vec<Partition> {
    enumerate(d)
        .into_iter()
        .filter(|p| p.len() as i64 > n as i64 - d as i64)
        .collect()
}

/// `N(d; 1, n) = (<ψ(p), 𝔮(p')>)` over `p, p' ∈ P(d) ∖ P(d, n - d)`.
pub fn matrix_n(d: u32, n: u32) -> Result<LabeledMatrix<Partition>> {
    if n > 2 * d {
        return Err(Error::Precondition(format!("need n <= 2d, got ({d}, {n})")));
    }
    let labels = long_index(d, n);
    let cols = labels.iter().map(frak_q).collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..labels.len())
        .flat_map(|i| (0..labels.len()).map(move |j| (i, j)))
        .collect();
    let entries = cells
        .par_iter()
        .map(|&(i, j)| pair_psi(&labels[i], &cols[j], 1, 2 * d))
        .collect::<Result<Vec<_>>>()?;
    LabeledMatrix::from_entries(labels.clone(), labels, entries)
}

/// Column label of `M(d; 1, n)`: the generator `q_l(n)` and its designated row `(n - 1)[l]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MColumn {
    pub l: u32,
    pub generator: ThetaMultiset,
    pub diagonal: Partition,
}

/// `M(d; 1, n)`: each `q_l(n) ∈ A1(d; 1, n)`, lifted to `M_{1,2d}`, written in the `𝔮(m)` basis.
///
/// The lift is `q_l(n'[l])` with `n' = n ∪ 1^{2d-n-l}`, expanded by [`reduction_expansion`].
/// The term `q_0(m̂ ∪ n')` equals `𝔮(m ∪ (n - 1))`.
pub fn matrix_m(d: u32, n: u32) -> Result<LabeledMatrix<Partition, MColumn>> {
    if n <= d {
        return Err(Error::Precondition(format!(
            "need n - d >= 1, got ({d}, {n})"
        )));
    }
    let rows = long_index(d, n);
    let row_of: BTreeMap<ThetaMultiset, usize> = rows
        .iter()
        .enumerate()
        .map(|(i, m)| Ok((frak_q(m)?, i)))
        .collect::<Result<_>>()?;
    let labels = a1_labels(d, n);
    let mut cols = Vec::with_capacity(labels.len());
    let mut entries = vec![Rational::zero(); rows.len() * labels.len()];
    for (j, (l, small)) in labels.iter().enumerate() {
        let big_parts = Partition::new(small.parts().iter().map(|x| x + 1).collect());
        let padded = big_parts.pad(2 * d - n - l);
        for (q, c) in reduction_expansion(*l, &padded)? {
            let i = *row_of
                .get(&q)
                .ok_or_else(|| Error::Shape(format!("{q} is not a 𝔮(m) with m long")))?;
            entries[i * labels.len() + j] += c;
        }
        cols.push(MColumn {
            l: *l,
            generator: genus1_q(*l, &big_parts)?,
            diagonal: small.pad(*l),
        });
    }
    LabeledMatrix::from_entries(rows, cols, entries)
}

/// `(-1)^{l-1} (l-1)! / 24`.
pub fn matrix_m_diagonal(l: u32) -> Rational {
    let v = Rational::new(factorial(l as usize - 1), BigInt::from(24));
    if l.is_multiple_of(2) {
        -v
    } else {
        v
    }
}

/// Whether every bracket class of degree `d` lies in the span of the short brackets
/// `<p>`, `p ∈ P(d, e - g + 1)`, and the classes `J^lead(m^-)` for the long `m`,
/// all taken in pairing coordinates against `Q(d; g, n)`.
pub fn spanning_check(d: u32, g: u32, n: u32) -> Result<bool> {
    let qs = enum_q(d, g, n)?;
    let coords = |phi: &FormalExpr| -> Result<LabeledVector<ThetaMultiset>> {
        let values = qs
            .par_iter()
            .map(|q| pair_formal(phi, Basis::Bracket, q, g, n))
            .collect::<Result<Vec<_>>>()?;
        LabeledVector::new(qs.clone(), values)
    };
    let t = threshold(d, g, n);
    let mut basis = Vec::new();
    for p in enumerate(d) {
        if p.len() as i64 <= t {
            basis.push(coords(&FormalExpr::unit(p))?);
        } else {
            basis.push(coords(&j_lead(&p, g, n)?)?);
        }
    }
    for p in enumerate(d) {
        if !in_span(&coords(&FormalExpr::unit(p))?, &basis)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{int, rat, TriangularMode};
    use crate::partitions::enumerate_exact_len;

    #[test]
    fn small_pairing_matrix() {
        let m = pairing_matrix(1, 1, 2).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (1, 2));
        assert_eq!(m.row(0), &[int(1), rat(1, 24)]);
        assert_eq!(m.rank(), 1);
        let top = pairing_matrix(4, 1, 4).unwrap();
        assert_eq!(top.ncols(), 1);
    }

    #[test]
    fn zero_rows_are_the_non_refining_ones() {
        for (d, g, n) in [(2u32, 1u32, 4u32), (3, 0, 7), (3, 2, 1)] {
            let m = pairing_matrix(d, g, n).unwrap();
            for (i, pp) in m.row_labels().iter().enumerate() {
                let zero = m.row(i).iter().all(Zero::is_zero);
                let refines_some = m
                    .col_labels()
                    .iter()
                    .any(|q| pp.refines(&crate::strata::p_map(q)));
                assert_eq!(zero, !refines_some, "{pp} in ({d},{g},{n})");
            }
        }
    }

    #[test]
    fn rank_examples() {
        let r = rank_kappa_c(1, 1, 2).unwrap();
        assert_eq!((r.matrix_rank, r.formula_value), (1, Some(1)));
        let r = rank_kappa_c(2, 0, 5).unwrap();
        assert_eq!((r.matrix_rank, r.formula_value), (1, Some(1)));
        let r = rank_kappa_c(3, 1, 6).unwrap();
        assert_eq!((r.matrix_rank, r.formula_value), (3, Some(3)));
        assert!(r.matrix_rank <= r.p_count.min(r.q_count));
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"d":3,"g":1,"n":6,"rank":3,"formula":3,"agrees":true}"#
        );
        let two = rank_kappa_c(2, 2, 1).unwrap();
        assert_eq!(two.formula_value, None);
        assert!(two.agrees());
    }

    #[test]
    fn formula_examples() {
        assert_eq!(genus1_rank_formula(4, 6).unwrap(), 5);
        assert_eq!(genus1_rank_formula(1, 2).unwrap(), 1);
        assert_eq!(genus1_rank_formula(0, 3).unwrap(), 1);
        assert_eq!(asymptotic_formula(0, 0, 5), int(1));
        assert_eq!(asymptotic_formula(1, 1, 9), int(10));
        assert_eq!(asymptotic_formula(0, 2, 10), int(11));
    }

    #[test]
    fn generator_counts() {
        for d in 1..=7u32 {
            for n in d + 1..=2 * d + 2 {
                let (a1, a2) = generators_a(d, n).unwrap();
                let expected_a1: usize = (1..=(2 * d).saturating_sub(n))
                    .map(|l| enumerate_exact_len(d - l, (n - d) as usize).len())
                    .sum();
                assert_eq!(a1.len(), expected_a1);
                assert_eq!(
                    a1.len() + a2.len(),
                    genus1_rank_formula(d, n).unwrap(),
                    "({d},{n})"
                );
                if 2 * d <= n {
                    assert!(a1.is_empty());
                }
                for q in a1.iter().chain(&a2) {
                    assert!(q.is_realizable(1, n));
                    assert_eq!(q.dim(), d);
                }
            }
        }
    }

    #[test]
    fn matrix_n_is_triangular() {
        for d in 1..=5u32 {
            for n in d..=2 * d {
                let m = matrix_n(d, n).unwrap();
                let t = m
                    .is_triangular(|p: &Partition| p.clone(), TriangularMode::Upper)
                    .unwrap();
                assert!(t.triangular && t.diagonal_nonzero, "({d},{n})");
                assert_eq!(m.rank(), m.nrows());
            }
        }
    }

    #[test]
    fn matrix_m_structure() {
        for d in 2..=5u32 {
            for n in d + 1..2 * d {
                let m = matrix_m(d, n).unwrap();
                let (a1, _) = generators_a(d, n).unwrap();
                assert_eq!(m.ncols(), a1.len());
                assert_eq!(m.rank(), a1.len(), "({d},{n})");
                for (j, col) in m.col_labels().iter().enumerate() {
                    assert_eq!(col.generator, a1[j]);
                    assert_eq!(
                        m.entry(&col.diagonal, col).unwrap(),
                        &matrix_m_diagonal(col.l)
                    );
                    for (i, row) in m.row_labels().iter().enumerate() {
                        if !m.get(i, j).is_zero() {
                            assert!(col.diagonal.refines(row), "{} vs {row}", col.diagonal);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn matrix_m_columns_pair_like_their_generators() {
        for (d, n) in [(3u32, 4u32), (4, 5), (4, 6)] {
            let m = matrix_m(d, n).unwrap();
            for (j, col) in m.col_labels().iter().enumerate() {
                let lifted = {
                    let parts: Vec<u32> = col
                        .generator
                        .entries()
                        .iter()
                        .filter(|e| e.0 == 0)
                        .map(|e| e.1 - 2)
                        .collect();
                    genus1_q(col.l, &Partition::new(parts).pad(2 * d - n)).unwrap()
                };
                for pp in enumerate(d) {
                    let direct = pair_psi(&pp, &lifted, 1, 2 * d).unwrap();
                    assert_eq!(direct, pair_psi(&pp, &col.generator, 1, n).unwrap());
                    let mut via = Rational::zero();
                    for (i, row) in m.row_labels().iter().enumerate() {
                        via +=
                            m.get(i, j) * pair_psi(&pp, &frak_q(row).unwrap(), 1, 2 * d).unwrap();
                    }
                    assert_eq!(direct, via);
                }
            }
        }
    }

    #[test]
    fn diagonal_values() {
        assert_eq!(matrix_m_diagonal(1), rat(1, 24));
        assert_eq!(matrix_m_diagonal(2), rat(-1, 24));
        assert_eq!(matrix_m_diagonal(3), rat(2, 24));
    }

    #[test]
    fn spanning() {
        for n in 1..=6u32 {
            for d in 1..=n.min(4) {
                assert!(spanning_check(d, 1, n).unwrap(), "({d},{n})");
            }
        }
        for n in 4..=7u32 {
            for d in 1..=n - 3 {
                assert!(spanning_check(d, 0, n).unwrap());
            }
        }
    }
}
