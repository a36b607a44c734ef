//! Relation families: the coefficients `C_n^p`, leading-term classes `J^lead`
//! and the genus-1 κ-trivial cycles.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactalg::{rank_of_rows, Rational};
use crate::partitions::{binomial, compositions, enumerate, factorial, Partition};
use crate::pushforward::FormalExpr;
use crate::strata::{genus1_q, KTrivialCycle, ThetaMultiset};

fn big(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `C_n^p` with parameter `l`.
///
/// `(-1)^{l+|p|} / Aut(p) * prod p_i^{p_i - 1} / p_i!` times the sum over
/// injections `φ: {1..|n|} -> {1..|p|}` of `prod p_{φ(i)}^{1 - n_i}`.
pub fn coeff_c(n: &Partition, l: u32, p: &Partition) -> Rational {
    let (m, len) = (n.len(), p.len());
    if m > len {
        return Rational::zero();
    }
    let parts = p.parts();
    // sums over partial injections keyed by the set of used targets
    let mut layer: BTreeMap<u32, Rational> = BTreeMap::from([(0, Rational::one())]);
    for &ni in n.parts() {
        let mut next: BTreeMap<u32, Rational> = BTreeMap::new();
        for (used, acc) in &layer {
            for (j, &pj) in parts.iter().enumerate() {
                if used >> j & 1 == 1 {
                    continue;
                }
                let w = Rational::new(BigInt::one(), BigInt::from(pj).pow(ni - 1));
                *next.entry(used | 1 << j).or_insert_with(Rational::zero) += acc * w;
            }
        }
        layer = next;
    }
    let sum: Rational = layer.into_values().sum();
    if sum.is_zero() {
        return sum;
    }
    let mut pre = Rational::new(BigInt::one(), p.aut());
    for &pi in parts {
        pre *= Rational::new(BigInt::from(pi).pow(pi - 1), factorial(pi as usize));
    }
    if (l as usize + len) % 2 == 1 {
        pre = -pre;
    }
    pre * sum
}

/// `2g - 2 + n - d`, the length threshold of the leading-term relations.
pub fn threshold(d: u32, genus: u32, markings: u32) -> i64 {
    2 * genus as i64 - 2 + markings as i64 - d as i64
}

/// `J^lead(m^-) = sum_p C_{m^-}^p <p>^d`, as a formal expression in the bracket basis.
///
/// `l = |m| - (2g - 2 + n - d)` must be positive.
pub fn j_lead(m: &Partition, genus: u32, markings: u32) -> Result<FormalExpr> {
    let d = m.sum();
    let l = m.len() as i64 - threshold(d, genus, markings);
    if l < 1 {
        return Err(Error::Precondition(format!(
            "{m} needs more than {} parts",
            threshold(d, genus, markings)
        )));
    }
    let minus = m.minus();
    FormalExpr::from_terms(
        d,
        enumerate(d).into_iter().map(|p| {
            let c = coeff_c(&minus, l as u32, &p);
            (p, c)
        }),
    )
}

/// Partitions `m ∈ P(d)` longer than the threshold, the rows of the `C` matrix.
pub fn long_partitions(d: u32, genus: u32, markings: u32) -> Vec<Partition> {
    let t = threshold(d, genus, markings);
    enumerate(d)
        .into_iter()
        .filter(|m| m.len() as i64 > t)
        .collect()
}

/// Rank of `(C_{m^-}^p)` over long `m` and all `p ∈ P(d)`.
pub fn rank_c(d: u32, genus: u32, markings: u32) -> usize {
    let rows: Vec<Vec<Rational>> = long_partitions(d, genus, markings)
        .iter()
        .map(|m| j_lead(m, genus, markings).expect("long row").coordinates())
        .collect();
    rank_of_rows(&rows)
}

fn cycle_for(terms: Vec<(ThetaMultiset, Rational)>) -> Result<KTrivialCycle> {
    let first = &terms
        .first()
        .ok_or_else(|| Error::Precondition("empty family".into()))?
        .0;
    // every genus-1 family member lives on M_{1,N} with N = sum (m_i - 2) + l
    let markings = first
        .entries()
        .iter()
        .map(|&(g, m)| if g == 1 { m } else { m - 2 })
        .sum();
    let mut cycle = KTrivialCycle::new(first.dim(), 1, markings);
    for (q, c) in terms {
        cycle.add_term(q, c)?;
    }
    Ok(cycle)
}

/// `(1/24) q_0(N, n) - sum_{i=1}^{N-1} C(N-2, i-1) q_i(N-i, n)`.
pub fn ktrivial_basic(big_n: u32, append: &Partition) -> Result<KTrivialCycle> {
    if big_n < 2 {
        return Err(Error::Precondition(format!("N = {big_n} < 2")));
    }
    let mut terms = vec![(
        genus1_q(0, &Partition::new(vec![big_n]).union(append))?,
        Rational::new(1.into(), 24.into()),
    )];
    for i in 1..big_n {
        let q = genus1_q(i, &Partition::new(vec![big_n - i]).union(append))?;
        terms.push((q, -big(binomial(big_n as u64 - 2, i as u64 - 1))));
    }
    cycle_for(terms)
}

/// Difference of the two expansions of `(1/24) q_0(a, b, n)`.
pub fn ktrivial_ab(a: u32, b: u32, append: &Partition) -> Result<KTrivialCycle> {
    if !(a > b && b >= 2) {
        return Err(Error::Precondition(format!(
            "need a > b >= 2, got ({a}, {b})"
        )));
    }
    let mut terms = Vec::new();
    for i in 1..a {
        let q = genus1_q(i, &Partition::new(vec![a - i, b]).union(append))?;
        terms.push((q, big(binomial(a as u64 - 2, i as u64 - 1))));
    }
    for i in 1..b {
        let q = genus1_q(i, &Partition::new(vec![a, b - i]).union(append))?;
        terms.push((q, -big(binomial(b as u64 - 2, i as u64 - 1))));
    }
    cycle_for(terms)
}

/// Combination of genus-0 cycles equal to `q_l(n[l])` modulo κ-trivial cycles:
/// `-(1/24) sum_m (-1)^{|m|} (m_1 / l) (l; m) q_0(m̂ ∪ n)` over compositions `m` of `l`.
pub fn reduction_expansion(l: u32, n: &Partition) -> Result<BTreeMap<ThetaMultiset, Rational>> {
    if l == 0 {
        return Err(Error::Precondition("l must be positive".into()));
    }
    let mut out: BTreeMap<ThetaMultiset, Rational> = BTreeMap::new();
    for m in compositions(l) {
        let sign = if m.len() % 2 == 0 { -1 } else { 1 };
        let c = Rational::new(
            BigInt::from(sign * m.first().expect("nonempty") as i64) * m.multinomial(),
            BigInt::from(24 * l as i64),
        );
        let q = genus1_q(0, &m.to_partition().hat().union(n))?;
        *out.entry(q).or_insert_with(Rational::zero) += c;
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// `q_l(n[l]) + (1/24) sum_m (-1)^{|m|} (m_1 / l) (l; m) q_0(m̂ ∪ n)`.
pub fn ktrivial_reduction(l: u32, n: &Partition) -> Result<KTrivialCycle> {
    let mut terms = vec![(genus1_q(l, &n.pad(l))?, Rational::one())];
    for (q, c) in reduction_expansion(l, n)? {
        terms.push((q, -c));
    }
    cycle_for(terms)
}

/// Whether the cycle pairs to zero with `ψ(p)` for every `p ∈ P(d)`.
pub fn verify_ktrivial(c: &KTrivialCycle) -> Result<bool> {
    let values: Vec<Result<Rational>> =
        enumerate(c.d()).par_iter().map(|p| c.pair_psi(p)).collect();
    for v in values {
        if !v?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A named member of one of the relation families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationFamily {
    Genus1Basic {
        big_n: u32,
    },
    Genus1Appended {
        big_n: u32,
        append: Partition,
    },
    Genus1Ab {
        a: u32,
        b: u32,
        append: Partition,
    },
    Reduction {
        l: u32,
        n: Partition,
    },
    JLead {
        m: Partition,
        genus: u32,
        markings: u32,
    },
}

/// What a relation family member evaluates to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Realization {
    Cycle(KTrivialCycle),
    Formal(FormalExpr),
}

impl RelationFamily {
    pub fn realize(&self) -> Result<Realization> {
        Ok(match self {
            RelationFamily::Genus1Basic { big_n } => {
                Realization::Cycle(ktrivial_basic(*big_n, &Partition::empty())?)
            }
            RelationFamily::Genus1Appended { big_n, append } => {
                Realization::Cycle(ktrivial_basic(*big_n, append)?)
            }
            RelationFamily::Genus1Ab { a, b, append } => {
                Realization::Cycle(ktrivial_ab(*a, *b, append)?)
            }
            RelationFamily::Reduction { l, n } => Realization::Cycle(ktrivial_reduction(*l, n)?),
            RelationFamily::JLead { m, genus, markings } => {
                Realization::Formal(j_lead(m, *genus, *markings)?)
            }
        })
    }

    /// Genus-1 cycle families with `d <= max_d` on `M_{1,n}`, `n <= max_n`.
    pub fn genus1_cycles(max_d: u32, max_n: u32) -> Vec<RelationFamily> {
        let mut out = Vec::new();
        let fits = |c: &KTrivialCycle| c.d() <= max_d && c.markings() <= max_n;
        for big_n in 2..=max_n {
            for rest in 0..=max_n - big_n {
                for append in enumerate(rest) {
                    let fam = if append.is_empty() {
                        RelationFamily::Genus1Basic { big_n }
                    } else {
                        RelationFamily::Genus1Appended {
                            big_n,
                            append: append.clone(),
                        }
                    };
                    if ktrivial_basic(big_n, &append).is_ok_and(|c| fits(&c)) {
                        out.push(fam);
                    }
                }
            }
        }
        for a in 3..=max_n {
            for b in 2..a.min(max_n - a + 1) {
                for append in (0..=max_n - a - b).flat_map(enumerate) {
                    if ktrivial_ab(a, b, &append).is_ok_and(|c| fits(&c)) {
                        out.push(RelationFamily::Genus1Ab { a, b, append });
                    }
                }
            }
        }
        for l in 1..=3 {
            for rest in 0..=max_n.saturating_sub(2 * l) {
                for n in enumerate(rest) {
                    if ktrivial_reduction(l, &n).is_ok_and(|c| fits(&c)) {
                        out.push(RelationFamily::Reduction { l, n });
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{int, rat};
    use crate::partitions::enumerate_at_most;
    use crate::pushforward::Basis;
    use crate::strata::{enum_q, pair_formal};

    fn p(parts: &[u32]) -> Partition {
        Partition::from(parts)
    }

    fn q(s: &str) -> ThetaMultiset {
        s.parse().unwrap()
    }

    /// Direct evaluation over all injections as index tuples.
    fn coeff_c_naive(n: &Partition, l: u32, pp: &Partition) -> Rational {
        let (m, len) = (n.len(), pp.len());
        let mut sum = Rational::zero();
        let mut idx = vec![0usize; m];
        loop {
            let mut distinct = idx.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() == m {
                let mut t = Rational::one();
                for i in 0..m {
                    let base = BigInt::from(pp.parts()[idx[i]]);
                    t /= Rational::from_integer(base.pow(n.parts()[i] - 1));
                }
                sum += t;
            }
            let mut k = 0;
            while k < m {
                idx[k] += 1;
                if idx[k] < len {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == m {
                break;
            }
        }
        if m > len {
            return Rational::zero();
        }
        let mut pre = Rational::new(BigInt::one(), pp.aut());
        for &x in pp.parts() {
            pre *= Rational::new(BigInt::from(x).pow(x - 1), factorial(x as usize));
        }
        let sign = if (l as usize + len).is_multiple_of(2) {
            1
        } else {
            -1
        };
        pre * sum * int(sign)
    }

    #[test]
    fn coeff_c_examples() {
        assert_eq!(coeff_c(&p(&[1]), 1, &p(&[2])), int(1));
        assert_eq!(coeff_c(&p(&[1, 1]), 1, &p(&[2])), int(0));
        assert_eq!(coeff_c(&p(&[1]), 2, &p(&[2])), int(-1));
        // empty n: the single empty injection
        assert_eq!(coeff_c(&Partition::empty(), 1, &p(&[1, 1])), rat(-1, 2));
    }

    #[test]
    fn coeff_c_matches_naive() {
        for d in 1..=6 {
            for m in enumerate(d) {
                let minus = m.minus();
                for pp in enumerate(d) {
                    for l in 1..=3 {
                        assert_eq!(coeff_c(&minus, l, &pp), coeff_c_naive(&minus, l, &pp));
                    }
                }
            }
        }
    }

    #[test]
    fn j_lead_shape() {
        assert!(j_lead(&p(&[2]), 0, 5).is_err());
        let j = j_lead(&p(&[1, 1]), 0, 5).unwrap();
        assert_eq!(j.degree(), 2);
        for m in long_partitions(4, 0, 7) {
            let j = j_lead(&m, 0, 7).unwrap();
            for pp in j.coeffs().keys() {
                assert!(pp.len() >= m.minus().len());
            }
        }
    }

    #[test]
    fn genus0_kernel() {
        for n in 4..=7u32 {
            for d in 1..=(n - 3).min(4) {
                let qs = enum_q(d, 0, n).unwrap();
                for m in long_partitions(d, 0, n) {
                    let j = j_lead(&m, 0, n).unwrap();
                    for m_q in &qs {
                        assert_eq!(pair_formal(&j, Basis::Bracket, m_q, 0, n).unwrap(), int(0));
                    }
                }
            }
        }
    }

    #[test]
    fn rank_c_counts() {
        for g in 0..=2u32 {
            for n in 0..=6u32 {
                if 2 * g + n <= 2 {
                    continue;
                }
                for d in 1..=5 {
                    let t = threshold(d, g, n);
                    let short = if t < 0 {
                        0
                    } else {
                        enumerate_at_most(d, t as usize).len()
                    };
                    let rows = long_partitions(d, g, n).len();
                    assert_eq!(rows, enumerate(d).len() - short);
                    assert_eq!(rank_c(d, g, n), rows, "({d},{g},{n})");
                }
            }
        }
    }

    #[test]
    fn basic_family() {
        let c = ktrivial_basic(2, &Partition::empty()).unwrap();
        assert_eq!(c.terms().len(), 2);
        assert_eq!(c.terms()[&q("(0,4)")], rat(1, 24));
        assert_eq!(c.terms()[&q("(1,1)|(0,3)")], int(-1));
        assert!(verify_ktrivial(&c).unwrap());
        assert_eq!(
            ktrivial_basic(5, &Partition::empty())
                .unwrap()
                .terms()
                .len(),
            5
        );
        assert!(ktrivial_basic(1, &Partition::empty()).is_err());
    }

    #[test]
    fn ab_family() {
        let c = ktrivial_ab(3, 2, &Partition::empty()).unwrap();
        assert_eq!(c.terms().len(), 3);
        assert_eq!(c.terms()[&q("(1,1)|(0,4)|(0,4)")], int(1));
        assert_eq!(c.terms()[&q("(1,2)|(0,4)|(0,3)")], int(1));
        assert_eq!(c.terms()[&q("(1,1)|(0,5)|(0,3)")], int(-1));
        assert!(verify_ktrivial(&c).unwrap());
        assert!(ktrivial_ab(2, 2, &Partition::empty()).is_err());
    }

    #[test]
    fn reduction_family() {
        for l in 1..=3 {
            for n in [p(&[]), p(&[2]), p(&[1, 1])] {
                let c = ktrivial_reduction(l, &n).unwrap();
                assert!(verify_ktrivial(&c).unwrap(), "l={l} n={n}");
            }
            assert_eq!(compositions(l).len(), 1 << (l - 1));
        }
        // l = 1 is the basic relation with N = 2, rearranged and rescaled
        let basic = ktrivial_basic(2, &p(&[3])).unwrap();
        let l1 = ktrivial_reduction(1, &p(&[3])).unwrap();
        for (m, c) in basic.terms() {
            assert_eq!(&(-c), &l1.terms()[m]);
        }
    }

    #[test]
    fn non_trivial_cycle_detected() {
        let mut c = KTrivialCycle::new(1, 1, 2);
        c.add_term(q("(0,4)"), int(1)).unwrap();
        assert!(!verify_ktrivial(&c).unwrap());
        assert!(verify_ktrivial(&KTrivialCycle::new(1, 1, 2)).unwrap());
    }

    /// The inductive step: `q_l(n[l]) = (1/24) q_0({l+1} ∪ n[l-1]) - sum_i C(l-1, i) q_{l-i}({i+1} ∪ n[l-1])`.
    fn expansion_by_induction(l: u32, n: &Partition) -> BTreeMap<ThetaMultiset, Rational> {
        let mut out: BTreeMap<ThetaMultiset, Rational> = BTreeMap::new();
        let head = genus1_q(0, &Partition::new(vec![l + 1]).union(&n.pad(l - 1))).unwrap();
        *out.entry(head).or_insert_with(Rational::zero) += rat(1, 24);
        for i in 1..l {
            let inner_n = Partition::new(vec![i + 1]).union(&n.pad(i - 1));
            let c = big(binomial(l as u64 - 1, i as u64));
            for (m, v) in expansion_by_induction(l - i, &inner_n) {
                *out.entry(m).or_insert_with(Rational::zero) -= &c * v;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    #[test]
    fn reduction_induction_matches_closed_form() {
        for l in 1..=6 {
            for n in [p(&[]), p(&[1]), p(&[3, 2]), p(&[2, 1, 1])] {
                assert_eq!(
                    expansion_by_induction(l, &n),
                    reduction_expansion(l, &n).unwrap(),
                    "l={l}"
                );
            }
        }
    }

    #[test]
    fn family_listing_respects_bounds() {
        let fams = RelationFamily::genus1_cycles(4, 6);
        assert!(!fams.is_empty());
        for f in fams {
            match f.realize().unwrap() {
                Realization::Cycle(c) => assert!(c.d() <= 4 && c.markings() <= 6),
                Realization::Formal(_) => unreachable!(),
            }
        }
        let j = RelationFamily::JLead {
            m: p(&[1, 1]),
            genus: 0,
            markings: 5,
        };
        assert!(matches!(j.realize().unwrap(), Realization::Formal(_)));
    }
}
