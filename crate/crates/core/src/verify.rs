//! Named verification suites, each a list of checked cases.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactalg::{fmt_rational, Rational, TriangularMode};
use crate::intersect::{genus0_closed, tau};
use crate::kapparing::{
    generators_a, genus1_rank_formula, matrix_m, matrix_m_diagonal, matrix_n, rank_kappa_c,
};
use crate::partitions::{enumerate, Partition};
use crate::pushforward::{change_basis, psi_class, psi_class_oracle, Basis};
use crate::relations::{j_lead, long_partitions, verify_ktrivial, Realization, RelationFamily};
use crate::strata::{enum_q, pair_formal};

/// One checked case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Case {
    pub case: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

impl Case {
    fn new(case: String, expected: impl ToString, got: impl ToString) -> Self {
        let (expected, got) = (expected.to_string(), got.to_string());
        let pass = expected == got;
        Case {
            case,
            expected,
            got,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Genus0Relations,
    Ktrivial,
    Genus1Rank,
    Bases,
    Matrices,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Genus0Relations,
        Suite::Ktrivial,
        Suite::Genus1Rank,
        Suite::Bases,
        Suite::Matrices,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Genus0Relations => "genus0-relations",
            Suite::Ktrivial => "ktrivial",
            Suite::Genus1Rank => "genus1-rank",
            Suite::Bases => "bases",
            Suite::Matrices => "matrices",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

pub fn run_suite(suite: Suite, max_d: u32, max_n: u32) -> Result<Vec<Case>> {
    match suite {
        Suite::Genus0Relations => genus0_relations(max_d, max_n),
        Suite::Ktrivial => ktrivial(max_d, max_n),
        Suite::Genus1Rank => genus1_rank(max_d, max_n),
        Suite::Bases => bases(max_d, max_n),
        Suite::Matrices => matrices(max_d, max_n),
    }
}

fn genus0_relations(max_d: u32, max_n: u32) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    for n in 4..=max_n {
        for d in 1..=(n - 3).min(max_d) {
            let r = rank_kappa_c(d, 0, n)?;
            let formula = r.formula_value.expect("genus 0 has a formula");
            out.push(Case::new(
                format!("rank d={d} g=0 n={n}"),
                formula,
                r.matrix_rank,
            ));
            let qs = enum_q(d, 0, n)?;
            for m in long_partitions(d, 0, n) {
                let j = j_lead(&m, 0, n)?;
                let mut nonzero = 0;
                for q in &qs {
                    if !pair_formal(&j, Basis::Bracket, q, 0, n)?.is_zero() {
                        nonzero += 1;
                    }
                }
                out.push(Case::new(
                    format!("j_lead m={m} n={n} nonzero pairings"),
                    0,
                    nonzero,
                ));
            }
        }
    }
    Ok(out)
}

fn ktrivial(max_d: u32, max_n: u32) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    for family in RelationFamily::genus1_cycles(max_d, max_n) {
        let Realization::Cycle(c) = family.realize()? else {
            continue;
        };
        let label = format!("{family:?} d={} n={}", c.d(), c.markings());
        out.push(Case::new(label, true, verify_ktrivial(&c)?));
    }
    Ok(out)
}

fn genus1_rank(max_d: u32, max_n: u32) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for d in 1..=(n - 1).min(max_d) {
            let r = rank_kappa_c(d, 1, n)?;
            out.push(Case::new(
                format!("rank d={d} g=1 n={n}"),
                genus1_rank_formula(d, n)?,
                r.matrix_rank,
            ));
        }
    }
    Ok(out)
}

fn bases(max_d: u32, max_n: u32) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    for d in 0..=max_d {
        for p in enumerate(d) {
            let engine = psi_class(&p, 1, 1)?;
            out.push(Case::new(
                format!("psi_class {p}"),
                psi_class_oracle(&p, 1, 1),
                engine,
            ));
        }
        if d >= 1 {
            let size = enumerate(d).len();
            let c0 = Rational::from_integer(1.into());
            for basis in [Basis::Psi, Basis::Bracket] {
                let rank = change_basis(d, basis, &c0).rank();
                out.push(Case::new(
                    format!("change_basis {basis:?} d={d} rank"),
                    size,
                    rank,
                ));
            }
        }
    }
    for n in 3..=max_n.max(3) {
        for p in enumerate(n - 3) {
            let mut exps = p.parts().to_vec();
            exps.resize(n as usize, 0);
            out.push(Case::new(
                format!("tau genus 0 {exps:?}"),
                fmt_rational(&genus0_closed(&exps)?),
                fmt_rational(&tau(0, &exps)?),
            ));
        }
    }
    out.push(Case::new(
        "tau_1 genus 1".into(),
        "1/24",
        fmt_rational(&tau(1, &[1])?),
    ));
    out.push(Case::new(
        "tau_2 tau_0 genus 1".into(),
        "1/24",
        fmt_rational(&tau(1, &[2, 0])?),
    ));
    Ok(out)
}

fn matrices(max_d: u32, _max_n: u32) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    for d in 1..=max_d {
        for n in d..=2 * d {
            let m = matrix_n(d, n)?;
            let t = m.is_triangular(Partition::clone, TriangularMode::Upper)?;
            out.push(Case::new(
                format!("N d={d} n={n} triangular, nonzero diagonal"),
                "true true",
                format!("{} {}", t.triangular, t.diagonal_nonzero),
            ));
        }
        for n in d + 1..2 * d {
            let m = matrix_m(d, n)?;
            let (a1, _) = generators_a(d, n)?;
            out.push(Case::new(format!("M d={d} n={n} rank"), a1.len(), m.rank()));
            let designated = m
                .col_labels()
                .iter()
                .all(|c| m.entry(&c.diagonal, c) == Some(&matrix_m_diagonal(c.l)));
            out.push(Case::new(
                format!("M d={d} n={n} designated entries"),
                true,
                designated,
            ));
        }
        for n in d + 1..=2 * d + 2 {
            let (a1, a2) = generators_a(d, n)?;
            out.push(Case::new(
                format!("|A1| + |A2| d={d} n={n}"),
                genus1_rank_formula(d, n)?,
                a1.len() + a2.len(),
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        for s in Suite::ALL {
            let cases = run_suite(s, 3, 6).unwrap();
            assert!(!cases.is_empty(), "{s}");
            for c in cases {
                assert!(c.pass, "{s}: {c:?}");
            }
        }
    }
}
