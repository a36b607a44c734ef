//! Kappa polynomials and pushforward along forgetful maps.
//!
//! Classes are pushed forward one marking at a time. For a monomial
//! `K * prod ψ_j^{e_j} * ψ_last^{t0}` on a space with extra markings:
//!
//! * each `κ_a` in `K` is the pullback `κ_a` plus `ψ_last^a`;
//! * if the resulting power `t` of `ψ_last` is positive, the other ψ classes
//!   are pullbacks and `ψ_last^t` pushes forward to `κ_{t-1}`, with `κ_0` the
//!   scalar `2g - 2 + n` of the target;
//! * if `t = 0`, the string rule lowers one of the remaining ψ exponents.
//!
//! `κ_0` never appears as a variable: a [`KappaPoly`] is tagged with its
//! ambient `(g, n)` and the scalar is folded into coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use parking_lot::RwLock;

use crate::error::{Error, Result};
use crate::exactalg::{fmt_rational, LabeledMatrix, Rational};
use crate::partitions::{enumerate, Partition};

/// Basis of the formal space `Ψ(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `ψ(p)`: pushforward of `prod ψ^{p_i + 1}`.
    Psi,
    /// `κ(p) = prod κ_{p_i}`.
    Kappa,
    /// `<p>^d`: degree `d` part of the pushforward of `prod 1/(1 - p_i ψ)`.
    Bracket,
}

impl std::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi" => Ok(Basis::Psi),
            "kappa" => Ok(Basis::Kappa),
            "bracket" => Ok(Basis::Bracket),
            other => Err(Error::Parse(format!("unknown basis `{other}`"))),
        }
    }
}

/// Exact polynomial in `κ_1, κ_2, ...` on `M_{g,n}`.
///
/// Monomials are indexed by partitions: `(2,1,1)` is `κ_2 κ_1^2`.
#[derive(Clone, PartialEq, Eq)]
pub struct KappaPoly {
    genus: u32,
    markings: u32,
    terms: BTreeMap<Partition, Rational>,
}

impl KappaPoly {
    pub fn zero(genus: u32, markings: u32) -> Self {
        KappaPoly {
            genus,
            markings,
            terms: BTreeMap::new(),
        }
    }

    /// A single monomial `coeff * prod κ_{m_i}`.
    pub fn monomial(genus: u32, markings: u32, m: Partition, coeff: Rational) -> Self {
        let mut out = Self::zero(genus, markings);
        out.add_term(m, coeff);
        out
    }

    fn from_terms(genus: u32, markings: u32, terms: BTreeMap<Partition, Rational>) -> Self {
        let mut out = Self::zero(genus, markings);
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn markings(&self) -> u32 {
        self.markings
    }

    /// Value of `κ_0 = 2g - 2 + n`.
    pub fn kappa0(&self) -> i64 {
        2 * self.genus as i64 - 2 + self.markings as i64
    }

    pub fn terms(&self) -> &BTreeMap<Partition, Rational> {
        &self.terms
    }

    pub fn coeff(&self, m: &Partition) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every monomial has degree `d`.
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.sum() == d)
    }

    fn add_term(&mut self, m: Partition, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn check_ambient(&self, other: &KappaPoly) -> Result<()> {
        if (self.genus, self.markings) != (other.genus, other.markings) {
            return Err(Error::MixedAmbient(format!(
                "({}, {}) vs ({}, {})",
                self.genus, self.markings, other.genus, other.markings
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &KappaPoly) -> Result<KappaPoly> {
        self.check_ambient(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> KappaPoly {
        let terms = self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect();
        KappaPoly::from_terms(self.genus, self.markings, terms)
    }

    /// Coordinates of the degree-`d` part against the κ-monomials of degree `d`.
    pub fn coordinates(&self, d: u32) -> Vec<Rational> {
        enumerate(d).iter().map(|m| self.coeff(m)).collect()
    }
}

impl fmt::Display for KappaPoly {
    /// Renders e.g. `1*k1^2 + 1*k2`, monomials in partition order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c < &Rational::zero();
            let shown = if negative { -c.clone() } else { c.clone() };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_empty() {
                write!(f, "{}", fmt_rational(&shown))?;
            } else {
                write!(f, "{}*{}", fmt_rational(&shown), monomial_string(m))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for KappaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "KappaPoly[g={}, n={}]({})",
            self.genus, self.markings, self
        )
    }
}

fn monomial_string(m: &Partition) -> String {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &a in m.parts() {
        *counts.entry(a).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(a, e)| {
            if e == 1 {
                format!("k{a}")
            } else {
                format!("k{a}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Polynomial in κ classes and the ψ classes of the markings still to be forgotten.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MixedPoly {
    /// `2g - 2 + n` of the space reached after forgetting every extra marking.
    base_chi: Rational,
    extra: usize,
    terms: BTreeMap<(Partition, Vec<u32>), Rational>,
}

impl MixedPoly {
    pub(crate) fn new(base_chi: Rational, extra: usize) -> Self {
        MixedPoly {
            base_chi,
            extra,
            terms: BTreeMap::new(),
        }
    }

    pub(crate) fn add(&mut self, kappa: Partition, psi: Vec<u32>, c: Rational) {
        assert_eq!(psi.len(), self.extra);
        if c.is_zero() {
            return;
        }
        let key = (kappa, psi);
        let slot = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Pushes forward along forgetting the last extra marking.
    pub(crate) fn forget_one(&self) -> MixedPoly {
        assert!(self.extra > 0, "no marking left to forget");
        let r = self.extra;
        // κ_0 on the target, which still carries r - 1 extra markings
        let kappa0 = &self.base_chi + Rational::from_integer(BigInt::from(r as i64 - 1));
        let mut out = MixedPoly::new(self.base_chi.clone(), r - 1);
        for ((kappa, psi), c) in &self.terms {
            let t0 = psi[r - 1];
            let head = &psi[..r - 1];
            let parts = kappa.parts();
            for mask in 0u32..(1u32 << parts.len()) {
                let mut t = t0;
                let mut kept = Vec::with_capacity(parts.len() + 1);
                for (i, &a) in parts.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        t += a;
                    } else {
                        kept.push(a);
                    }
                }
                if t >= 2 {
                    kept.push(t - 1);
                    out.add(Partition::new(kept), head.to_vec(), c.clone());
                } else if t == 1 {
                    out.add(Partition::new(kept), head.to_vec(), c * &kappa0);
                } else {
                    for j in 0..r - 1 {
                        if head[j] > 0 {
                            let mut lowered = head.to_vec();
                            lowered[j] -= 1;
                            out.add(kappa.clone(), lowered, c.clone());
                        }
                    }
                }
            }
        }
        out
    }

    pub(crate) fn forget_all(self) -> BTreeMap<Partition, Rational> {
        let mut cur = self;
        while cur.extra > 0 {
            cur = cur.forget_one();
        }
        cur.terms.into_iter().map(|((k, _), c)| (k, c)).collect()
    }
}

fn chi(genus: u32, markings: u32) -> Result<Rational> {
    let c = 2 * genus as i64 - 2 + markings as i64;
    if c <= 0 {
        return Err(Error::Unstable { genus, markings });
    }
    Ok(Rational::from_integer(BigInt::from(c)))
}

/// Pushforward of `prod ψ_{n+i}^{exps_i}` forgetting the extra markings, last first.
pub(crate) fn pushforward_psi_monomial(
    base_chi: &Rational,
    exps: &[u32],
) -> BTreeMap<Partition, Rational> {
    let mut m = MixedPoly::new(base_chi.clone(), exps.len());
    m.add(Partition::empty(), exps.to_vec(), Rational::one());
    m.forget_all()
}

/// `ψ(p)` on `M_{g,n}`.
pub fn psi_class(p: &Partition, genus: u32, markings: u32) -> Result<KappaPoly> {
    let c = chi(genus, markings)?;
    let exps: Vec<u32> = p.parts().iter().map(|a| a + 1).collect();
    Ok(KappaPoly::from_terms(
        genus,
        markings,
        pushforward_psi_monomial(&c, &exps),
    ))
}

/// `ψ(p)` via the permutation formula: a sum over `σ` in `S_m` of one `κ` per cycle,
/// indexed by the sum of the parts in that cycle.
pub fn psi_class_oracle(p: &Partition, genus: u32, markings: u32) -> KappaPoly {
    let parts = p.parts();
    let m = parts.len();
    let mut terms: BTreeMap<Partition, Rational> = BTreeMap::new();
    let mut perm: Vec<usize> = (0..m).collect();
    loop {
        let mut seen = vec![false; m];
        let mut mono = Vec::new();
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut total = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                total += parts[i];
                i = perm[i];
            }
            mono.push(total);
        }
        *terms
            .entry(Partition::new(mono))
            .or_insert_with(Rational::zero) += Rational::one();
        if !next_permutation(&mut perm) {
            break;
        }
    }
    KappaPoly::from_terms(genus, markings, terms)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n)
        .rev()
        .find(|&j| v[j] > v[i])
        .expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Exponent vectors `a` of length `len` with `sum(a) = total`.
pub(crate) fn exponent_vectors(total: u32, len: usize) -> Vec<Vec<u32>> {
    fn go(rest: u32, len: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if len == 0 {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for a in 0..=rest {
            cur.push(a);
            go(rest - a, len - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, len, &mut Vec::new(), &mut out);
    out
}

fn bracket_terms(p: &Partition, degree: i64, base_chi: &Rational) -> BTreeMap<Partition, Rational> {
    if degree < 0 {
        return BTreeMap::new();
    }
    let parts = p.parts();
    let mut m = MixedPoly::new(base_chi.clone(), parts.len());
    for a in exponent_vectors(degree as u32 + parts.len() as u32, parts.len()) {
        let weight: BigInt = parts
            .iter()
            .zip(&a)
            .map(|(&pi, &ai)| BigInt::from(pi).pow(ai))
            .product();
        m.add(Partition::empty(), a, Rational::from_integer(weight));
    }
    m.forget_all()
}

/// `<p>^j_{g,n}`, the degree `j` part of the bracket class.
pub fn bracket(p: &Partition, degree: i64, genus: u32, markings: u32) -> Result<KappaPoly> {
    let c = chi(genus, markings)?;
    Ok(KappaPoly::from_terms(
        genus,
        markings,
        bracket_terms(p, degree, &c),
    ))
}

/// Element of the formal space `Ψ(d)` freely generated by `P(d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalExpr {
    degree: u32,
    coeffs: BTreeMap<Partition, Rational>,
}

impl FormalExpr {
    pub fn zero(degree: u32) -> Self {
        FormalExpr {
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn unit(p: Partition) -> Self {
        let mut out = FormalExpr::zero(p.sum());
        out.coeffs.insert(p, Rational::one());
        out
    }

    pub fn from_terms(
        degree: u32,
        terms: impl IntoIterator<Item = (Partition, Rational)>,
    ) -> Result<Self> {
        let mut out = FormalExpr::zero(degree);
        for (p, c) in terms {
            out.add_term(p, c)?;
        }
        Ok(out)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &BTreeMap<Partition, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, p: &Partition) -> Rational {
        self.coeffs.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, p: Partition, c: Rational) -> Result<()> {
        if p.sum() != self.degree {
            return Err(Error::DimensionMismatch(format!(
                "{p} is not a partition of {}",
                self.degree
            )));
        }
        if c.is_zero() {
            return Ok(());
        }
        let slot = self.coeffs.entry(p.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&p);
        }
        Ok(())
    }

    pub fn add(&self, other: &FormalExpr) -> Result<FormalExpr> {
        let mut out = self.clone();
        for (p, c) in &other.coeffs {
            out.add_term(p.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> FormalExpr {
        let mut out = FormalExpr::zero(self.degree);
        for (p, v) in &self.coeffs {
            out.add_term(p.clone(), v * c).expect("same degree");
        }
        out
    }

    /// Dense coordinates over `P(d)` in partition order.
    pub fn coordinates(&self) -> Vec<Rational> {
        enumerate(self.degree)
            .iter()
            .map(|p| self.coeff(p))
            .collect()
    }
}

/// Applies the basis map `ψ_{g,n}`, `κ_{g,n}` or `<>_{g,n}` to a formal expression.
pub fn evaluate_formal(
    phi: &FormalExpr,
    via: Basis,
    genus: u32,
    markings: u32,
) -> Result<KappaPoly> {
    let c = chi(genus, markings)?;
    let mut out = KappaPoly::zero(genus, markings);
    for (p, coeff) in &phi.coeffs {
        let terms = match via {
            Basis::Kappa => BTreeMap::from([(p.clone(), Rational::one())]),
            Basis::Psi => {
                let exps: Vec<u32> = p.parts().iter().map(|a| a + 1).collect();
                pushforward_psi_monomial(&c, &exps)
            }
            Basis::Bracket => bracket_terms(p, phi.degree as i64, &c),
        };
        for (m, v) in terms {
            out.add_term(m, v * coeff);
        }
    }
    Ok(out)
}

/// Matrix expressing each class of the `from` basis in κ-monomials.
///
/// Rows are κ-monomials, columns are source labels, both over `P(d)` in
/// partition order. `c0` is `2g - 2 + n`; the ψ and κ matrices ignore it.
pub fn change_basis(d: u32, from: Basis, c0: &Rational) -> LabeledMatrix<Partition> {
    let labels = enumerate(d);
    let columns: Vec<BTreeMap<Partition, Rational>> = labels
        .iter()
        .map(|p| match from {
            Basis::Kappa => BTreeMap::from([(p.clone(), Rational::one())]),
            Basis::Psi => {
                let exps: Vec<u32> = p.parts().iter().map(|a| a + 1).collect();
                pushforward_psi_monomial(c0, &exps)
            }
            Basis::Bracket => bracket_terms(p, d as i64, c0),
        })
        .collect();
    let mut entries = Vec::with_capacity(labels.len() * labels.len());
    for m in &labels {
        for col in &columns {
            entries.push(col.get(m).cloned().unwrap_or_else(Rational::zero));
        }
    }
    LabeledMatrix::from_entries(labels.clone(), labels, entries).expect("square over P(d)")
}

/// `P_d`, memoized: it does not depend on the ambient space.
fn psi_to_kappa(d: u32) -> Arc<LabeledMatrix<Partition>> {
    static MEMO: OnceLock<RwLock<HashMap<u32, Arc<LabeledMatrix<Partition>>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(m) = memo.read().get(&d) {
        return m.clone();
    }
    let m = Arc::new(change_basis(d, Basis::Psi, &Rational::one()));
    memo.write().insert(d, m.clone());
    m
}

/// Rewrites a homogeneous degree-`d` κ-polynomial in the ψ basis.
pub fn to_psi_basis(poly: &KappaPoly, d: u32) -> Result<FormalExpr> {
    if !poly.is_homogeneous(d) {
        return Err(Error::DimensionMismatch(format!(
            "polynomial is not homogeneous of degree {d}"
        )));
    }
    let pd = psi_to_kappa(d);
    let x = pd.solve(&poly.coordinates(d))?;
    FormalExpr::from_terms(d, enumerate(d).into_iter().zip(x))
}

/// Rewrites a formal expression given in `basis` as a formal expression in the ψ basis.
///
/// `c0 = 2g - 2 + n` only matters for the bracket basis.
pub fn formal_to_psi(phi: &FormalExpr, basis: Basis, c0: &Rational) -> Result<FormalExpr> {
    if basis == Basis::Psi {
        return Ok(phi.clone());
    }
    let d = phi.degree;
    let to_kappa = change_basis(d, basis, c0);
    let kappa_coords = to_kappa.mul_vec(&phi.coordinates());
    let x = psi_to_kappa(d).solve(&kappa_coords)?;
    FormalExpr::from_terms(d, enumerate(d).into_iter().zip(x))
}
