//! Integer partitions and compositions.
//!
//! A [`Partition`] stores its parts weakly decreasing. Partitions of the same
//! integer are totally ordered by [`Partition::order_key`]: more parts sort
//! first, ties broken lexicographically. Since merging parts strictly shortens
//! a partition, this order extends the refinement order.

use std::cmp::Reverse;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Canonicalizes `parts`: zero parts are dropped, the rest sorted decreasing.
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// The integer partitioned, `d(p)`.
    pub fn sum(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of parts, `|p|`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order_key(&self) -> (Reverse<usize>, &[u32]) {
        (Reverse(self.0.len()), &self.0)
    }

    /// Number of parts strictly larger than `i`.
    pub fn count_above(&self, i: u32) -> usize {
        self.0.iter().filter(|&&p| p > i).count()
    }

    /// Product of factorials of part multiplicities.
    pub fn aut(&self) -> BigInt {
        let mut out = BigInt::one();
        let mut i = 0;
        while i < self.0.len() {
            let j = i + self.0[i..].iter().take_while(|&&p| p == self.0[i]).count();
            out *= factorial(j - i);
            i = j;
        }
        out
    }

    /// `p^-`: drop the parts equal to one and lower every other part by one.
    pub fn minus(&self) -> Partition {
        Partition(self.0.iter().filter(|&&p| p > 1).map(|p| p - 1).collect())
    }

    /// `p[l]`: append `l` parts equal to one.
    pub fn pad(&self, l: u32) -> Partition {
        let mut parts = self.0.clone();
        parts.extend(std::iter::repeat_n(1, l as usize));
        Partition(parts)
    }

    /// `p̂`: raise every part by one, then pad with ones up to `sum(p)` parts.
    pub fn hat(&self) -> Partition {
        let raised = Partition(self.0.iter().map(|p| p + 1).collect());
        raised.pad(self.sum() - self.len() as u32)
    }

    /// Multiset union of the parts.
    pub fn union(&self, other: &Partition) -> Partition {
        let mut parts = self.0.clone();
        parts.extend_from_slice(&other.0);
        Partition::new(parts)
    }

    /// Whether `other` is obtained from `self` by grouping parts and summing each group.
    pub fn refines(&self, other: &Partition) -> bool {
        if self.sum() != other.sum() || self.len() < other.len() {
            return false;
        }
        let mut memo = HashMap::new();
        fill_bins(&self.0, 0, other.0.clone(), &mut memo)
    }
}

/// Places `parts[idx..]` into bins with the given remaining capacities.
fn fill_bins(
    parts: &[u32],
    idx: usize,
    caps: Vec<u32>,
    memo: &mut HashMap<(usize, Vec<u32>), bool>,
) -> bool {
    if idx == parts.len() {
        return caps.iter().all(|&c| c == 0);
    }
    let key = (idx, caps);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let caps = &key.1;
    let p = parts[idx];
    let mut found = false;
    for j in 0..caps.len() {
        // bins with equal remaining capacity are interchangeable
        if caps[j] < p || caps[..j].contains(&caps[j]) {
            continue;
        }
        let mut next = caps.clone();
        next[j] -= p;
        next.sort_unstable_by(|a, b| b.cmp(a));
        if fill_bins(parts, idx + 1, next, memo) {
            found = true;
            break;
        }
    }
    memo.insert(key, found);
    found
}

impl Ord for Partition {
    /// Orders by total first, then by [`Partition::order_key`].
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sum()
            .cmp(&other.sum())
            .then_with(|| self.order_key().cmp(&other.order_key()))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `3,1,1`, `(3,1,1)`, or the empty string.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(s)
            .trim();
        if s.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = s
            .split(',')
            .map(|x| match x.trim().parse::<u32>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(Error::Parse(format!(
                    "invalid partition part `{}`",
                    x.trim()
                ))),
            })
            .collect::<Result<Vec<u32>>>()?;
        Ok(Partition::new(parts))
    }
}

impl From<&[u32]> for Partition {
    fn from(parts: &[u32]) -> Self {
        Partition::new(parts.to_vec())
    }
}

/// An ordered sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition(Vec<u32>);

impl Composition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::Precondition(
                "composition parts must be positive".into(),
            ));
        }
        Ok(Composition(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn sum(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn to_partition(&self) -> Partition {
        Partition::new(self.0.clone())
    }

    /// `l! / prod(m_i!)` where `l` is the sum.
    pub fn multinomial(&self) -> BigInt {
        let denom: BigInt = self.0.iter().map(|&m| factorial(m as usize)).product();
        factorial(self.sum() as usize) / denom
    }
}

/// All partitions of `d` in increasing [`Partition::order_key`] order.
pub fn enumerate(d: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    gen_partitions(d, d, &mut cur, &mut out);
    out.sort();
    out
}

fn gen_partitions(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition(cur.clone()));
        return;
    }
    for p in (1..=max.min(rest)).rev() {
        cur.push(p);
        gen_partitions(rest - p, p, cur, out);
        cur.pop();
    }
}

/// `P_i(d,k)`: partitions of `d` with at most `k` parts exceeding `i`.
pub fn enumerate_bounded(d: u32, i: u32, k: usize) -> Vec<Partition> {
    enumerate(d)
        .into_iter()
        .filter(|p| p.count_above(i) <= k)
        .collect()
}

/// `P(d,k)`: partitions of `d` with at most `k` parts.
pub fn enumerate_at_most(d: u32, k: usize) -> Vec<Partition> {
    enumerate_bounded(d, 0, k)
}

/// `P(d;k)`: partitions of `d` with exactly `k` parts.
pub fn enumerate_exact_len(d: u32, k: usize) -> Vec<Partition> {
    enumerate(d).into_iter().filter(|p| p.len() == k).collect()
}

/// All compositions of `l` (there are `2^(l-1)` of them), coarsest first.
pub fn compositions(l: u32) -> Vec<Composition> {
    fn go(rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Composition>) {
        if rest == 0 {
            out.push(Composition(cur.clone()));
            return;
        }
        for first in (1..=rest).rev() {
            cur.push(first);
            go(rest - first, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if l > 0 {
        go(l, &mut Vec::new(), &mut out);
    }
    out
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}
