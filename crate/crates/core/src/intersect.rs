//! Intersection numbers of ψ classes, `<τ_{a_1} ... τ_{a_n}>_g`.
//!
//! Exponent-0 and exponent-1 insertions are removed first with the string
//! and dilaton equations. What remains is reduced with the DVV form of the
//! Virasoro constraints, which lowers either the total exponent or the genus.
//! Results are memoized in a process-wide table that can be persisted to disk.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use parking_lot::RwLock;

use crate::error::{Error, Result};
use crate::exactalg::{parse_rational, Rational};
use crate::partitions::factorial;

/// File name used inside a cache directory.
pub const CACHE_FILE: &str = "tau.cache";

/// A ψ-intersection query in canonical form (exponents sorted descending).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TauQuery {
    genus: u32,
    exponents: Vec<u32>,
}

impl TauQuery {
    pub fn new(genus: u32, mut exponents: Vec<u32>) -> Self {
        exponents.sort_unstable_by(|a, b| b.cmp(a));
        TauQuery { genus, exponents }
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn is_stable(&self) -> bool {
        2 * self.genus as i64 - 2 + self.exponents.len() as i64 > 0
    }

    /// Whether the exponents add up to `3g - 3 + n`.
    pub fn is_dimension_matched(&self) -> bool {
        let total: i64 = self.exponents.iter().map(|&a| a as i64).sum();
        total == 3 * self.genus as i64 - 3 + self.exponents.len() as i64
    }

    fn record(&self, value: &Rational) -> String {
        let exps: Vec<String> = self.exponents.iter().map(u32::to_string).collect();
        format!(
            "{}|{}|{}/{}",
            self.genus,
            exps.join(","),
            value.numer(),
            value.denom()
        )
    }

    fn parse_record(line: &str) -> Result<(TauQuery, Rational)> {
        let bad = || Error::Parse(format!("bad cache record `{line}`"));
        let mut fields = line.split('|');
        let (Some(g), Some(exps), Some(val), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad());
        };
        let genus: u32 = g.parse().map_err(|_| bad())?;
        let exponents = if exps.is_empty() {
            Vec::new()
        } else {
            exps.split(',')
                .map(|x| x.parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        Ok((TauQuery::new(genus, exponents), parse_rational(val)?))
    }
}

/// Memo table of intersection numbers; readers run concurrently, writers are serialized.
#[derive(Default)]
pub struct TauCache {
    map: RwLock<HashMap<TauQuery, Rational>>,
}

impl TauCache {
    pub fn len(&self) -> usize {
        self.map.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.read().is_empty()
    }

    pub fn clear(&self) {
        self.map.write().clear();
    }

    fn get(&self, q: &TauQuery) -> Option<Rational> {
        self.map.read().get(q).cloned()
    }

    fn insert(&self, q: TauQuery, v: Rational) {
        self.map.write().insert(q, v);
    }

    /// Merges records from `dir/tau.cache`; a missing file is not an error.
    pub fn load(&self, dir: &Path) -> Result<usize> {
        let path = dir.join(CACHE_FILE);
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(e.into()),
        };
        let mut loaded = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            loaded.push(TauQuery::parse_record(line.trim())?);
        }
        let n = loaded.len();
        let mut map = self.map.write();
        map.extend(loaded);
        Ok(n)
    }

    /// Writes every memoized value to `dir/tau.cache`, one sorted record per line.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let mut lines: Vec<String> = self.map.read().iter().map(|(q, v)| q.record(v)).collect();
        lines.sort();
        let path = dir.join(CACHE_FILE);
        let tmp = dir.join(format!("{CACHE_FILE}.tmp"));
        {
            let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
            for l in &lines {
                writeln!(f, "{l}")?;
            }
            f.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

/// The process-wide memo table used by [`tau`].
pub fn cache() -> &'static TauCache {
    static CACHE: OnceLock<TauCache> = OnceLock::new();
    CACHE.get_or_init(TauCache::default)
}

/// `<τ_{a_1} ... τ_{a_n}>_g`. Zero when the dimension constraint fails.
pub fn tau(genus: u32, exponents: &[u32]) -> Result<Rational> {
    let q = TauQuery::new(genus, exponents.to_vec());
    tau_query(&q)
}

pub fn tau_query(q: &TauQuery) -> Result<Rational> {
    if q.exponents.is_empty() || !q.is_stable() {
        return Err(Error::Unstable {
            genus: q.genus,
            markings: q.exponents.len() as u32,
        });
    }
    Ok(compute(q.genus, &q.exponents))
}

/// Like [`tau`] but unstable queries evaluate to zero.
fn tau_or_zero(genus: u32, exponents: Vec<u32>) -> Rational {
    if exponents.is_empty() || 2 * genus as i64 - 2 + exponents.len() as i64 <= 0 {
        return Rational::zero();
    }
    let q = TauQuery::new(genus, exponents);
    compute(q.genus, &q.exponents)
}

/// `exps` must be canonical and stable.
fn compute(genus: u32, exps: &[u32]) -> Rational {
    let n = exps.len() as i64;
    let total: i64 = exps.iter().map(|&a| a as i64).sum();
    if total != 3 * genus as i64 - 3 + n {
        return Rational::zero();
    }
    if genus == 0 && n == 3 {
        return Rational::one();
    }
    if genus == 1 && n == 1 {
        return Rational::new(BigInt::one(), BigInt::from(24));
    }
    let q = TauQuery {
        genus,
        exponents: exps.to_vec(),
    };
    if let Some(v) = cache().get(&q) {
        return v;
    }
    let value = if let Some(pos) = exps.iter().rposition(|&a| a == 0) {
        string_equation(genus, exps, pos)
    } else if let Some(pos) = exps.iter().rposition(|&a| a == 1) {
        let mut rest = exps.to_vec();
        rest.remove(pos);
        Rational::from_integer(BigInt::from(2 * genus as i64 - 2 + rest.len() as i64))
            * tau_or_zero(genus, rest)
    } else {
        dvv(genus, exps)
    };
    cache().insert(q, value.clone());
    value
}

/// Removes the insertion at `pos` (exponent 0) and lowers each other positive exponent in turn.
fn string_equation(genus: u32, exps: &[u32], pos: usize) -> Rational {
    let mut rest = exps.to_vec();
    rest.remove(pos);
    let mut sum = Rational::zero();
    for i in 0..rest.len() {
        if rest[i] == 0 || (i > 0 && rest[i] == rest[i - 1]) {
            continue;
        }
        let mult = rest.iter().filter(|&&a| a == rest[i]).count();
        let mut lowered = rest.clone();
        lowered[i] -= 1;
        sum += Rational::from_integer(BigInt::from(mult)) * tau_or_zero(genus, lowered);
    }
    sum
}

fn double_factorial(n: i64) -> BigInt {
    let mut out = BigInt::one();
    let mut k = n;
    while k > 1 {
        out *= k;
        k -= 2;
    }
    out
}

/// DVV recursion on the largest exponent `k + 1` (all exponents are at least 2).
fn dvv(genus: u32, exps: &[u32]) -> Rational {
    let k = exps[0] as i64 - 1;
    let rest = &exps[1..];
    let mut sum = Rational::zero();

    for (j, &dj) in rest.iter().enumerate() {
        let dj = dj as i64;
        let coeff = Rational::new(
            double_factorial(2 * k + 2 * dj + 1),
            double_factorial(2 * dj - 1),
        );
        let mut next = rest.to_vec();
        next[j] = (dj + k) as u32;
        sum += coeff * tau_or_zero(genus, next);
    }

    for r in 0..k {
        let s = k - 1 - r;
        let coeff = Rational::new(
            double_factorial(2 * r + 1) * double_factorial(2 * s + 1),
            BigInt::from(2),
        );
        if genus >= 1 {
            let mut next = vec![r as u32, s as u32];
            next.extend_from_slice(rest);
            sum += &coeff * tau_or_zero(genus - 1, next);
        }
        let m = rest.len();
        for mask in 0u64..(1u64 << m) {
            let (mut left, mut right) = (vec![r as u32], vec![s as u32]);
            for (i, &a) in rest.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    left.push(a);
                } else {
                    right.push(a);
                }
            }
            for g1 in 0..=genus {
                let a = tau_or_zero(g1, left.clone());
                if a.is_zero() {
                    continue;
                }
                sum += &coeff * a * tau_or_zero(genus - g1, right.clone());
            }
        }
    }
    sum / Rational::from_integer(double_factorial(2 * k + 3))
}

/// Closed form `(n-3)! / prod(a_i!)` for genus zero.
pub fn genus0_closed(exponents: &[u32]) -> Result<Rational> {
    let n = exponents.len();
    if n < 3 {
        return Err(Error::Unstable {
            genus: 0,
            markings: n as u32,
        });
    }
    let total: usize = exponents.iter().map(|&a| a as usize).sum();
    if total != n - 3 {
        return Ok(Rational::zero());
    }
    let denom: BigInt = exponents.iter().map(|&a| factorial(a as usize)).product();
    Ok(Rational::new(factorial(n - 3), denom))
}
