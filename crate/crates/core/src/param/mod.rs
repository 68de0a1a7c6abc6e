//! Tuples of squarefree integers indexed by group elements and the
//! characters assembled from them.

use std::collections::BTreeMap;

use crate::group::LGroup;
use crate::{Error, Result};

mod solve;
pub use solve::{
    reciprocity_audit, solve, CubicCache, EpiData, Obstruction, Verdict,
};

/// One tuple entry: a squarefree integer and its odd prime factors. A factor
/// of 2 or -1 is reflected in `value` but not listed in `primes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleEntry {
    pub value: i64,
    pub primes: Vec<u64>,
    pub has_two: bool,
}

/// The input data: one squarefree integer per nonidentity element, pairwise
/// coprime, at most one negative. Entry k belongs to element k+1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredTuple {
    pub l: u8,
    pub entries: Vec<TupleEntry>,
}

fn factor_squarefree(v: i64) -> Result<(Vec<u64>, bool)> {
    if v == 0 {
        return Err(Error::Invalid("tuple entries must be nonzero".into()));
    }
    let mut n = v.unsigned_abs();
    let mut has_two = false;
    if n % 2 == 0 {
        n /= 2;
        has_two = true;
        if n % 2 == 0 {
            return Err(Error::Invalid(format!("{v} is not squarefree")));
        }
    }
    let mut primes = Vec::new();
    let mut p = 3u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return Err(Error::Invalid(format!("{v} is not squarefree")));
            }
            primes.push(p);
        }
        p += 2;
    }
    if n > 1 {
        primes.push(n);
    }
    Ok((primes, has_two))
}

impl FactoredTuple {
    pub fn new(l: u8, values: &[i64]) -> Result<Self> {
        let mut entries = Vec::with_capacity(values.len());
        let mut negatives = 0usize;
        let mut twos = 0usize;
        let mut all_primes = Vec::new();
        for &v in values {
            let (primes, has_two) = factor_squarefree(v)?;
            if v < 0 {
                negatives += 1;
            }
            if has_two {
                twos += 1;
            }
            if l != 2 {
                if v < 0 || has_two {
                    return Err(Error::Invalid(
                        "entries must be positive and odd for odd fiber order".into(),
                    ));
                }
                if let Some(&p) = primes.iter().find(|&&p| p % l as u64 != 1) {
                    return Err(Error::Invalid(format!(
                        "prime {p} is not 1 mod {l}"
                    )));
                }
            }
            all_primes.extend(primes.iter().copied());
            entries.push(TupleEntry { value: v, primes, has_two });
        }
        if negatives > 1 {
            return Err(Error::Invalid("at most one entry may be negative".into()));
        }
        if twos > 1 {
            return Err(Error::Invalid("at most one entry may be even".into()));
        }
        all_primes.sort_unstable();
        if all_primes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("entries must be pairwise coprime".into()));
        }
        Ok(FactoredTuple { l, entries })
    }

    pub fn values(&self) -> Vec<i64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// All odd primes of the tuple with the element each one is attached to.
    pub fn ramified_primes(&self) -> Vec<(u64, usize)> {
        let mut out = Vec::new();
        for (k, e) in self.entries.iter().enumerate() {
            for &p in &e.primes {
                out.push((p, k + 1));
            }
        }
        out.sort_unstable();
        out
    }

    /// The element carrying the factor 2, if any.
    pub fn two_element(&self) -> Option<usize> {
        self.entries.iter().position(|e| e.has_two).map(|k| k + 1)
    }

    /// The element carrying the sign, if any.
    pub fn sign_element(&self) -> Option<usize> {
        self.entries.iter().position(|e| e.value < 0).map(|k| k + 1)
    }
}

/// A coordinate character: sign part, 2 part, and odd primes with exponents
/// in 1..l. For odd l the sign and 2 parts stay false.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssembledChar {
    pub neg: bool,
    pub two: bool,
    pub odd: BTreeMap<u64, u8>,
}

impl AssembledChar {
    pub fn is_trivial(&self) -> bool {
        !self.neg && !self.two && self.odd.is_empty()
    }

    /// Signed squarefree integer representing the character; only meaningful
    /// for l = 2 where all exponents are 1.
    pub fn value_i128(&self) -> i128 {
        let mut v: i128 = if self.neg { -1 } else { 1 };
        if self.two {
            v *= 2;
        }
        for &p in self.odd.keys() {
            v *= p as i128;
        }
        v
    }

    fn odd_product_mod(&self, m: u64) -> u64 {
        self.odd.keys().fold(1 % m, |acc, &p| acc * (p % m) % m)
    }

    /// Whether the represented integer is 1 mod 4 (so the character is
    /// unramified at 2).
    pub fn is_one_mod4(&self) -> bool {
        !self.two && (self.neg == (self.odd_product_mod(4) == 3))
    }

    /// Exponent vector over labelled basis characters: 0 is the sign, 1 is
    /// the prime 2, an odd prime is itself.
    pub fn label_vec(&self) -> BTreeMap<u64, u8> {
        let mut v = BTreeMap::new();
        if self.neg {
            v.insert(0, 1);
        }
        if self.two {
            v.insert(1, 1);
        }
        for (&p, &e) in &self.odd {
            v.insert(p, e);
        }
        v
    }
}

/// The r coordinate characters of a tuple; index j-1 holds coordinate j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coordinates {
    pub l: u8,
    pub chars: Vec<AssembledChar>,
}

/// Multiplies out the coordinate characters w_j = prod_g v_g^(digit_j(g)).
pub fn assemble(group: &LGroup, tuple: &FactoredTuple) -> Result<Coordinates> {
    if tuple.l != group.l {
        return Err(Error::Invalid("tuple and group fiber orders differ".into()));
    }
    if tuple.entries.len() != group.order - 1 {
        return Err(Error::Invalid(format!(
            "expected {} entries, got {}",
            group.order - 1,
            tuple.entries.len()
        )));
    }
    let l = group.l;
    let mut chars = Vec::with_capacity(group.r as usize);
    for j in 1..=group.r {
        let mut c = AssembledChar::default();
        for g in 1..group.order {
            let d = group.digit(g, j);
            if d == 0 {
                continue;
            }
            let e = &tuple.entries[g - 1];
            if e.value < 0 && d % 2 == 1 {
                c.neg = !c.neg;
            }
            if e.has_two && d % 2 == 1 {
                c.two = !c.two;
            }
            for &p in &e.primes {
                let slot = c.odd.entry(p).or_insert(0);
                *slot = (*slot + d) % l;
                if *slot == 0 {
                    c.odd.remove(&p);
                }
            }
        }
        chars.push(c);
    }
    Ok(Coordinates { l, chars })
}

/// Rebuilds the canonical tuple from coordinate characters: each prime goes
/// to the element given by its exponent digits, the sign and the factor 2
/// likewise.
pub fn disassemble(group: &LGroup, coords: &Coordinates) -> Result<FactoredTuple> {
    if coords.l != group.l {
        return Err(Error::Invalid("coordinate and group fiber orders differ".into()));
    }
    if coords.chars.len() != group.r as usize {
        return Err(Error::Invalid("wrong number of coordinates".into()));
    }
    let l = group.l as usize;
    let mut values = vec![1i64; group.order - 1];
    let mut primes_of = vec![Vec::new(); group.order - 1];
    let mut twos = vec![false; group.order - 1];
    let mut support: Vec<u64> = coords
        .chars
        .iter()
        .flat_map(|c| c.odd.keys().copied())
        .collect();
    support.sort_unstable();
    support.dedup();
    for p in support {
        let mut g = 0usize;
        let mut base = 1usize;
        for c in &coords.chars {
            g += *c.odd.get(&p).unwrap_or(&0) as usize * base;
            base *= l;
        }
        if g == 0 {
            return Err(Error::Invalid(format!("prime {p} has a trivial digit vector")));
        }
        primes_of[g - 1].push(p);
    }
    let sign_elem: usize = coords
        .chars
        .iter()
        .enumerate()
        .map(|(j, c)| (c.neg as usize) * l.pow(j as u32))
        .sum();
    let two_elem: usize = coords
        .chars
        .iter()
        .enumerate()
        .map(|(j, c)| (c.two as usize) * l.pow(j as u32))
        .sum();
    for (k, ps) in primes_of.iter().enumerate() {
        let mut v: i64 = 1;
        for &p in ps {
            v = v
                .checked_mul(p as i64)
                .ok_or_else(|| Error::TooLarge("tuple entry overflows".into()))?;
        }
        values[k] = v;
    }
    if two_elem != 0 {
        values[two_elem - 1] *= 2;
        twos[two_elem - 1] = true;
    }
    if sign_elem != 0 {
        values[sign_elem - 1] = -values[sign_elem - 1];
    }
    let entries = values
        .into_iter()
        .enumerate()
        .map(|(k, value)| TupleEntry {
            value,
            primes: std::mem::take(&mut primes_of[k]),
            has_two: twos[k],
        })
        .collect();
    Ok(FactoredTuple { l: group.l, entries })
}
