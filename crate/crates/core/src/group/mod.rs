//! Finite l-groups presented as towers of central F_l extensions, their
//! conjugacy data, and the census quantities entering the counting constants.
//!
//! Elements are indices 0..l^r; the digits of an index in base l are the
//! fiber coordinates, least significant digit first. Truncating an index mod
//! l^j projects onto the level-j quotient, and multiplication at level j is
//! multiplication in the full group followed by truncation.

mod build;
mod cocycle;
mod kluners;
mod nilpotent;
mod pairing;

pub use build::{tower_from_chain, ConcreteGroup};
pub use cocycle::{is_coboundary, CocycleTable, CocycleTower};
pub use kluners::kluners_d;
pub use nilpotent::NilpotentGroup;
pub use pairing::{break_levels, commutator_pairing, is_theta_stable, tilde_centralizer, TildeCentralizer};

use crate::{Error, Result};

/// Elements above this count are rejected; tables are O(order^2).
pub const MAX_ORDER: usize = 4096;

/// A group of order l^r built from a cocycle tower.
pub struct LGroup {
    pub l: u8,
    pub r: u32,
    pub order: usize,
    pub tower: CocycleTower,
    mul: Vec<u16>,
    inv: Vec<u16>,
    ord: Vec<u32>,
    class_id: Vec<u16>,
    classes: Vec<Vec<u16>>,
}

/// Census constants for counting over Q. `a` is a reduced fraction; `b` and
/// `i` already divide out d = [Q(zeta_l) : Q] = l - 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constants {
    pub a_num: u64,
    pub a_den: u64,
    pub b: u64,
    pub i: u64,
    pub d: u64,
}

impl LGroup {
    pub fn from_tower(tower: CocycleTower) -> Result<Self> {
        let l = tower.l as usize;
        let r = tower.depth();
        let mut order = 1usize;
        for _ in 0..r {
            order *= l;
            if order > MAX_ORDER {
                return Err(Error::TooLarge(format!("order exceeds {MAX_ORDER}")));
            }
        }

        // multiplication digit by digit; digit i uses the level-(i-1) cocycle
        let mut mul = vec![0u16; order * order];
        let pow_l: Vec<usize> = (0..=r).map(|i| l.pow(i)).collect();
        for a in 0..order {
            for b in 0..order {
                let mut z = 0usize;
                for i in 1..=r as usize {
                    let ai = (a / pow_l[i - 1]) % l;
                    let bi = (b / pow_l[i - 1]) % l;
                    let theta = tower.tables[i - 1].get(a % pow_l[i - 1], b % pow_l[i - 1]);
                    let zi = (ai + bi + theta as usize) % l;
                    z += zi * pow_l[i - 1];
                }
                mul[a * order + b] = z as u16;
            }
        }

        let s = LGroupRaw { order, mul: &mul };

        // cocycle identities, checked over each level quotient
        for i in 1..=r {
            let lev = pow_l[i as usize - 1];
            tower.tables[i as usize - 1]
                .validate_identity(i, |g, h| s.mul(g, h) % lev)?;
        }
        // triviality rule: nonzero tables must not be coboundaries
        for i in 1..=r {
            let lev = pow_l[i as usize - 1];
            let t = &tower.tables[i as usize - 1];
            if !t.is_zero() && is_coboundary(t, |g, h| s.mul(g, h) % lev).is_some() {
                return Err(Error::SplitLayerNotZero { level: i });
            }
        }

        let mut inv = vec![0u16; order];
        for a in 0..order {
            let b = (0..order)
                .find(|&b| s.mul(a, b) == 0)
                .ok_or_else(|| Error::Invalid("no inverse; not a group".into()))?;
            inv[a] = b as u16;
        }
        let mut ord = vec![0u32; order];
        for a in 1..order {
            let mut x = a;
            let mut k = 1u32;
            while x != 0 {
                x = s.mul(x, a);
                k += 1;
                if x == 0 {
                    break;
                }
            }
            ord[a] = k;
        }
        ord[0] = 1;

        // conjugacy classes
        let mut class_id = vec![u16::MAX; order];
        let mut classes: Vec<Vec<u16>> = Vec::new();
        for a in 0..order {
            if class_id[a] != u16::MAX {
                continue;
            }
            let cid = classes.len() as u16;
            let mut members = Vec::new();
            for g in 0..order {
                let c = s.mul(s.mul(g, a), inv[g] as usize);
                if class_id[c] == u16::MAX {
                    class_id[c] = cid;
                    members.push(c as u16);
                }
            }
            members.sort_unstable();
            classes.push(members);
        }

        Ok(LGroup { l: l as u8, r, order, tower, mul, inv, ord, class_id, classes })
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn elem_order(&self, a: usize) -> u32 {
        self.ord[a]
    }

    /// a^k in the full group.
    pub fn pow(&self, a: usize, mut k: u64) -> usize {
        k %= self.ord[a] as u64;
        let mut acc = 0usize;
        let mut base = a;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    #[inline]
    pub fn level_order(&self, level: u32) -> usize {
        (self.l as usize).pow(level)
    }

    /// Truncation G -> G_level.
    #[inline]
    pub fn proj(&self, e: usize, level: u32) -> usize {
        e % self.level_order(level)
    }

    /// Digit i (1-based) of an element index.
    #[inline]
    pub fn digit(&self, e: usize, i: u32) -> u8 {
        ((e / self.level_order(i - 1)) % self.l as usize) as u8
    }

    pub fn mul_level(&self, a: usize, b: usize, level: u32) -> usize {
        self.mul(a, b) % self.level_order(level)
    }

    pub fn elem_order_level(&self, a: usize, level: u32) -> u32 {
        let m = self.level_order(level);
        debug_assert!(a < m);
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a) % m;
            k += 1;
            if x == a {
                break;
            }
        }
        if a == 0 {
            1
        } else {
            k
        }
    }

    pub fn exponent(&self) -> u32 {
        (0..self.order).map(|a| self.ord[a]).max().unwrap_or(1)
    }

    pub fn is_abelian(&self) -> bool {
        self.is_abelian_level(self.r)
    }

    /// x^e in the level quotient, reducing e by the element order first.
    pub fn pow_level(&self, x: usize, e: u64, level: u32) -> usize {
        let o = self.elem_order_level(x, level) as u64;
        let mut acc = 0usize;
        for _ in 0..(e % o) {
            acc = self.mul_level(acc, x, level);
        }
        acc
    }

    pub fn is_abelian_level(&self, level: u32) -> bool {
        let m = self.level_order(level);
        (0..m).all(|a| (0..a).all(|b| self.mul(a, b) % m == self.mul(b, a) % m))
    }

    pub fn classes(&self) -> &[Vec<u16>] {
        &self.classes
    }

    pub fn class_of(&self, a: usize) -> &[u16] {
        &self.classes[self.class_id[a] as usize]
    }

    pub fn class_index(&self, a: usize) -> usize {
        self.class_id[a] as usize
    }

    pub fn center(&self) -> Vec<u16> {
        (0..self.order)
            .filter(|&a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
            .map(|a| a as u16)
            .collect()
    }

    /// Elements of order exactly l.
    pub fn involution_locus(&self) -> Vec<u16> {
        (1..self.order)
            .filter(|&a| self.ord[a] == self.l as u32)
            .map(|a| a as u16)
            .collect()
    }

    /// log_l of #(locus + id) when that set is an elementary abelian
    /// subgroup, else None.
    pub fn involution_subspace_rank(&self) -> Option<u32> {
        let mut set = vec![false; self.order];
        set[0] = true;
        let mut count = 1usize;
        for &a in &self.involution_locus() {
            set[a as usize] = true;
            count += 1;
        }
        let members: Vec<usize> =
            (0..self.order).filter(|&a| set[a]).collect();
        for &a in &members {
            for &b in &members {
                if !set[self.mul(a, b)] || self.mul(a, b) != self.mul(b, a) {
                    return None;
                }
            }
        }
        let mut rank = 0u32;
        let mut m = 1usize;
        while m < count {
            m *= self.l as usize;
            rank += 1;
        }
        if m == count {
            Some(rank)
        } else {
            None
        }
    }

    /// Conjugacy classes entirely inside the involution locus.
    pub fn classes_in_locus(&self) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&c| {
                let rep = self.classes[c][0] as usize;
                rep != 0 && self.ord[rep] == self.l as u32
            })
            .collect()
    }

    /// Discriminant exponent of a ramified element: #G (1 - 1/ord(g)).
    pub fn disc_exponent(&self, g: usize) -> u64 {
        debug_assert!(g != 0);
        let n = self.order as u64;
        n - n / self.ord[g] as u64
    }

    /// Counting constants over Q. Fails if the power action of (Z/l)^* on
    /// classes in the locus is not free (it always is for l = 2).
    pub fn constants(&self) -> Result<Constants> {
        let d = (self.l - 1) as u64;
        let locus_classes = self.classes_in_locus();
        // orbit check: class(g) -> class(g^t) for t in (Z/l)^*
        for &c in &locus_classes {
            let rep = self.classes[c][0] as usize;
            let mut orbit = std::collections::BTreeSet::new();
            for t in 1..self.l as u64 {
                orbit.insert(self.class_id[self.pow(rep, t)]);
            }
            if orbit.len() as u64 != d {
                return Err(Error::Invalid(format!(
                    "power action not free on locus class of element {rep}"
                )));
            }
        }
        let i_raw = self.involution_locus().len() as u64;
        let b_raw = locus_classes.len() as u64;
        if i_raw % d != 0 || b_raw % d != 0 {
            return Err(Error::Invalid("locus counts not divisible by d".into()));
        }
        let (mut a_num, mut a_den) = (self.l as u64, (self.l as u64 - 1) * self.order as u64);
        let g = gcd(a_num, a_den);
        a_num /= g;
        a_den /= g;
        Ok(Constants { a_num, a_den, b: b_raw / d, i: i_raw / d, d })
    }
}

struct LGroupRaw<'a> {
    order: usize,
    mul: &'a [u16],
}

impl LGroupRaw<'_> {
    #[inline]
    fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
