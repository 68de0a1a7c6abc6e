//! Direct products of l-groups over distinct primes, the shape of a general
//! finite nilpotent group.

use crate::group::{Constants, LGroup};
use crate::{Error, Result};

/// Product of tower groups with pairwise distinct fiber primes, ordered by
/// increasing l. Elements are mixed-radix indices over the factor orders,
/// least significant factor first.
pub struct NilpotentGroup {
    pub factors: Vec<LGroup>,
    pub order: u64,
}

impl NilpotentGroup {
    pub fn new(factors: Vec<LGroup>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Invalid("empty factor list".into()));
        }
        for w in factors.windows(2) {
            if w[0].l >= w[1].l {
                return Err(Error::Invalid(
                    "factors must have strictly increasing fiber primes".into(),
                ));
            }
        }
        let mut order = 1u64;
        for f in &factors {
            order = order
                .checked_mul(f.order as u64)
                .ok_or_else(|| Error::TooLarge("product order overflows".into()))?;
        }
        Ok(NilpotentGroup { factors, order })
    }

    /// Splits a product index into factor indices.
    pub fn split(&self, mut e: u64) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            out.push((e % f.order as u64) as usize);
            e /= f.order as u64;
        }
        out
    }

    pub fn join(&self, parts: &[usize]) -> u64 {
        let mut e = 0u64;
        for (f, &p) in self.factors.iter().zip(parts).rev() {
            e = e * f.order as u64 + p as u64;
        }
        e
    }

    pub fn elem_order(&self, e: u64) -> u64 {
        self.split(e)
            .iter()
            .zip(&self.factors)
            .map(|(&p, f)| f.elem_order(p) as u64)
            .product()
    }

    pub fn disc_exponent(&self, e: u64) -> u64 {
        debug_assert!(e != 0);
        self.order - self.order / self.elem_order(e)
    }

    /// Smallest prime dividing the order.
    pub fn l_min(&self) -> u8 {
        self.factors[0].l
    }

    /// Counting constants over Q; the locus lives in the factor of the
    /// smallest prime.
    pub fn constants(&self) -> Result<Constants> {
        let f0 = &self.factors[0];
        let base = f0.constants()?;
        let l = f0.l as u64;
        let mut a_num = l;
        let mut a_den = (l - 1) * self.order;
        let g = gcd(a_num, a_den);
        a_num /= g;
        a_den /= g;
        Ok(Constants { a_num, a_den, b: base.b, i: base.i, d: base.d })
    }

    /// Class count of the class of e, used for heuristic weights.
    pub fn class_size(&self, e: u64) -> u64 {
        self.split(e)
            .iter()
            .zip(&self.factors)
            .map(|(&p, f)| f.class_of(p).len() as u64)
            .product()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{CocycleTable, CocycleTower};

    fn c2() -> LGroup {
        let t = CocycleTable::from_fn(2, 1, |_, _| 0).unwrap();
        LGroup::from_tower(CocycleTower::new(2, vec![t]).unwrap()).unwrap()
    }

    fn c3() -> LGroup {
        let t = CocycleTable::from_fn(3, 1, |_, _| 0).unwrap();
        LGroup::from_tower(CocycleTower::new(3, vec![t]).unwrap()).unwrap()
    }

    #[test]
    fn c6_product() {
        let g = NilpotentGroup::new(vec![c2(), c3()]).unwrap();
        assert_eq!(g.order, 6);
        let orders: Vec<u64> = (0..6).map(|e| g.elem_order(e)).collect();
        assert_eq!(orders, vec![1, 2, 3, 6, 3, 6]);
        let c = g.constants().unwrap();
        assert_eq!((c.a_num, c.a_den), (1, 3));
        assert_eq!((c.b, c.i, c.d), (1, 1, 1));
        assert_eq!(g.disc_exponent(1), 3);
        assert_eq!(g.disc_exponent(2), 4);
        assert_eq!(g.disc_exponent(3), 5);
    }

    #[test]
    fn ordering_enforced() {
        assert!(NilpotentGroup::new(vec![c3(), c2()]).is_err());
        assert!(NilpotentGroup::new(vec![c2(), c2()]).is_err());
    }

    #[test]
    fn split_join_roundtrip() {
        let g = NilpotentGroup::new(vec![c2(), c3()]).unwrap();
        for e in 0..6 {
            assert_eq!(g.join(&g.split(e)), e);
        }
    }
}
