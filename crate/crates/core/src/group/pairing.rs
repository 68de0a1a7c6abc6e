//! Commutator pairings against the fiber of a tower level, the associated
//! refined centralizers, and break levels controlling conjugacy class sizes.

use crate::group::LGroup;
use crate::{Error, Result};

/// Centralizer data of h0 at level i-1 refined by the level-i commutator
/// pairing. `index` is #centralizer / #kernel and is always 1 or l.
#[derive(Debug, Clone)]
pub struct TildeCentralizer {
    pub level: u32,
    pub h0: usize,
    pub centralizer: Vec<u16>,
    pub kernel: Vec<u16>,
    pub index: u8,
}

/// Fiber digit of the commutator of zero-digit lifts of x and h0 into the
/// level-i group. Requires x to centralize h0 at level i-1.
pub fn commutator_pairing(g: &LGroup, level: u32, h0: usize, x: usize) -> Result<u8> {
    if level < 2 || level > g.r {
        return Err(Error::Invalid(format!("pairing level {level} out of range")));
    }
    let base = g.level_order(level - 1);
    if h0 >= base || x >= base {
        return Err(Error::Invalid("pairing arguments not at the base level".into()));
    }
    if g.mul(x, h0) % base != g.mul(h0, x) % base {
        return Err(Error::NotInCentralizer { x, h: h0 });
    }
    // zero-digit lifts are the same indices read one level up
    let lev = g.level_order(level);
    let c = g.mul(g.mul(x, h0), g.inv_level(g.mul(h0, x) % lev, level)) % lev;
    debug_assert_eq!(c % base, 0, "commutator must land in the fiber");
    Ok(g.digit(c, level))
}

impl LGroup {
    /// Inverse within the level quotient.
    pub fn inv_level(&self, a: usize, level: u32) -> usize {
        let m = self.level_order(level);
        debug_assert!(a < m);
        let mut x = a;
        let mut prev = 0usize;
        while x != 0 {
            prev = x;
            x = self.mul(x, a) % m;
            if x == a {
                break;
            }
        }
        if a == 0 {
            0
        } else {
            prev
        }
    }
}

/// Kernel-vs-centralizer census of the level-i pairing against h0.
pub fn tilde_centralizer(g: &LGroup, level: u32, h0: usize) -> Result<TildeCentralizer> {
    let base = g.level_order(level - 1);
    if h0 >= base {
        return Err(Error::Invalid("h0 not at the base level".into()));
    }
    let mut centralizer = Vec::new();
    let mut kernel = Vec::new();
    for x in 0..base {
        if g.mul(x, h0) % base != g.mul(h0, x) % base {
            continue;
        }
        centralizer.push(x as u16);
        if commutator_pairing(g, level, h0, x)? == 0 {
            kernel.push(x as u16);
        }
    }
    let index = centralizer.len() / kernel.len();
    if index != 1 && index != g.l as usize {
        return Err(Error::Invalid(format!(
            "pairing kernel has index {index}, expected 1 or {}",
            g.l
        )));
    }
    Ok(TildeCentralizer { level, h0, centralizer, kernel, index: index as u8 })
}

/// True when some level-i lift of h has the same order as h at level i-1.
pub fn is_theta_stable(g: &LGroup, level: u32, h: usize) -> bool {
    let base = g.level_order(level - 1);
    assert!(h < base);
    let target = g.elem_order_level(h, level - 1);
    (0..g.l as usize)
        .any(|a| g.elem_order_level(h + a * base, level) == target)
}

/// Levels i >= 2 at which the class of the projection of g grows: the
/// level-i pairing is nonzero somewhere on the centralizer of the projection.
pub fn break_levels(g: &LGroup, e: usize) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for level in 2..=g.r {
        let h0 = g.proj(e, level - 1);
        let tc = tilde_centralizer(g, level, h0)?;
        if tc.index != 1 {
            out.push(level);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{CocycleTable, CocycleTower};

    fn d4() -> LGroup {
        let t1 = CocycleTable::from_fn(2, 1, |_, _| 0).unwrap();
        let t2 = CocycleTable::from_fn(2, 2, |_, _| 0).unwrap();
        // theta((a,b),(a',b')) = a a' + a' b builds D4 on V4
        let t3 = CocycleTable::from_fn(2, 4, |g, h| {
            let (a, b) = (g & 1, (g >> 1) & 1);
            let a1 = h & 1;
            ((a * a1 + a1 * b) % 2) as u8
        })
        .unwrap();
        LGroup::from_tower(CocycleTower::new(2, vec![t1, t2, t3]).unwrap()).unwrap()
    }

    #[test]
    fn d4_census() {
        let g = d4();
        assert_eq!(g.order, 8);
        assert!(!g.is_abelian());
        assert_eq!(g.exponent(), 4);
        // r = index 1 has order 4, s = index 2 has order 2, z = index 4 central
        assert_eq!(g.elem_order(1), 4);
        assert_eq!(g.elem_order(2), 2);
        assert_eq!(g.elem_order(4), 2);
        assert_eq!(g.involution_locus().len(), 5);
        assert_eq!(g.involution_subspace_rank(), None);
        let sizes: Vec<usize> = g.classes().iter().map(|c| c.len()).collect();
        let mut sorted = sizes.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 1, 2, 2, 2]);
        assert_eq!(g.classes_in_locus().len(), 3);
        let c = g.constants().unwrap();
        assert_eq!((c.b, c.i), (3, 5));
    }

    #[test]
    fn d4_pairing_and_breaks() {
        let g = d4();
        // s = index 2: r does not commute with s in D4 but does at level 2,
        // so the level-3 pairing must be nonzero at x = r-bar = 1
        assert_eq!(commutator_pairing(&g, 3, 2, 1).unwrap(), 1);
        assert_eq!(commutator_pairing(&g, 3, 2, 2).unwrap(), 0);
        let tc = tilde_centralizer(&g, 3, 2).unwrap();
        assert_eq!(tc.index, 2);
        assert_eq!(tc.centralizer.len(), 4);
        assert_eq!(tc.kernel.len(), 2);
        // class sizes match l^breaks for every element
        for e in 0..g.order {
            let b = break_levels(&g, e).unwrap().len() as u32;
            assert_eq!(g.class_of(e).len(), (g.l as usize).pow(b), "e={e}");
        }
    }

    #[test]
    fn pairing_rejects_noncentralizing() {
        let g = d4();
        // at level 2 everything commutes, so use a fake nonabelian level:
        // x = 1 (r) and h0 = 2 (s) do not commute at level 3... but pairing
        // at level 3 takes base-level arguments, which commute. Use the badge
        // from a nonabelian base: level 3 base is V4 (abelian), so instead
        // check the argument-range guard.
        assert!(commutator_pairing(&g, 3, 4, 1).is_err());
        assert!(commutator_pairing(&g, 2, 0, 5).is_err());
    }

    #[test]
    fn theta_stability_dichotomy() {
        let g = d4();
        // r-bar = 1 at level 2 lifts to order-4 elements only (carry at level
        // 3 is trivial for D4 on coordinate 1 alone: r^2 = z), check via orders
        for h in 0..4usize {
            let stable = is_theta_stable(&g, 3, h);
            let orders: Vec<u32> = (0..2)
                .map(|a| g.elem_order_level(h + a * 4, 3))
                .collect();
            let base_ord = g.elem_order_level(h, 2);
            if stable {
                assert!(orders.contains(&base_ord));
            } else {
                assert!(orders.iter().all(|&o| o == g.l as u32 * base_ord));
            }
        }
    }
}
