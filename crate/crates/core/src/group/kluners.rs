//! Minimal-discriminant-exponent style invariant over chains of normal
//! subgroups with index-2 steps refining the upper central series.
//!
//! Each chain step H > M contributes #(H \ M) when that block contains an
//! involution; the invariant is the minimum total over all such chains.
//! Because every layer of the upper central series is central in the
//! corresponding quotient, all intermediate subgroups are automatically
//! normal and the minimization splits into independent per-layer searches.

use std::collections::HashMap;

use crate::group::LGroup;
use crate::{Error, Result};

type BitSet = [u64; 4];

fn bs_contains(s: &BitSet, e: usize) -> bool {
    s[e >> 6] >> (e & 63) & 1 == 1
}

fn bs_insert(s: &mut BitSet, e: usize) {
    s[e >> 6] |= 1 << (e & 63);
}

fn bs_len(s: &BitSet) -> usize {
    s.iter().map(|w| w.count_ones() as usize).sum()
}

pub fn kluners_d(g: &LGroup) -> Result<u64> {
    if g.l != 2 {
        return Err(Error::Invalid("invariant defined for l = 2 only".into()));
    }
    if g.order > 256 {
        return Err(Error::TooLarge(format!("order {} exceeds 2^8", g.order)));
    }

    // upper central series as bitsets
    let mut series: Vec<BitSet> = Vec::new();
    let mut z: BitSet = [0; 4];
    bs_insert(&mut z, 0);
    series.push(z);
    loop {
        let prev = *series.last().unwrap();
        if bs_len(&prev) == g.order {
            break;
        }
        let mut next: BitSet = [0; 4];
        for x in 0..g.order {
            // x is central mod prev when every commutator [x, y] lies in prev
            let central = (0..g.order).all(|y| {
                let c = g.mul(g.mul(x, y), g.inv(g.mul(y, x)));
                bs_contains(&prev, c)
            });
            if central {
                bs_insert(&mut next, x);
            }
        }
        if bs_len(&next) == bs_len(&prev) {
            return Err(Error::Invalid("group is not nilpotent".into()));
        }
        series.push(next);
    }

    let involutions: BitSet = {
        let mut s: BitSet = [0; 4];
        for e in 1..g.order {
            if g.elem_order(e) == 2 {
                bs_insert(&mut s, e);
            }
        }
        s
    };

    let mut total = 0u64;
    for w in series.windows(2) {
        total += layer_min(g, &w[0], &w[1], &involutions);
    }
    Ok(total)
}

/// Minimum over maximal chains lo = M_k < ... < M_0 = hi of the marked block
/// sizes. Memoized on the top subgroup of the remaining chain.
fn layer_min(g: &LGroup, lo: &BitSet, hi: &BitSet, inv: &BitSet) -> u64 {
    let mut memo: HashMap<BitSet, u64> = HashMap::new();
    descend(g, lo, *hi, inv, &mut memo)
}

fn descend(
    g: &LGroup,
    lo: &BitSet,
    h: BitSet,
    inv: &BitSet,
    memo: &mut HashMap<BitSet, u64>,
) -> u64 {
    if h == *lo {
        return 0;
    }
    if let Some(&v) = memo.get(&h) {
        return v;
    }
    let mut best = u64::MAX;
    for m in index2_subgroups(g, lo, &h) {
        let block: Vec<usize> = (0..g.order)
            .filter(|&e| bs_contains(&h, e) && !bs_contains(&m, e))
            .collect();
        let marked = block.iter().any(|&e| bs_contains(inv, e));
        let cost = if marked { block.len() as u64 } else { 0 };
        best = best.min(cost + descend(g, lo, m, inv, memo));
    }
    memo.insert(h, best);
    best
}

/// Index-2 subgroups of h containing lo. h/lo is abelian (a slice of a
/// central layer), so these are kernels of nonzero functionals on the
/// elementary quotient of h/lo by squares.
fn index2_subgroups(g: &LGroup, lo: &BitSet, h: &BitSet) -> Vec<BitSet> {
    let members: Vec<usize> = (0..g.order).filter(|&e| bs_contains(h, e)).collect();
    // subgroup generated by lo and all squares in h
    let mut s = *lo;
    loop {
        let cur: Vec<usize> = (0..g.order).filter(|&e| bs_contains(&s, e)).collect();
        let mut grew = false;
        for &x in &members {
            let x2 = g.mul(x, x);
            if !bs_contains(&s, x2) {
                bs_insert(&mut s, x2);
                grew = true;
            }
        }
        for &x in &cur {
            for &y in &cur {
                let p = g.mul(x, y);
                if !bs_contains(&s, p) {
                    bs_insert(&mut s, p);
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    // coordinates in the elementary abelian quotient h/s
    let canon = |e: usize, s: &BitSet, g: &LGroup| -> usize {
        // canonical coset representative: minimal element of e*s
        (0..g.order)
            .filter(|&t| bs_contains(s, t))
            .map(|t| g.mul(e, t))
            .min()
            .unwrap()
    };
    let mut reps: Vec<usize> = Vec::new();
    for &x in &members {
        let c = canon(x, &s, g);
        if !reps.contains(&c) {
            reps.push(c);
        }
    }
    // assign F2 coordinates by greedy basis over the quotient group
    let mut coords: HashMap<usize, u32> = HashMap::new();
    coords.insert(canon(0, &s, g), 0);
    let mut basis: Vec<usize> = Vec::new();
    for &rep in &reps {
        if coords.contains_key(&rep) {
            continue;
        }
        assert!(basis.len() < 8, "central layer quotient too large");
        basis.push(rep);
        let snapshot: Vec<(usize, u32)> = coords.iter().map(|(&k, &v)| (k, v)).collect();
        let bit = 1u32 << (basis.len() - 1);
        for (e, v) in snapshot {
            let ne = canon(g.mul(rep, e), &s, g);
            coords.entry(ne).or_insert(v | bit);
        }
    }
    let dim = basis.len();
    let mut out = Vec::new();
    for f in 1u32..(1 << dim) {
        let mut m: BitSet = [0; 4];
        for &x in &members {
            let c = canon(x, &s, g);
            let v = coords[&c];
            if (v & f).count_ones() % 2 == 0 {
                bs_insert(&mut m, x);
            }
        }
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{CocycleTable, CocycleTower};

    fn elementary(r: u32) -> LGroup {
        let tables = (0..r)
            .map(|i| CocycleTable::from_fn(2, 1 << i, |_, _| 0).unwrap())
            .collect();
        LGroup::from_tower(CocycleTower::new(2, tables).unwrap()).unwrap()
    }

    fn c4() -> LGroup {
        let t1 = CocycleTable::from_fn(2, 1, |_, _| 0).unwrap();
        let t2 = CocycleTable::from_fn(2, 2, |g, h| (g == 1 && h == 1) as u8).unwrap();
        LGroup::from_tower(CocycleTower::new(2, vec![t1, t2]).unwrap()).unwrap()
    }

    #[test]
    fn abelian_values() {
        assert_eq!(kluners_d(&elementary(1)).unwrap(), 1);
        assert_eq!(kluners_d(&elementary(2)).unwrap(), 3);
        assert_eq!(kluners_d(&elementary(3)).unwrap(), 7);
        assert_eq!(kluners_d(&c4()).unwrap(), 1);
    }

    #[test]
    fn c2xc4_value() {
        let t1 = CocycleTable::from_fn(2, 1, |_, _| 0).unwrap();
        let t2 = CocycleTable::from_fn(2, 2, |_, _| 0).unwrap();
        // carry on coordinate 1 makes coordinates (1,3) a C4
        let t3 = CocycleTable::from_fn(2, 4, |g, h| ((g & 1) * (h & 1)) as u8).unwrap();
        let g = LGroup::from_tower(CocycleTower::new(2, vec![t1, t2, t3]).unwrap()).unwrap();
        assert!(g.is_abelian());
        assert_eq!(g.exponent(), 4);
        assert_eq!(kluners_d(&g).unwrap(), 3);
    }

    #[test]
    fn q8_value() {
        let t1 = CocycleTable::from_fn(2, 1, |_, _| 0).unwrap();
        let t2 = CocycleTable::from_fn(2, 2, |_, _| 0).unwrap();
        let t3 = CocycleTable::from_fn(2, 4, |g, h| {
            let (a, b) = ((g & 1) as u8, ((g >> 1) & 1) as u8);
            let (a1, b1) = ((h & 1) as u8, ((h >> 1) & 1) as u8);
            (a * a1 + b * a1 + b * b1) % 2
        })
        .unwrap();
        let g = LGroup::from_tower(CocycleTower::new(2, vec![t1, t2, t3]).unwrap()).unwrap();
        assert_eq!(g.involution_locus().len(), 1);
        assert_eq!(kluners_d(&g).unwrap(), 1);
    }

    #[test]
    fn odd_l_rejected() {
        let t1 = CocycleTable::from_fn(3, 1, |_, _| 0).unwrap();
        let g = LGroup::from_tower(CocycleTower::new(3, vec![t1]).unwrap()).unwrap();
        assert!(kluners_d(&g).is_err());
    }
}
