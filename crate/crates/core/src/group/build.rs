//! Constructs a cocycle tower for a concretely given l-group from an
//! ascending chain of centrally embedded subgroups with cyclic-l layers.

use crate::group::cocycle::{is_coboundary, CocycleTable, CocycleTower};
use crate::{Error, Result};

/// A finite group given by its multiplication table (row major, index 0 is
/// the identity).
pub struct ConcreteGroup {
    pub order: usize,
    mul: Vec<u16>,
}

impl ConcreteGroup {
    pub fn new(order: usize, mul: Vec<u16>) -> Result<Self> {
        if mul.len() != order * order {
            return Err(Error::Invalid("multiplication table size mismatch".into()));
        }
        let g = ConcreteGroup { order, mul };
        for a in 0..order {
            if g.mul(a, 0) != a || g.mul(0, a) != a {
                return Err(Error::Invalid("index 0 is not an identity".into()));
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        (0..self.order).find(|&b| self.mul(a, b) == 0).expect("not a group")
    }

    pub fn pow(&self, a: usize, k: usize) -> usize {
        let mut x = 0;
        for _ in 0..k {
            x = self.mul(x, a);
        }
        x
    }
}

/// Builds the tower for `g` along `chain`: subgroup element lists
/// N_0 = {id} < N_1 < ... < N_r = G where each N_{j+1}/N_j has order l and
/// is central in G/N_j. Layer i of the tower is the quotient by N_{r-i}.
/// Split layers are normalized to the zero table by a section shift.
///
/// Returns the tower together with the isomorphism sending a tower index to
/// the concrete element representing it.
pub fn tower_from_chain(g: &ConcreteGroup, l: u8, chain: &[Vec<u16>]) -> Result<(CocycleTower, Vec<u16>)> {
    let r = chain.len() - 1;
    let lu = l as usize;
    // chain sanity: sizes, nesting, subgroup, centrality of each layer
    if chain[0] != vec![0u16] {
        return Err(Error::Invalid("chain must start at the trivial subgroup".into()));
    }
    let mut expected = 1usize;
    for (j, n) in chain.iter().enumerate() {
        if n.len() != expected {
            return Err(Error::Invalid(format!("chain layer {j} has wrong size")));
        }
        expected *= lu;
        let inside = |e: usize| n.contains(&(e as u16));
        for &a in n {
            for &b in n {
                if !inside(g.mul(a as usize, b as usize)) {
                    return Err(Error::Invalid(format!("chain layer {j} is not a subgroup")));
                }
            }
        }
        if j > 0 {
            let prev = &chain[j - 1];
            if !prev.iter().all(|e| n.contains(e)) {
                return Err(Error::Invalid(format!("chain layer {j} does not contain layer {}", j - 1)));
            }
            // centrality: [G, N_j] inside N_{j-1}
            for &a in n {
                for x in 0..g.order {
                    let c = g.mul(g.mul(x, a as usize), g.inv(g.mul(a as usize, x)));
                    if !prev.contains(&(c as u16)) {
                        return Err(Error::NotCentralChain { layer: j as u32 });
                    }
                }
            }
        }
    }
    if expected != g.order * lu {
        return Err(Error::Invalid("chain does not reach the full group".into()));
    }

    // reps[idx] = concrete element representing tower index idx at the
    // current level; level i works modulo N_{r-i}
    let mut reps: Vec<usize> = vec![0];
    let mut tables: Vec<CocycleTable> = Vec::new();
    for i in 1..=r {
        let n_cur = &chain[r - i];
        let n_prev = &chain[r - i + 1];
        let z = *n_prev
            .iter()
            .filter(|e| !n_cur.contains(e))
            .min()
            .ok_or_else(|| Error::Invalid("empty chain layer".into()))? as usize;

        let base = reps.len();
        // projection to the level-i quotient; cosets are numbered by the
        // tower index of z^a * reps[b]
        let mut proj = vec![usize::MAX; g.order];
        let mut new_reps = vec![0usize; base * lu];
        for b in 0..base {
            for a in 0..lu {
                let rep = g.mul(g.pow(z, a), reps[b]);
                let idx = b + a * base;
                new_reps[idx] = rep;
                for &t in n_cur {
                    proj[g.mul(rep, t as usize)] = idx;
                }
            }
        }
        if proj.iter().any(|&v| v == usize::MAX) {
            return Err(Error::Invalid("cosets do not cover the group".into()));
        }

        // cocycle of the section reps: product of two reps lands in the coset
        // z^theta * rep(product)
        let prev_proj = |e: usize| -> usize {
            // level-(i-1) index of a concrete element
            proj[e] % base
        };
        let theta = |gg: usize, hh: usize| -> u8 {
            let c = g.mul(reps[gg], reps[hh]);
            let idx = proj[c];
            debug_assert_eq!(idx % base, prev_proj(g.mul(reps[gg], reps[hh])));
            (idx / base) as u8
        };
        let mut table = CocycleTable::from_fn(l, base, |a, b| theta(a, b))?;

        // normalize split layers to the zero table
        if !table.is_zero() {
            let mul_level = |a: usize, b: usize| prev_proj(g.mul(reps[a], reps[b]));
            if let Some(c) = is_coboundary(&table, mul_level) {
                // shift the section: rep'(b) = z^{-c(b)} rep(b)
                for b in 0..base {
                    let shift = (lu - c[b] as usize) % lu;
                    let shifted = g.mul(g.pow(z, shift), reps[b]);
                    for a in 0..lu {
                        new_reps[b + a * base] = g.mul(g.pow(z, a), shifted);
                    }
                }
                let reps_shifted: Vec<usize> =
                    (0..base).map(|b| new_reps[b]).collect();
                let theta2 = |gg: usize, hh: usize| -> u8 {
                    let c = g.mul(reps_shifted[gg], reps_shifted[hh]);
                    // recompute the projection against shifted reps
                    let mut digit = usize::MAX;
                    for a in 0..lu {
                        let candidate = g.mul(g.pow(z, a), reps_shifted[prev_proj(c)]);
                        if n_cur.contains(&(g.mul(g.inv(candidate), c) as u16)) {
                            digit = a;
                            break;
                        }
                    }
                    digit as u8
                };
                table = CocycleTable::from_fn(l, base, |a, b| theta2(a, b))?;
                if !table.is_zero() {
                    return Err(Error::Invalid(
                        "coboundary shift failed to zero a split layer".into(),
                    ));
                }
                // rebuild the projection for the shifted section
                for b in 0..base {
                    for a in 0..lu {
                        let rep = new_reps[b + a * base];
                        for &t in n_cur {
                            proj[g.mul(rep, t as usize)] = b + a * base;
                        }
                    }
                }
            }
        }
        tables.push(table);
        reps = new_reps;
    }

    let tower = CocycleTower::new(l, tables)?;
    Ok((tower, reps.into_iter().map(|e| e as u16).collect()))
}
