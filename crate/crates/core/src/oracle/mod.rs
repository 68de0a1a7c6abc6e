//! Independent counts of abelian fields by discriminant, computed from
//! characters of unit groups. Nothing here touches the tower machinery.

use serde::Serialize;

use crate::arith::{factor_u64, gcd_u64 as gcd, inv_mod, mul_mod, pow_mod, primitive_root};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    OddCyclic,
    TwoSign,
    TwoFive,
}

/// One generator of U(m), lifted to a residue mod m that is 1 modulo the
/// other prime power factors.
#[derive(Debug, Clone)]
pub struct UnitGen {
    pub residue: u64,
    pub order: u64,
    pub p: u64,
    pub k: u32,
    role: Role,
}

#[derive(Debug, Clone)]
pub struct UnitGroup {
    pub m: u64,
    pub phi: u64,
    pub gens: Vec<UnitGen>,
}

fn crt_lift(a: u64, q: u64, m: u64) -> u64 {
    // x = a mod q, x = 1 mod m/q
    let rest = m / q;
    if rest == 1 {
        return a % m;
    }
    // x = 1 + rest * t with t = (a - 1) * rest^-1 mod q
    let inv = inv_mod(rest % q, q);
    let t = mul_mod((a % q + q - 1) % q, inv, q);
    (1 + rest as u128 * t as u128 % m as u128) as u64 % m
}

/// Generators of (Z/m)^* as a product of cyclic pieces: one per odd prime
/// power, and the sign/five pair at 2^k for k >= 3.
pub fn unit_group(m: u64) -> Result<UnitGroup> {
    if m == 0 {
        return Err(Error::Invalid("modulus must be positive".into()));
    }
    let mut gens = Vec::new();
    let mut phi = 1u64;
    for (p, k) in factor_u64(m) {
        let q = p.pow(k);
        if p == 2 {
            if k >= 2 {
                phi *= q / 2;
            }
            if k == 2 {
                gens.push(UnitGen {
                    residue: crt_lift(3, q, m),
                    order: 2,
                    p,
                    k,
                    role: Role::TwoSign,
                });
            } else if k >= 3 {
                gens.push(UnitGen {
                    residue: crt_lift(q - 1, q, m),
                    order: 2,
                    p,
                    k,
                    role: Role::TwoSign,
                });
                gens.push(UnitGen {
                    residue: crt_lift(5, q, m),
                    order: q / 4,
                    p,
                    k,
                    role: Role::TwoFive,
                });
            }
        } else {
            let local_phi = q / p * (p - 1);
            phi *= local_phi;
            let mut g = primitive_root(p);
            if k >= 2 && pow_mod(g, p - 1, p * p) == 1 {
                g += p;
            }
            gens.push(UnitGen {
                residue: crt_lift(g % q, q, m),
                order: local_phi,
                p,
                k,
                role: Role::OddCyclic,
            });
        }
    }
    Ok(UnitGroup { m, phi, gens })
}

/// A finite abelian group given as a product of cyclic factors.
#[derive(Debug, Clone)]
pub struct Abelian {
    pub factors: Vec<u64>,
    pub order: u64,
    pub exponent: u64,
}

impl Abelian {
    pub fn new(factors: &[u64]) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|&d| d < 2) {
            return Err(Error::Invalid("cyclic factors must all be >= 2".into()));
        }
        let mut order = 1u64;
        let mut exponent = 1u64;
        for &d in factors {
            order = order
                .checked_mul(d)
                .filter(|&o| o <= 4096)
                .ok_or_else(|| Error::TooLarge("abelian target too large".into()))?;
            exponent = exponent / gcd(exponent, d) * d;
        }
        Ok(Abelian { factors: factors.to_vec(), order, exponent })
    }

    fn coords(&self, mut idx: u64) -> Vec<u64> {
        self.factors
            .iter()
            .map(|&d| {
                let c = idx % d;
                idx /= d;
                c
            })
            .collect()
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let mut idx = 0;
        let mut base = 1;
        for (j, &d) in self.factors.iter().enumerate() {
            idx += (ca[j] + cb[j]) % d * base;
            base *= d;
        }
        idx
    }

    fn elem_order(&self, a: u64) -> u64 {
        let c = self.coords(a);
        let mut o = 1u64;
        for (j, &d) in self.factors.iter().enumerate() {
            let oj = d / gcd(d, c[j]);
            o = o / gcd(o, oj) * oj;
        }
        o
    }

    fn generates(&self, elems: &[u64]) -> bool {
        let mut seen = vec![false; self.order as usize];
        seen[0] = true;
        let mut stack = vec![0u64];
        let mut count = 1u64;
        while let Some(e) = stack.pop() {
            for &g in elems {
                let f = self.add(e, g);
                if !seen[f as usize] {
                    seen[f as usize] = true;
                    count += 1;
                    stack.push(f);
                }
            }
        }
        count == self.order
    }

    /// Automorphism count by brute force over endomorphisms.
    pub fn aut_count(&self) -> u64 {
        let basis: Vec<u64> = {
            let mut base = 1u64;
            self.factors
                .iter()
                .map(|&d| {
                    let e = base;
                    base *= d;
                    e
                })
                .collect()
        };
        let mut count = 0u64;
        let mut images = vec![0u64; basis.len()];
        self.aut_rec(&basis, 0, &mut images, &mut count);
        count
    }

    fn aut_rec(&self, basis: &[u64], i: usize, images: &mut Vec<u64>, count: &mut u64) {
        if i == basis.len() {
            if self.generates(images) {
                *count += 1;
            }
            return;
        }
        let d = self.factors[i];
        for a in 0..self.order {
            if d % self.elem_order(a) == 0 {
                images[i] = a;
                self.aut_rec(basis, i + 1, images, count);
            }
        }
    }
}

/// Field multiset for Galois group A, absolute discriminant <= x.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub factors: Vec<u64>,
    pub x: u128,
    pub modulus_bound: u64,
    pub aut_count: u64,
    pub epi_count: u64,
    /// Absolute discriminants, ascending, one per field.
    pub discs: Vec<u128>,
    /// Ascending discs with one entry per surjection; every field appears
    /// #Aut(A) times. This is the multiset the tuple side must reproduce.
    pub epi_discs: Vec<u128>,
}

/// Largest m with m^(order/2) <= x. Any primitive surjection onto A forces
/// at least half the characters to ramify at each conductor prime, so the
/// discriminant is at least m^(order/2).
fn modulus_bound(order: u64, x: u128) -> u64 {
    let h = (order / 2) as u32;
    let mut lo = 1u64;
    let mut hi = 2u64;
    let fits = |m: u64| (m as u128).checked_pow(h).is_some_and(|v| v <= x);
    while fits(hi) {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

struct HomScan<'a> {
    a: &'a Abelian,
    unit: &'a UnitGroup,
    x: u128,
    discs: Vec<u128>,
    epis: u64,
}

impl HomScan<'_> {
    /// Discriminant as a conductor product over the dual group, plus the
    /// primitivity check; None if not primitive or above the cutoff.
    fn disc_of(&self, images: &[u64]) -> Option<u128> {
        let a = self.a;
        let ell = a.exponent;
        // value of chi composed with the hom on generator i, as an exponent
        // of a fixed primitive ell-th root
        let mut disc = 1u128;
        let mut max_e: Vec<u32> = self.unit.gens.iter().map(|_| 0).collect();
        for chi in 0..a.order {
            let cc = a.coords(chi);
            let mut by_gen: Vec<u64> = Vec::with_capacity(images.len());
            for &im in images {
                let ic = a.coords(im);
                let mut v = 0u64;
                for (j, &d) in a.factors.iter().enumerate() {
                    v = (v + ell / d * cc[j] % ell * ic[j]) % ell;
                }
                by_gen.push(ell / gcd(ell, v));
            }
            // conductor of chi . hom, prime by prime
            let mut i = 0;
            while i < self.unit.gens.len() {
                let p = self.unit.gens[i].p;
                let mut j = i;
                let mut o_sign = 1u64;
                let mut o_five = 1u64;
                let mut o_all = 1u64;
                while j < self.unit.gens.len() && self.unit.gens[j].p == p {
                    let o = by_gen[j];
                    o_all = o_all / gcd(o_all, o) * o;
                    match self.unit.gens[j].role {
                        Role::TwoSign => o_sign = o,
                        Role::TwoFive => o_five = o,
                        Role::OddCyclic => {}
                    }
                    j += 1;
                }
                let e = if p == 2 {
                    if o_sign == 1 && o_five == 1 {
                        0
                    } else if o_five == 1 {
                        2
                    } else {
                        o_five.trailing_zeros() + 2
                    }
                } else if o_all == 1 {
                    0
                } else {
                    let mut v = 1;
                    let mut o = o_all;
                    while o % p == 0 {
                        v += 1;
                        o /= p;
                    }
                    v
                };
                for gi in i..j {
                    max_e[gi] = max_e[gi].max(e);
                }
                disc = disc.checked_mul((p as u128).pow(e))?;
                i = j;
            }
        }
        // primitive: conductor exponent attains k at every prime of m
        let mut i = 0;
        while i < self.unit.gens.len() {
            let p = self.unit.gens[i].p;
            let k = self.unit.gens[i].k;
            let mut j = i;
            let mut e = 0;
            while j < self.unit.gens.len() && self.unit.gens[j].p == p {
                e = e.max(max_e[j]);
                j += 1;
            }
            if e != k {
                return None;
            }
            i = j;
        }
        (disc <= self.x).then_some(disc)
    }

    fn scan(&mut self, i: usize, images: &mut Vec<u64>) {
        if i == self.unit.gens.len() {
            if self.a.generates(images) {
                if let Some(d) = self.disc_of(images) {
                    self.epis += 1;
                    self.discs.push(d);
                }
            }
            return;
        }
        let n = self.unit.gens[i].order;
        for a in 0..self.a.order {
            if n % self.a.elem_order(a) == 0 {
                images[i] = a;
                self.scan(i + 1, images);
            }
        }
    }
}

fn is_squarefree_factored(fac: &[(u64, u32)]) -> bool {
    fac.iter().all(|&(_, k)| k == 1)
}

fn count_with(factors: &[u64], x: u128, odd_only: bool) -> Result<OracleReport> {
    let a = Abelian::new(factors)?;
    if odd_only {
        // the squarefree-conductor shortcut below needs prime-power local
        // unit groups mapping with 2-power image
        if !a.order.is_power_of_two() {
            return Err(Error::Invalid(
                "odd-conductor oracle requires a 2-group target".into(),
            ));
        }
    }
    let bound = modulus_bound(a.order, x);
    let aut = a.aut_count();
    let mut all_discs: Vec<u128> = Vec::new();
    let mut epis = 0u64;
    let mut m = 3u64;
    while m <= bound {
        if m % 4 == 2 {
            m += 1;
            continue;
        }
        if odd_only && m % 2 == 0 {
            m += 1;
            continue;
        }
        let fac = factor_u64(m);
        // for a 2-group target an odd conductor must be squarefree: wild
        // ramification at odd p needs p-power image order
        if odd_only && !is_squarefree_factored(&fac) {
            m += 1;
            continue;
        }
        let unit = unit_group(m)?;
        let mut scan = HomScan { a: &a, unit: &unit, x, discs: Vec::new(), epis: 0 };
        let mut images = vec![0u64; unit.gens.len()];
        scan.scan(0, &mut images);
        epis += scan.epis;
        all_discs.extend(scan.discs);
        m += 1;
    }
    all_discs.sort_unstable();
    // each field is hit by exactly #Aut(A) surjections
    let mut discs = Vec::new();
    let mut i = 0;
    while i < all_discs.len() {
        let mut j = i;
        while j < all_discs.len() && all_discs[j] == all_discs[i] {
            j += 1;
        }
        let n = (j - i) as u64;
        if n % aut != 0 {
            return Err(Error::Invalid(format!(
                "disc {} hit by {} surjections, not a multiple of #Aut = {}",
                all_discs[i], n, aut
            )));
        }
        for _ in 0..n / aut {
            discs.push(all_discs[i]);
        }
        i = j;
    }
    Ok(OracleReport {
        factors: factors.to_vec(),
        x,
        modulus_bound: bound,
        aut_count: aut,
        epi_count: epis,
        discs,
        epi_discs: all_discs,
    })
}

/// Fields with Galois group A, odd conductor, |disc| <= x.
pub fn count_fields_odd(factors: &[u64], x: u128) -> Result<OracleReport> {
    count_with(factors, x, true)
}

/// Fields with Galois group A and |disc| <= x, any conductor.
pub fn count_fields_all(factors: &[u64], x: u128) -> Result<OracleReport> {
    count_with(factors, x, false)
}
