//! Verdict pipeline: character independence for split layers, symbol sums
//! for cup layers, Frobenius lift tests for the rest.

use std::collections::{BTreeMap, HashMap};

use crate::arith::{chi_eval_frob, hilbert, mul_mod, pow_mod, primitive_root, Place};
use crate::catalog::{CatalogEntry, CupFactor, StepSpec};
use crate::group::LGroup;
use crate::{Error, Result};

use super::{assemble, AssembledChar, Coordinates, FactoredTuple};

/// Why a tuple fails to produce a surjection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Obstruction {
    TrivialFirstChar,
    DependentChar { step: u32 },
    Local { step: u32, place: Place },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpiData {
    /// Odd part of the field discriminant when it fits in a u128; equals
    /// the discriminant whenever 2 is unramified.
    pub disc: Option<u128>,
    /// (prime, exponent) pairs of the odd discriminant part, ascending.
    pub disc_factors: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Surjective(EpiData),
    Obstructed(Obstruction),
    Undecided { step: u32, place: Place },
}

impl Verdict {
    pub fn is_surjective(&self) -> bool {
        matches!(self, Verdict::Surjective(_))
    }

    /// Short machine-readable tag used in CSV rows.
    pub fn label(&self) -> String {
        fn place(p: &Place) -> String {
            match p {
                Place::Real => "real".into(),
                Place::Two => "2".into(),
                Place::Odd(q) => q.to_string(),
            }
        }
        match self {
            Verdict::Surjective(_) => "epi".into(),
            Verdict::Obstructed(Obstruction::TrivialFirstChar) => {
                "obstructed:trivial-char".into()
            }
            Verdict::Obstructed(Obstruction::DependentChar { step }) => {
                format!("obstructed:dependent:{step}")
            }
            Verdict::Obstructed(Obstruction::Local { step, place: p }) => {
                format!("obstructed:local:{step}:{}", place(p))
            }
            Verdict::Undecided { step, place: p } => {
                format!("undecided:{step}:{}", place(p))
            }
        }
    }
}

/// Cached cube-class reference values keyed by modulus.
#[derive(Debug, Default)]
pub struct CubicCache {
    roots: HashMap<u64, u64>,
}

impl CubicCache {
    /// Cubic residue class of p mod the prime r = 1 mod 3, in F_3, with the
    /// smallest primitive root of r fixing the identification.
    fn eval(&mut self, r: u64, p: u64) -> u8 {
        let w = *self
            .roots
            .entry(r)
            .or_insert_with(|| pow_mod(primitive_root(r), (r - 1) / 3, r));
        let v = pow_mod(p % r, (r - 1) / 3, r);
        if v == 1 {
            0
        } else if v == w {
            1
        } else {
            debug_assert_eq!(v, mul_mod(w, w, r));
            2
        }
    }
}

// F_l Gaussian elimination over labelled exponent vectors. The label space
// is 0 for the sign, 1 for the prime 2, p for an odd prime p.

fn reduce_by(
    basis: &[(u64, BTreeMap<u64, u8>)],
    mut v: BTreeMap<u64, u8>,
    l: u8,
) -> BTreeMap<u64, u8> {
    // descending leads: a subtraction only introduces smaller labels
    let mut order: Vec<&(u64, BTreeMap<u64, u8>)> = basis.iter().collect();
    order.sort_by(|a, b| b.0.cmp(&a.0));
    for (lead, b) in order {
        if let Some(&c) = v.get(lead) {
            // subtract c * b; exponents live in F_l
            for (&label, &e) in b {
                let cur = v.remove(&label).unwrap_or(0) as i16;
                let nv = (cur - c as i16 * e as i16).rem_euclid(l as i16) as u8;
                if nv != 0 {
                    v.insert(label, nv);
                }
            }
        }
    }
    v
}

fn try_extend(basis: &mut Vec<(u64, BTreeMap<u64, u8>)>, v: BTreeMap<u64, u8>, l: u8) -> bool {
    let mut v = reduce_by(basis, v, l);
    let Some((&lead, &c)) = v.iter().next_back() else {
        return false;
    };
    // scale so the leading coefficient is 1
    if c != 1 {
        let inv = (1..l).find(|&t| t * c % l == 1).unwrap();
        for e in v.values_mut() {
            *e = *e * inv % l;
        }
    }
    basis.push((lead, v));
    true
}

fn factor_const(c: i64) -> Vec<u64> {
    let mut n = c.unsigned_abs();
    let mut out = Vec::new();
    let mut p = 3u64;
    while n % 2 == 0 {
        n /= 2;
    }
    while p * p <= n {
        while n % p == 0 {
            n /= p;
            out.push(p);
        }
        p += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out.dedup();
    out
}

fn factor_value(f: CupFactor, coords: &Coordinates) -> Result<i64> {
    match f {
        CupFactor::Coord(j) => {
            let v = coords.chars[j as usize - 1].value_i128();
            i64::try_from(v).map_err(|_| Error::TooLarge("character value overflows".into()))
        }
        CupFactor::Const(c) => Ok(c),
    }
}

fn factor_support(f: CupFactor, coords: &Coordinates, out: &mut Vec<u64>) {
    match f {
        CupFactor::Coord(j) => out.extend(coords.chars[j as usize - 1].odd.keys().copied()),
        CupFactor::Const(c) => out.extend(factor_const(c)),
    }
}

/// First place where the symbol sum of the cup expression is nonzero.
fn cup_violation(
    coords: &Coordinates,
    terms: &[(CupFactor, CupFactor)],
) -> Result<Option<Place>> {
    let mut pairs = Vec::with_capacity(terms.len());
    let mut support = Vec::new();
    for &(a, b) in terms {
        pairs.push((factor_value(a, coords)?, factor_value(b, coords)?));
        factor_support(a, coords, &mut support);
        factor_support(b, coords, &mut support);
    }
    support.sort_unstable();
    support.dedup();
    let mut places = vec![Place::Real, Place::Two];
    places.extend(support.into_iter().map(Place::Odd));
    for place in places {
        let mut s = 0u8;
        for &(a, b) in &pairs {
            s ^= hilbert(a, b, place)?;
        }
        if s != 0 {
            return Ok(Some(place));
        }
    }
    Ok(None)
}

/// Global symbol sum of every cup step over all support places; nonzero
/// would contradict reciprocity.
pub fn reciprocity_audit(entry: &CatalogEntry, tuple: &FactoredTuple) -> Result<()> {
    let coords = assemble(&entry.group, tuple)?;
    for (i0, step) in entry.steps.iter().enumerate() {
        let StepSpec::Cup(terms) = step else { continue };
        let mut pairs = Vec::new();
        let mut support = Vec::new();
        for &(a, b) in terms {
            pairs.push((factor_value(a, &coords)?, factor_value(b, &coords)?));
            factor_support(a, &coords, &mut support);
            factor_support(b, &coords, &mut support);
        }
        support.sort_unstable();
        support.dedup();
        let mut total = 0u8;
        let mut places = vec![Place::Real, Place::Two];
        places.extend(support.into_iter().map(Place::Odd));
        for place in places {
            for &(a, b) in &pairs {
                total ^= hilbert(a, b, place)?;
            }
        }
        if total != 0 {
            return Err(Error::Invalid(format!(
                "reciprocity violated by the step {} symbol sum",
                i0 + 1
            )));
        }
    }
    Ok(())
}

/// Frobenius digit of the coordinate character at p: the value of its
/// prime-to-p part on Frob_p.
fn chi_frob_digit(
    c: &AssembledChar,
    p: u64,
    l: u8,
    cubic: &mut CubicCache,
) -> Result<u8> {
    if l == 2 {
        let mut neg = c.neg;
        if c.odd.contains_key(&p) && p % 4 == 3 {
            // dividing by the ramified basis character p* flips the sign
            neg = !neg;
        }
        let mut v: i128 = if neg { -1 } else { 1 };
        if c.two {
            v *= 2;
        }
        for &q in c.odd.keys() {
            if q != p {
                v *= q as i128;
            }
        }
        let d = i64::try_from(v).map_err(|_| Error::TooLarge("character value overflows".into()))?;
        if d == 1 {
            return Ok(0);
        }
        chi_eval_frob(d, p)
    } else {
        let mut s = 0u16;
        for (&q, &e) in &c.odd {
            if q != p {
                s = (s + e as u16 * cubic.eval(q, p) as u16) % l as u16;
            }
        }
        Ok(s as u8)
    }
}

enum FrobOutcome {
    Pass,
    Fail(Place),
    Unknown(Place),
}

/// Carry-shape cup step: a single term pairing a coordinate with -1. Only
/// for these is the archimedean digit rule below derived.
fn carry_base(terms: &[(CupFactor, CupFactor)]) -> Option<u32> {
    match terms {
        [(CupFactor::Coord(j), CupFactor::Const(-1))] => Some(*j),
        _ => None,
    }
}

fn frob_step(
    entry: &CatalogEntry,
    tuple: &FactoredTuple,
    coords: &Coordinates,
    step_no: u32,
    cubic: &mut CubicCache,
) -> Result<FrobOutcome> {
    let g = &entry.group;
    let l = g.l;
    let i = step_no;
    let abelian = g.is_abelian_level(i);
    let prev_trivial = entry.steps[..(i - 1) as usize]
        .iter()
        .all(|s| matches!(s, StepSpec::Trivial));
    for (p, elem) in tuple.ramified_primes() {
        let sigma = g.proj(elem, i);
        if sigma == 0 {
            continue;
        }
        if abelian {
            let o = g.elem_order_level(sigma, i) as u64;
            if (p - 1) % o != 0 {
                return Ok(FrobOutcome::Fail(Place::Odd(p)));
            }
        } else if prev_trivial {
            let mut f = 0usize;
            let mut base = 1usize;
            for j in 1..i {
                let d = chi_frob_digit(&coords.chars[j as usize - 1], p, l, cubic)?;
                f += d as usize * base;
                base *= l as usize;
            }
            let lhs = g.mul_level(g.mul_level(f, sigma, i), g.inv_level(f, i), i);
            let rhs = g.pow_level(sigma, p, i);
            if lhs != rhs {
                return Ok(FrobOutcome::Fail(Place::Odd(p)));
            }
        } else {
            return Ok(FrobOutcome::Unknown(Place::Odd(p)));
        }
    }
    if l == 2 {
        // wild place: only the unramified-at-2 situation is decided
        if (0..i as usize).any(|j| !coords.chars[j].is_one_mod4()) {
            return Ok(FrobOutcome::Unknown(Place::Two));
        }
        // archimedean place: complex conjugation must lift to an element
        // of order at most 2; its digits below level i are forced
        let mut c = 0usize;
        let mut base = 1usize;
        for j in 1..i {
            let ch = &coords.chars[j as usize - 1];
            let rho = match &entry.steps[j as usize - 1] {
                StepSpec::Trivial => ch.neg as usize,
                StepSpec::Cup(terms) => {
                    let Some(jb) = carry_base(terms) else {
                        return Ok(FrobOutcome::Unknown(Place::Real));
                    };
                    let base_ch = &coords.chars[jb as usize - 1];
                    if base_ch.neg {
                        return Ok(FrobOutcome::Unknown(Place::Real));
                    }
                    let eps = base_ch.odd.keys().filter(|&&p| p % 8 == 5).count() % 2;
                    (ch.neg as usize + eps) % 2
                }
                StepSpec::Frob => return Ok(FrobOutcome::Unknown(Place::Real)),
            };
            c += rho * base;
            base *= 2;
        }
        if c != 0 && g.mul_level(c, c, i) != 0 {
            return Ok(FrobOutcome::Fail(Place::Real));
        }
    }
    Ok(FrobOutcome::Pass)
}

fn tuple_disc(g: &LGroup, tuple: &FactoredTuple) -> EpiData {
    let mut factors: Vec<(u64, u64)> = tuple
        .ramified_primes()
        .into_iter()
        .map(|(p, elem)| (p, g.disc_exponent(elem)))
        .collect();
    factors.sort_unstable();
    let mut disc = Some(1u128);
    for &(p, e) in &factors {
        disc = disc.and_then(|d| {
            let mut d = d;
            for _ in 0..e {
                d = d.checked_mul(p as u128)?;
            }
            Some(d)
        });
    }
    EpiData { disc, disc_factors: factors }
}

/// Full decision pipeline for one tuple.
pub fn solve(
    entry: &CatalogEntry,
    tuple: &FactoredTuple,
    cubic: &mut CubicCache,
) -> Result<Verdict> {
    let g = &entry.group;
    let coords = assemble(g, tuple)?;
    let l = g.l;
    let mut basis: Vec<(u64, BTreeMap<u64, u8>)> = Vec::new();
    for (i0, step) in entry.steps.iter().enumerate() {
        let step_no = i0 as u32 + 1;
        match step {
            StepSpec::Trivial => {
                if !try_extend(&mut basis, coords.chars[i0].label_vec(), l) {
                    return Ok(Verdict::Obstructed(if step_no == 1 {
                        Obstruction::TrivialFirstChar
                    } else {
                        Obstruction::DependentChar { step: step_no }
                    }));
                }
            }
            StepSpec::Cup(terms) => {
                if let Some(place) = cup_violation(&coords, terms)? {
                    return Ok(Verdict::Obstructed(Obstruction::Local {
                        step: step_no,
                        place,
                    }));
                }
            }
            StepSpec::Frob => match frob_step(entry, tuple, &coords, step_no, cubic)? {
                FrobOutcome::Pass => {}
                FrobOutcome::Fail(place) => {
                    return Ok(Verdict::Obstructed(Obstruction::Local {
                        step: step_no,
                        place,
                    }))
                }
                FrobOutcome::Unknown(place) => {
                    return Ok(Verdict::Undecided { step: step_no, place })
                }
            },
        }
    }
    Ok(Verdict::Surjective(tuple_disc(g, tuple)))
}
