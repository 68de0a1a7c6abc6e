//! Kronecker symbol and the quadratic Hilbert symbol over Q, in closed form
//! and by direct search over p-adic approximations.

use crate::{Error, Result};

/// Places of Q that carry quadratic local conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Real,
    Two,
    Odd(u64),
}

/// Kronecker symbol (a|n), fully multiplicative extension of Jacobi.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut a = a;
    let mut n = n;
    let mut result = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    while n % 2 == 0 {
        if a % 2 == 0 {
            return 0;
        }
        n /= 2;
        match a.rem_euclid(8) {
            3 | 5 => result = -result,
            _ => {}
        }
    }
    // Jacobi loop on odd n > 0
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            match n.rem_euclid(8) {
                3 | 5 => result = -result,
                _ => {}
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.rem_euclid(4) == 3 && n.rem_euclid(4) == 3 {
            result = -result;
        }
        a = a.rem_euclid(n);
    }
    if n == 1 {
        result
    } else {
        0
    }
}

fn vp(mut n: i64, p: i64) -> (u32, i64) {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    (v, n)
}

/// (u - 1)/2 mod 2 for odd u.
fn eps2(u: i64) -> u8 {
    debug_assert!(u % 2 != 0);
    ((u.rem_euclid(4) - 1) / 2) as u8 % 2
}

/// (u^2 - 1)/8 mod 2 for odd u.
fn omega2(u: i64) -> u8 {
    debug_assert!(u % 2 != 0);
    match u.rem_euclid(8) {
        1 | 7 => 0,
        _ => 1,
    }
}

/// Additive quadratic Hilbert symbol: 0 when z^2 = a x^2 + b y^2 has a
/// nontrivial solution over the completion at `place`, 1 otherwise.
pub fn hilbert(a: i64, b: i64, place: Place) -> Result<u8> {
    if a == 0 || b == 0 {
        return Err(Error::Invalid("hilbert symbol requires nonzero arguments".into()));
    }
    match place {
        Place::Real => Ok(if a < 0 && b < 0 { 1 } else { 0 }),
        Place::Two => {
            let (alpha, u) = vp(a, 2);
            let (beta, w) = vp(b, 2);
            let alpha = (alpha % 2) as u8;
            let beta = (beta % 2) as u8;
            Ok((eps2(u) * eps2(w) + alpha * omega2(w) + beta * omega2(u)) % 2)
        }
        Place::Odd(p) => {
            if p < 3 || p % 2 == 0 {
                return Err(Error::Invalid(format!("{p} is not an odd prime place")));
            }
            let p_i = p as i64;
            let (alpha, u) = vp(a, p_i);
            let (beta, w) = vp(b, p_i);
            let alpha = (alpha % 2) as u8;
            let beta = (beta % 2) as u8;
            let leg = |x: i64| -> u8 {
                if kronecker(x, p_i) == 1 {
                    0
                } else {
                    1
                }
            };
            let pm = if p % 4 == 3 { 1u8 } else { 0u8 };
            Ok((alpha * beta * pm + beta * leg(u) + alpha * leg(w)) % 2)
        }
    }
}

/// Same symbol decided by searching for solutions of z^2 = a x^2 + b y^2 in
/// Z/p^k with one coordinate normalized to a unit. Slow; meant as an oracle
/// for the closed form. `work_cap` bounds p^k.
pub fn hilbert_bruteforce(a: i64, b: i64, place: Place, work_cap: u64) -> Result<u8> {
    if a == 0 || b == 0 {
        return Err(Error::Invalid("hilbert symbol requires nonzero arguments".into()));
    }
    match place {
        Place::Real => Ok(if a < 0 && b < 0 { 1 } else { 0 }),
        Place::Two => bruteforce_p(a, b, 2, work_cap),
        Place::Odd(p) => {
            if p < 3 || p % 2 == 0 {
                return Err(Error::Invalid(format!("{p} is not an odd prime place")));
            }
            bruteforce_p(a, b, p, work_cap)
        }
    }
}

fn strip_squares(mut n: i64) -> i64 {
    // removes square factors; inputs here are small test values
    let mut d = 2i64;
    while d * d <= n.abs() {
        while n % (d * d) == 0 {
            n /= d * d;
        }
        d += 1;
    }
    n
}

fn bruteforce_p(a: i64, b: i64, p: u64, work_cap: u64) -> Result<u8> {
    // square factors do not change the symbol and keep valuations <= 1
    let a = strip_squares(a);
    let b = strip_squares(b);
    let p_i = p as i64;
    let (va, _) = vp(a, p_i);
    let (vb, _) = vp(b, p_i);
    let k = if p == 2 {
        va + vb + 2 + 3
    } else {
        2 * va.max(vb) + 1
    };
    let mut m: u64 = 1;
    for _ in 0..k {
        m = m.checked_mul(p).ok_or_else(|| Error::CapExceeded("p^k overflow".into()))?;
        if m > work_cap {
            return Err(Error::CapExceeded(format!("p^k = {m} exceeds work cap")));
        }
    }
    let am = (a.rem_euclid(m as i64)) as u64;
    let bm = (b.rem_euclid(m as i64)) as u64;

    // value sets of a*x^2, b*y^2, z^2 mod p^k
    let mut sq = vec![false; m as usize];
    let mut asq = vec![false; m as usize];
    let mut bsq = vec![false; m as usize];
    for x in 0..m {
        let xx = (x * x) % m;
        sq[xx as usize] = true;
        asq[((am * xx) % m) as usize] = true;
        bsq[((bm * xx) % m) as usize] = true;
    }
    // a solution with some unit coordinate exists iff one exists at all
    // (scale by a power of p); normalize that coordinate to 1.
    for z in 0..m {
        // x = 1: z^2 - a = b y^2
        let t = (z * z % m + m - am) % m;
        if bsq[t as usize] {
            return Ok(0);
        }
        // y = 1: z^2 - b = a x^2
        let t = (z * z % m + m - bm) % m;
        if asq[t as usize] {
            return Ok(0);
        }
    }
    for x in 0..m {
        // z = 1: 1 - a x^2 = b y^2
        let t = (1 + m - (am * (x * x % m)) % m) % m;
        if bsq[t as usize] {
            return Ok(0);
        }
    }
    Ok(1)
}
