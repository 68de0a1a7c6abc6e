//! Linear sieve with least-prime-factor, Möbius and omega tables, plus an
//! optional on-disk cache keyed by the bound.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// Hard bound on sieve size; the tables cost 6 bytes per integer.
pub const SIEVE_CAP: u64 = 50_000_000;

const CACHE_MAGIC: &[u8; 8] = b"MALSIEV1";

/// Factorization tables for 0..=limit.
pub struct Sieve {
    limit: u64,
    lpf: Vec<u32>,
    mu: Vec<i8>,
    omega: Vec<u8>,
    primes: Vec<u32>,
}

impl Sieve {
    /// Builds the tables in memory.
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Invalid(format!("sieve limit {limit} too small")));
        }
        if limit > SIEVE_CAP {
            return Err(Error::CapExceeded(format!(
                "sieve limit {limit} exceeds cap {SIEVE_CAP}"
            )));
        }
        let n = limit as usize + 1;
        let mut lpf = vec![0u32; n];
        let mut mu = vec![0i8; n];
        let mut omega = vec![0u8; n];
        let mut primes: Vec<u32> = Vec::new();
        mu[1] = 1;
        for i in 2..n {
            if lpf[i] == 0 {
                lpf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let p = p as usize;
                if p > lpf[i] as usize || i * p >= n {
                    break;
                }
                lpf[i * p] = p as u32;
            }
        }
        // mu/omega filled by a second pass over the lpf structure
        for i in 2..n {
            let p = lpf[i] as usize;
            let rest = i / p;
            if rest % p == 0 {
                mu[i] = 0;
            } else {
                mu[i] = -mu[rest];
            }
            omega[i] = omega[strip(rest, p)] + 1;
        }
        Ok(Sieve { limit, lpf, mu, omega, primes })
    }

    /// Loads from the cache directory if a valid file exists, else builds and
    /// stores. Corrupt cache files are silently rebuilt.
    pub fn load_or_build(limit: u64, cache_dir: Option<&Path>) -> Result<Self> {
        let dir = match cache_dir.map(PathBuf::from).or_else(default_cache_dir) {
            Some(d) => d,
            None => return Self::new(limit),
        };
        let path = dir.join(format!("sieve_{limit}.bin"));
        if let Ok(s) = Self::read_cache(&path, limit) {
            return Ok(s);
        }
        let s = Self::new(limit)?;
        // failure to persist is not an error; the tables are already built
        let _ = s.write_cache(&dir, &path);
        Ok(s)
    }

    fn read_cache(path: &Path, limit: u64) -> Result<Self> {
        let mut f = fs::File::open(path)?;
        let mut header = [0u8; 16];
        f.read_exact(&mut header)?;
        if &header[..8] != CACHE_MAGIC {
            return Err(Error::Invalid("bad sieve cache magic".into()));
        }
        let stored = u64::from_le_bytes(header[8..16].try_into().unwrap());
        if stored != limit {
            return Err(Error::Invalid("sieve cache bound mismatch".into()));
        }
        let n = limit as usize + 1;
        let mut mu_raw = vec![0u8; n];
        f.read_exact(&mut mu_raw)?;
        let mu: Vec<i8> = mu_raw.iter().map(|&b| b as i8).collect();
        let mut omega = vec![0u8; n];
        f.read_exact(&mut omega)?;
        let mut lpf_raw = vec![0u8; n * 4];
        f.read_exact(&mut lpf_raw)?;
        let mut trailing = Vec::new();
        f.read_to_end(&mut trailing)?;
        if !trailing.is_empty() {
            return Err(Error::Invalid("sieve cache has trailing bytes".into()));
        }
        let mut lpf = vec![0u32; n];
        for i in 0..n {
            lpf[i] = u32::from_le_bytes(lpf_raw[i * 4..i * 4 + 4].try_into().unwrap());
        }
        let mut primes = Vec::new();
        for i in 2..n {
            if lpf[i] == i as u32 {
                primes.push(i as u32);
            }
            if lpf[i] == 0 || lpf[i] > i as u32 {
                return Err(Error::Invalid("sieve cache lpf table corrupt".into()));
            }
        }
        Ok(Sieve { limit, lpf, mu, omega, primes })
    }

    fn write_cache(&self, dir: &Path, path: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(CACHE_MAGIC)?;
            f.write_all(&self.limit.to_le_bytes())?;
            let mu_raw: Vec<u8> = self.mu.iter().map(|&b| b as u8).collect();
            f.write_all(&mu_raw)?;
            f.write_all(&self.omega)?;
            let mut lpf_raw = Vec::with_capacity(self.lpf.len() * 4);
            for &v in &self.lpf {
                lpf_raw.extend_from_slice(&v.to_le_bytes());
            }
            f.write_all(&lpf_raw)?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn mu(&self, n: u64) -> i8 {
        self.mu[n as usize]
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        self.mu[n as usize] != 0
    }

    pub fn omega(&self, n: u64) -> u8 {
        self.omega[n as usize]
    }

    pub fn lpf(&self, n: u64) -> u32 {
        self.lpf[n as usize]
    }

    /// Distinct prime factors in increasing order.
    pub fn factor(&self, mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.lpf[n as usize] as u64;
            out.push(p);
            n = strip(n as usize, p as usize) as u64;
        }
        out
    }

    /// Number of squarefree integers in 1..=x.
    pub fn squarefree_count(&self, x: u64) -> u64 {
        assert!(x <= self.limit);
        (1..=x).filter(|&n| self.mu[n as usize] != 0).count() as u64
    }
}

fn strip(mut n: usize, p: usize) -> usize {
    while n % p == 0 {
        n /= p;
    }
    n
}

fn default_cache_dir() -> Option<PathBuf> {
    if let Ok(dir) = std::env::var("MALLE_CACHE_DIR") {
        if !dir.is_empty() {
            return Some(PathBuf::from(dir));
        }
    }
    std::env::var("HOME")
        .ok()
        .filter(|h| !h.is_empty())
        .map(|h| PathBuf::from(h).join(".cache").join("malle"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tables() {
        let s = Sieve::new(100).unwrap();
        assert_eq!(s.mu(1), 1);
        assert_eq!(s.mu(2), -1);
        assert_eq!(s.mu(4), 0);
        assert_eq!(s.mu(6), 1);
        assert_eq!(s.mu(30), -1);
        assert_eq!(s.omega(1), 0);
        assert_eq!(s.omega(12), 2);
        assert_eq!(s.omega(30), 3);
        assert_eq!(s.lpf(91), 7);
        assert_eq!(s.factor(60), vec![2, 3, 5]);
        assert_eq!(s.primes().len(), 25);
    }

    #[test]
    fn squarefree_density_1e6() {
        let s = Sieve::new(1_000_000).unwrap();
        let q = s.squarefree_count(1_000_000);
        // 6/pi^2 = 0.607927...
        assert!(q > 607_000 && q < 608_900, "Q(1e6) = {q}");
        assert_eq!(q, 607_926);
    }

    #[test]
    fn cache_roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let s1 = Sieve::load_or_build(1000, Some(dir.path())).unwrap();
        let path = dir.path().join("sieve_1000.bin");
        assert!(path.exists());
        let s2 = Sieve::load_or_build(1000, Some(dir.path())).unwrap();
        assert_eq!(s1.mu.len(), s2.mu.len());
        for n in 1..=1000u64 {
            assert_eq!(s1.mu(n), s2.mu(n));
            assert_eq!(s1.lpf(n.max(2)), s2.lpf(n.max(2)));
        }
        // corrupt the file; loader must rebuild rather than fail
        std::fs::write(&path, b"garbage").unwrap();
        let s3 = Sieve::load_or_build(1000, Some(dir.path())).unwrap();
        assert_eq!(s3.mu(30), -1);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(Sieve::new(SIEVE_CAP + 1), Err(Error::CapExceeded(_))));
    }
}
