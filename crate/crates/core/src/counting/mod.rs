//! Enumerates squarefree tuples under an exact height budget and tallies
//! upper, exactly-bracketed, and heuristic counts with dyadic windows.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use crate::arith::Sieve;
use crate::catalog::CatalogEntry;
use crate::group::LGroup;
use crate::param::{solve, CubicCache, FactoredTuple, TupleEntry, Verdict};
use crate::{Error, Result};

mod fit;
pub(crate) use fit::linreg;
pub use fit::{fit_exponent, fit_log_power, FitReport, MIN_WINDOW_COUNT};

/// Height bounds above this are rejected; keeps every reported value in u64
/// and every intermediate product comfortably inside u128.
pub const MAX_X: u64 = 10_000_000_000_000_000;

/// Settings shared by the counting modes.
#[derive(Debug, Clone)]
pub struct EnumConfig {
    /// Bound on the tuple height, the product of |v_g|^{e_g}.
    pub x: u64,
    /// Restrict to tuples whose assembled characters are unramified at 2:
    /// odd entries, sign overlay forced by the mod-4 residues.
    pub two_unramified: bool,
    /// Forbid the factor 2 in entries while keeping all sign overlays.
    pub odd_only: bool,
    /// Splitting degree for the heuristic prime thinning; None means l - 1.
    pub d: Option<u64>,
    pub shards: u32,
    pub shard: u32,
    /// Collect the discriminant multiset of the epimorphism verdicts.
    pub collect_discs: bool,
    /// Sieve cache directory; None falls back to the MALLE_CACHE_DIR default.
    pub cache_dir: Option<PathBuf>,
}

impl EnumConfig {
    pub fn new(x: u64) -> Self {
        EnumConfig {
            x,
            two_unramified: false,
            odd_only: false,
            d: None,
            shards: 1,
            shard: 0,
            collect_discs: false,
            cache_dir: None,
        }
    }
}

/// Cumulative count at one dyadic height bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Window {
    pub x: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub group: String,
    pub mode: String,
    pub x: u64,
    /// Verified epimorphisms (exact mode only).
    pub lower: u64,
    /// lower + unknown_tuples; equals the tuple total in upper mode.
    pub upper: u64,
    pub unknown_tuples: u64,
    pub obstructed: u64,
    /// Tuples enumerated, sign overlays included.
    pub tuples: u64,
    pub heuristic: f64,
    /// Cumulative counts of the headline quantity (epis for exact mode,
    /// tuples otherwise) at x, x/2, x/4, ...; ascending in x.
    pub windows: Vec<Window>,
    /// Cumulative counts of all enumerated tuples; exact mode only, where
    /// it differs from `windows`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tuple_windows: Vec<Window>,
    /// Windowed events whose non-locus height part exceeds sqrt(x); a
    /// convergence monitor for the base-point decomposition of the count.
    pub tail_count: u64,
    pub tail_share: f64,
    pub shards: u32,
    pub shard: u32,
    pub elapsed_ms: u64,
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub epi_discs: Vec<u64>,
}

/// Receives (height, verdict label, tuple) for every enumerated tuple.
pub type RowSink<'a> = dyn FnMut(u64, &str, &FactoredTuple) -> Result<()> + 'a;

#[derive(Debug, Clone, Copy)]
struct Variable {
    elem: usize,
    weight: u32,
    in_locus: bool,
}

/// One variable per nonidentity element, heaviest weight first.
fn element_variables(g: &LGroup) -> Vec<Variable> {
    let locus = g.involution_locus();
    let mut vars: Vec<Variable> = (1..g.order)
        .map(|e| Variable {
            elem: e,
            weight: g.disc_exponent(e) as u32,
            in_locus: locus.contains(&(e as u16)),
        })
        .collect();
    vars.sort_by(|a, b| b.weight.cmp(&a.weight).then(a.elem.cmp(&b.elem)));
    vars
}

/// One variable per conjugacy class inside the order-l locus.
fn class_variables(g: &LGroup) -> Vec<Variable> {
    let mut vars: Vec<Variable> = g
        .classes_in_locus()
        .into_iter()
        .map(|ci| {
            let rep = g.classes()[ci][0] as usize;
            Variable { elem: rep, weight: g.disc_exponent(rep) as u32, in_locus: true }
        })
        .collect();
    vars.sort_by(|a, b| b.weight.cmp(&a.weight).then(a.elem.cmp(&b.elem)));
    vars
}

fn ipow(v: u64, e: u32) -> u128 {
    let mut acc = 1u128;
    for _ in 0..e {
        acc = acc.saturating_mul(v as u128);
    }
    acc
}

/// Largest v with v^e <= b.
fn iroot(b: u128, e: u32) -> u64 {
    debug_assert!(e >= 1);
    if e == 1 {
        return u64::try_from(b).unwrap_or(u64::MAX);
    }
    let mut r = (b as f64).powf(1.0 / e as f64) as u64 + 2;
    while r > 0 && ipow(r, e) > b {
        r -= 1;
    }
    r
}

#[derive(Debug, Clone)]
struct Slot {
    value: u64,
    primes: Vec<u64>,
    has_two: bool,
}

struct Walker<'a> {
    sieve: &'a Sieve,
    vars: &'a [Variable],
    /// Permit a single factor of 2 across the whole tuple.
    allow_two: bool,
    /// When > 1, odd primes must be congruent to 1 modulo this.
    prime_mod: u64,
    exclude_p: u64,
    shards: u64,
    shard: u64,
}

impl Walker<'_> {
    fn admissible(&self, odd: u64, used: &[u64]) -> bool {
        let mut n = odd;
        while n > 1 {
            let p = self.sieve.lpf(n) as u64;
            if self.prime_mod > 1 && p % self.prime_mod != 1 {
                return false;
            }
            if p == self.exclude_p || used.contains(&p) {
                return false;
            }
            n /= p;
        }
        true
    }

    fn run<F>(&self, x: u128, f: &mut F) -> Result<()>
    where
        F: FnMut(&[Slot], u128, u128) -> Result<()>,
    {
        let mut slots: Vec<Slot> = self
            .vars
            .iter()
            .map(|_| Slot { value: 1, primes: Vec::new(), has_two: false })
            .collect();
        let mut used: Vec<u64> = Vec::new();
        self.rec(0, x, 1, 1, false, &mut used, &mut slots, f)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec<F>(
        &self,
        depth: usize,
        budget: u128,
        height: u128,
        base_height: u128,
        two_used: bool,
        used: &mut Vec<u64>,
        slots: &mut Vec<Slot>,
        f: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&[Slot], u128, u128) -> Result<()>,
    {
        if depth == self.vars.len() {
            return f(slots, height, base_height);
        }
        let var = self.vars[depth];
        let cap = iroot(budget, var.weight);
        for v in 1..=cap {
            if depth == 0 && self.shards > 1 && v % self.shards != self.shard {
                continue;
            }
            if !self.sieve.is_squarefree(v) {
                continue;
            }
            let even = v % 2 == 0;
            if even && (!self.allow_two || two_used) {
                continue;
            }
            let odd = if even { v / 2 } else { v };
            if !self.admissible(odd, used) {
                continue;
            }
            let hv = ipow(v, var.weight);
            slots[depth] = Slot { value: v, primes: self.sieve.factor(odd), has_two: even };
            let added = slots[depth].primes.len();
            used.extend_from_slice(&slots[depth].primes);
            let next_base = if var.in_locus { base_height } else { base_height * hv };
            self.rec(
                depth + 1,
                budget / hv,
                height * hv,
                next_base,
                two_used || even,
                used,
                slots,
                f,
            )?;
            used.truncate(used.len() - added);
        }
        Ok(())
    }
}

/// Histogram over dyadic height ranges; bucket k holds heights h with
/// floor(x / h) in [2^k, 2^{k+1}).
struct Buckets {
    x: u128,
    counts: Vec<u64>,
}

impl Buckets {
    fn new(x: u64) -> Self {
        let n = if x == 0 { 0 } else { x.ilog2() as usize + 1 };
        Buckets { x: x as u128, counts: vec![0; n] }
    }

    fn add(&mut self, h: u128, inc: u64) {
        debug_assert!(h >= 1 && h <= self.x);
        let k = ((self.x / h) as u64).ilog2() as usize;
        self.counts[k] += inc;
    }

    fn windows(&self, x: u64) -> Vec<Window> {
        let mut out = Vec::with_capacity(self.counts.len());
        let mut acc = 0u64;
        for k in (0..self.counts.len()).rev() {
            acc += self.counts[k];
            out.push(Window { x: x >> k, count: acc });
        }
        out
    }
}

fn validate(entry: &CatalogEntry, cfg: &EnumConfig) -> Result<()> {
    if cfg.x > MAX_X {
        return Err(Error::CapExceeded(format!("X = {} exceeds {}", cfg.x, MAX_X)));
    }
    if cfg.shards == 0 || cfg.shard >= cfg.shards {
        return Err(Error::Invalid(format!(
            "shard {} out of range for {} shards",
            cfg.shard, cfg.shards
        )));
    }
    if cfg.two_unramified && entry.group.l != 2 {
        return Err(Error::Invalid(
            "the 2-unramified restriction only applies to l = 2".into(),
        ));
    }
    Ok(())
}

fn build_sieve(cfg: &EnumConfig, vars: &[Variable]) -> Result<Sieve> {
    let min_w = vars.iter().map(|v| v.weight).min().unwrap_or(1);
    let limit = iroot(cfg.x as u128, min_w).max(16);
    Sieve::load_or_build(limit, cfg.cache_dir.as_deref())
}

fn walker<'a>(
    sieve: &'a Sieve,
    vars: &'a [Variable],
    entry: &CatalogEntry,
    cfg: &EnumConfig,
) -> Walker<'a> {
    let l = entry.group.l;
    Walker {
        sieve,
        vars,
        allow_two: l == 2 && !cfg.two_unramified && !cfg.odd_only,
        prime_mod: if l == 2 { 1 } else { l as u64 },
        exclude_p: 0,
        shards: cfg.shards as u64,
        shard: cfg.shard as u64,
    }
}

/// Sign overlay forced by unramifiedness at 2: the entry at the element
/// whose character digits are the mod-4 sign obstructions gets the sign.
fn forced_overlay(g: &LGroup, vars: &[Variable], slots: &[Slot]) -> usize {
    let mut sigma = 0usize;
    for j in 1..=g.r {
        let mut w = 1u64;
        for (var, slot) in vars.iter().zip(slots) {
            if g.digit(var.elem, j) == 1 {
                w = w * (slot.value % 4) % 4;
            }
        }
        if w == 3 {
            sigma += 1 << (j - 1);
        }
    }
    sigma
}

struct Tally {
    buckets: Buckets,
    tuple_buckets: Option<Buckets>,
    threshold: u128,
    lower: u64,
    unknown: u64,
    obstructed: u64,
    tuples: u64,
    tail: u64,
    discs: Vec<u64>,
}

impl Tally {
    fn new(x: u64, split_windows: bool) -> Self {
        Tally {
            buckets: Buckets::new(x),
            tuple_buckets: split_windows.then(|| Buckets::new(x)),
            threshold: iroot(x as u128, 2) as u128,
            lower: 0,
            unknown: 0,
            obstructed: 0,
            tuples: 0,
            tail: 0,
            discs: Vec::new(),
        }
    }

    fn windowed(&mut self, height: u128, base_height: u128, inc: u64) {
        self.buckets.add(height, inc);
        if base_height > self.threshold {
            self.tail += inc;
        }
    }

    fn report(self, entry: &CatalogEntry, cfg: &EnumConfig, mode: &str, start: Instant) -> CountReport {
        let windowed_total = self.buckets.counts.iter().sum::<u64>();
        let (lower, upper) = match mode {
            "exact" => (self.lower, self.lower + self.unknown),
            _ => (0, self.tuples),
        };
        CountReport {
            group: entry.name.clone(),
            mode: mode.into(),
            x: cfg.x,
            lower,
            upper,
            unknown_tuples: self.unknown,
            obstructed: self.obstructed,
            tuples: self.tuples,
            heuristic: 0.0,
            windows: self.buckets.windows(cfg.x),
            tuple_windows: self
                .tuple_buckets
                .map_or_else(Vec::new, |b| b.windows(cfg.x)),
            tail_count: self.tail,
            tail_share: if windowed_total == 0 {
                0.0
            } else {
                self.tail as f64 / windowed_total as f64
            },
            shards: cfg.shards,
            shard: cfg.shard,
            elapsed_ms: start.elapsed().as_millis() as u64,
            note: None,
            epi_discs: self.discs,
        }
    }
}

/// Count all tuples under the height bound with no solvability filtering.
pub fn count_upper(
    entry: &CatalogEntry,
    cfg: &EnumConfig,
    mut sink: Option<&mut RowSink<'_>>,
) -> Result<CountReport> {
    let start = Instant::now();
    validate(entry, cfg)?;
    let g = &entry.group;
    let vars = element_variables(g);
    let sieve = build_sieve(cfg, &vars)?;
    let w = walker(&sieve, &vars, entry, cfg);
    let mut tally = Tally::new(cfg.x, false);
    let mut tuple = blank_tuple(g);
    w.run(cfg.x as u128, &mut |slots, height, base_h| {
        let overlays = overlay_count(g, cfg, height, &vars, slots);
        if overlays == 0 {
            return Ok(());
        }
        tally.tuples += overlays;
        tally.windowed(height, base_h, overlays);
        if let Some(s) = sink.as_deref_mut() {
            install(&mut tuple, &vars, slots);
            for sigma in overlay_list(g, cfg, height, &vars, slots) {
                with_overlay(&mut tuple, sigma, |t| s(height as u64, "tuple", t))?;
            }
        }
        Ok(())
    })?;
    Ok(tally.report(entry, cfg, "upper", start))
}

/// Count tuples and decide each one, bracketing the epimorphism count.
pub fn count_exact(
    entry: &CatalogEntry,
    cfg: &EnumConfig,
    mut sink: Option<&mut RowSink<'_>>,
) -> Result<CountReport> {
    let start = Instant::now();
    validate(entry, cfg)?;
    let g = &entry.group;
    let vars = element_variables(g);
    let sieve = build_sieve(cfg, &vars)?;
    let w = walker(&sieve, &vars, entry, cfg);
    let mut tally = Tally::new(cfg.x, true);
    let mut cubic = CubicCache::default();
    let mut tuple = blank_tuple(g);
    w.run(cfg.x as u128, &mut |slots, height, base_h| {
        let overlays = overlay_list(g, cfg, height, &vars, slots);
        if overlays.is_empty() {
            return Ok(());
        }
        install(&mut tuple, &vars, slots);
        for sigma in overlays {
            if let Some(b) = tally.tuple_buckets.as_mut() {
                b.add(height, 1);
            }
            let verdict = with_overlay(&mut tuple, sigma, |t| solve(entry, t, &mut cubic))?;
            tally.tuples += 1;
            match &verdict {
                Verdict::Surjective(data) => {
                    tally.lower += 1;
                    tally.windowed(height, base_h, 1);
                    if cfg.collect_discs {
                        let d = data
                            .disc
                            .and_then(|d| u64::try_from(d).ok())
                            .ok_or_else(|| {
                                Error::TooLarge("collected discriminant exceeds u64".into())
                            })?;
                        tally.discs.push(d);
                    }
                }
                Verdict::Obstructed(_) => tally.obstructed += 1,
                Verdict::Undecided { .. } => tally.unknown += 1,
            }
            if let Some(s) = sink.as_deref_mut() {
                let label = verdict.label();
                with_overlay(&mut tuple, sigma, |t| s(height as u64, &label, t))?;
            }
        }
        Ok(())
    })?;
    Ok(tally.report(entry, cfg, "exact", start))
}

/// Weighted model count: one variable per locus class over thinned prime
/// supports. The class-size weight (1 / #Conj)^omega summed over all element
/// refinements of a class tuple telescopes to exactly 1, so the tally is an
/// integer.
pub fn count_heuristic(
    entry: &CatalogEntry,
    cfg: &EnumConfig,
    mut sink: Option<&mut RowSink<'_>>,
) -> Result<CountReport> {
    let start = Instant::now();
    validate(entry, cfg)?;
    let g = &entry.group;
    let l = g.l as u64;
    let d = cfg.d.unwrap_or(l - 1);
    if d == 0 || (l - 1) % d != 0 {
        return Err(Error::Invalid(format!(
            "cyclotomic splitting degree {d} does not divide l - 1 = {}",
            l - 1
        )));
    }
    let vars = class_variables(g);
    let sieve = build_sieve(cfg, &vars)?;
    let mut w = walker(&sieve, &vars, entry, cfg);
    w.allow_two = false;
    // d < l - 1 keeps all tame residues; d = l - 1 thins to 1 mod l
    w.prime_mod = if d == l - 1 { l } else { 1 };
    w.exclude_p = if l > 2 { l } else { 0 };
    let mut tally = Tally::new(cfg.x, false);
    let mut tuple = blank_tuple(g);
    w.run(cfg.x as u128, &mut |slots, height, base_h| {
        if height == 1 {
            return Ok(());
        }
        tally.tuples += 1;
        tally.windowed(height, base_h, 1);
        if let Some(s) = sink.as_deref_mut() {
            install(&mut tuple, &vars, slots);
            s(height as u64, "heuristic", &tuple)?;
            clear(&mut tuple, &vars);
        }
        Ok(())
    })?;
    let mut report = tally.report(entry, cfg, "heuristic", start);
    report.heuristic = report.tuples as f64;
    report.note = Some(
        "class-weighted model count; local conditions at primes outside the \
         order-l locus are not modelled"
            .into(),
    );
    Ok(report)
}

fn blank_tuple(g: &LGroup) -> FactoredTuple {
    FactoredTuple {
        l: g.l,
        entries: (1..g.order)
            .map(|_| TupleEntry { value: 1, primes: Vec::new(), has_two: false })
            .collect(),
    }
}

fn install(tuple: &mut FactoredTuple, vars: &[Variable], slots: &[Slot]) {
    for (var, slot) in vars.iter().zip(slots) {
        tuple.entries[var.elem - 1] = TupleEntry {
            value: slot.value as i64,
            primes: slot.primes.clone(),
            has_two: slot.has_two,
        };
    }
}

fn clear(tuple: &mut FactoredTuple, vars: &[Variable]) {
    for var in vars {
        tuple.entries[var.elem - 1] = TupleEntry { value: 1, primes: Vec::new(), has_two: false };
    }
}

fn with_overlay<T>(
    tuple: &mut FactoredTuple,
    sigma: usize,
    f: impl FnOnce(&FactoredTuple) -> T,
) -> T {
    if sigma > 0 {
        tuple.entries[sigma - 1].value = -tuple.entries[sigma - 1].value;
    }
    let out = f(tuple);
    if sigma > 0 {
        tuple.entries[sigma - 1].value = -tuple.entries[sigma - 1].value;
    }
    out
}

/// Sign placements for one positive core. The everywhere-trivial tuple is
/// excluded; for odd l the sign is not a tuple datum.
fn overlay_list(
    g: &LGroup,
    cfg: &EnumConfig,
    height: u128,
    vars: &[Variable],
    slots: &[Slot],
) -> Vec<usize> {
    if g.l != 2 {
        return if height == 1 { Vec::new() } else { vec![0] };
    }
    if cfg.two_unramified {
        let sigma = forced_overlay(g, vars, slots);
        return if sigma == 0 && height == 1 { Vec::new() } else { vec![sigma] };
    }
    let mut out: Vec<usize> = (0..g.order).collect();
    if height == 1 {
        out.remove(0);
    }
    out
}

fn overlay_count(
    g: &LGroup,
    cfg: &EnumConfig,
    height: u128,
    vars: &[Variable],
    slots: &[Slot],
) -> u64 {
    overlay_list(g, cfg, height, vars, slots).len() as u64
}

/// Combine per-shard reports of one logical run.
pub fn merge_reports(parts: &[CountReport]) -> Result<CountReport> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Invalid("no shard reports to merge".into()))?;
    if parts.len() != first.shards as usize {
        return Err(Error::Invalid(format!(
            "have {} reports for {} shards",
            parts.len(),
            first.shards
        )));
    }
    let mut seen = vec![false; parts.len()];
    let mut out = first.clone();
    out.lower = 0;
    out.upper = 0;
    out.unknown_tuples = 0;
    out.obstructed = 0;
    out.tuples = 0;
    out.heuristic = 0.0;
    out.tail_count = 0;
    out.epi_discs.clear();
    for w in &mut out.windows {
        w.count = 0;
    }
    for w in &mut out.tuple_windows {
        w.count = 0;
    }
    for p in parts {
        if p.group != first.group || p.mode != first.mode || p.x != first.x
            || p.shards != first.shards || p.windows.len() != out.windows.len()
            || p.tuple_windows.len() != out.tuple_windows.len()
        {
            return Err(Error::Invalid("shard reports disagree on the run".into()));
        }
        let idx = p.shard as usize;
        if seen[idx] {
            return Err(Error::Invalid(format!("duplicate shard {idx}")));
        }
        seen[idx] = true;
        out.lower += p.lower;
        out.upper += p.upper;
        out.unknown_tuples += p.unknown_tuples;
        out.obstructed += p.obstructed;
        out.tuples += p.tuples;
        out.heuristic += p.heuristic;
        out.tail_count += p.tail_count;
        out.epi_discs.extend_from_slice(&p.epi_discs);
        for (w, pw) in out.windows.iter_mut().zip(&p.windows) {
            if w.x != pw.x {
                return Err(Error::Invalid("shard windows disagree".into()));
            }
            w.count += pw.count;
        }
        for (w, pw) in out.tuple_windows.iter_mut().zip(&p.tuple_windows) {
            if w.x != pw.x {
                return Err(Error::Invalid("shard windows disagree".into()));
            }
            w.count += pw.count;
        }
        out.elapsed_ms = out.elapsed_ms.max(p.elapsed_ms);
    }
    let windowed_total = out.windows.last().map_or(0, |w| w.count);
    out.tail_share = if windowed_total == 0 {
        0.0
    } else {
        out.tail_count as f64 / windowed_total as f64
    };
    out.epi_discs.sort_unstable();
    out.shards = 1;
    out.shard = 0;
    Ok(out)
}
