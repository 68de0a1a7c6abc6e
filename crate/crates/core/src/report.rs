//! Deterministic CSV and JSON emission shared by the CLI and the tests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::catalog::catalog_hash;
use crate::group::LGroup;
use crate::param::FactoredTuple;
use crate::Result;

/// Identification block embedded in every emitted report so a run can be
/// reproduced from its output alone.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub version: String,
    pub catalog_hash: String,
    pub seed: u64,
    pub argv: Vec<String>,
}

impl RunConfig {
    pub fn current(seed: u64, argv: Vec<String>) -> Self {
        RunConfig {
            version: env!("CARGO_PKG_VERSION").to_string(),
            catalog_hash: catalog_hash(),
            seed,
            argv,
        }
    }
}

/// Report wrapped with its provenance, serialized with stable key order.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    run: &'a RunConfig,
    report: &'a T,
}

pub fn to_json<T: Serialize>(run: &RunConfig, report: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Envelope { run, report })?)
}

/// Little-endian base-l digit string for an element index; the leftmost
/// character is the lowest digit.
pub fn element_label(l: u8, levels: u32, e: usize) -> String {
    let mut e = e;
    let mut s = String::with_capacity(levels as usize);
    for _ in 0..levels {
        s.push(char::from_digit((e % l as usize) as u32, 10).unwrap());
        e /= l as usize;
    }
    s
}

/// Semicolon-joined g=v pairs over the entries a mode actually assigns;
/// untouched entries stay zero and are omitted.
pub fn tuple_string(g: &LGroup, t: &FactoredTuple) -> String {
    let mut parts = Vec::new();
    for (k, entry) in t.entries.iter().enumerate() {
        if entry.value == 0 {
            continue;
        }
        parts.push(format!("{}={}", element_label(g.l, g.r, k + 1), entry.value));
    }
    parts.join(";")
}

/// Streaming count CSV: one `disc,verdict,tuple` line per enumerated tuple,
/// in enumeration order, LF line endings.
pub struct CsvSink {
    out: BufWriter<File>,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<CsvSink> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(b"disc,verdict,tuple\n")?;
        Ok(CsvSink { out })
    }

    pub fn row(&mut self, g: &LGroup, disc: u64, verdict: &str, t: &FactoredTuple) -> Result<()> {
        writeln!(self.out, "{disc},{verdict},{}", tuple_string(g, t))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Sorted single-column discriminant CSV, as emitted for oracle runs.
pub fn write_disc_csv(path: &Path, discs: &[u128]) -> Result<()> {
    let mut sorted = discs.to_vec();
    sorted.sort_unstable();
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(b"disc\n")?;
    for d in sorted {
        writeln!(out, "{d}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::param::TupleEntry;

    fn entry(value: i64) -> TupleEntry {
        TupleEntry { value, primes: Vec::new(), has_two: false }
    }

    #[test]
    fn labels_are_little_endian_digits() {
        assert_eq!(element_label(2, 3, 5), "101");
        assert_eq!(element_label(2, 3, 1), "100");
        assert_eq!(element_label(3, 3, 5), "210");
        assert_eq!(element_label(2, 6, 33), "100001");
    }

    #[test]
    fn tuple_string_skips_unassigned_entries() {
        let g = &builtin("Q8").unwrap().group;
        let t = FactoredTuple {
            l: 2,
            entries: vec![
                entry(0),
                entry(-3),
                entry(0),
                entry(0),
                entry(5),
                entry(0),
                entry(1),
            ],
        };
        assert_eq!(tuple_string(g, &t), "010=-3;101=5;111=1");
    }

    #[test]
    fn csv_bytes_are_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let g = &builtin("C2").unwrap().group;
        let t = FactoredTuple { l: 2, entries: vec![entry(-7)] };
        let mut sink = CsvSink::create(&path).unwrap();
        sink.row(g, 7, "epi", &t).unwrap();
        sink.row(g, 21, "obstructed", &t).unwrap();
        sink.finish().unwrap();
        let body = std::fs::read(&path).unwrap();
        assert_eq!(body, b"disc,verdict,tuple\n7,epi,1=-7\n21,obstructed,1=-7\n");
    }

    #[test]
    fn disc_csv_is_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("discs.csv");
        write_disc_csv(&path, &[21, 5, 8]).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"disc\n5\n8\n21\n");
    }

    #[test]
    fn run_config_captures_catalog_identity() {
        let rc = RunConfig::current(7, vec!["malle".into(), "count".into()]);
        assert_eq!(rc.catalog_hash.len(), 16);
        assert!(!rc.version.is_empty());
        let js = to_json(&rc, &42u32).unwrap();
        assert!(js.contains("\"report\": 42"));
        assert!(js.contains("\"seed\": 7"));
    }
}
