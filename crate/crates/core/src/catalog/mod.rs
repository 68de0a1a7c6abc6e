//! Built-in group presentations with their local-condition step lists, plus
//! JSON load/store for user-supplied towers.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::group::{tower_from_chain, CocycleTable, CocycleTower, ConcreteGroup, LGroup};
use crate::{Error, Result};

/// One factor of a cup-expression term: an assembled coordinate character or
/// a constant character.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CupFactor {
    Coord(u32),
    Const(i64),
}

/// How the level-i local conditions are evaluated. `Trivial` layers demand
/// character independence; `Cup` layers vanish of the listed sum of symbols
/// at every place; `Frob` layers use lift tests on inertia/Frobenius data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepSpec {
    Trivial,
    Cup(Vec<(CupFactor, CupFactor)>),
    Frob,
}

/// A named tower group together with its step list.
pub struct CatalogEntry {
    pub name: String,
    pub group: LGroup,
    pub steps: Vec<StepSpec>,
}

pub const NAMES: [&str; 11] = [
    "C2", "C4", "C8", "V4", "C2xC2xC2", "C2xC4", "C2xC2xC4", "D4", "Q8", "Heis27", "U64",
];

/// Builds a built-in entry; names are case-insensitive, "C2xC2" is accepted
/// for V4.
pub fn builtin(name: &str) -> Result<CatalogEntry> {
    let canonical = match name.to_ascii_uppercase().as_str() {
        "C2" => "C2",
        "C4" => "C4",
        "C8" => "C8",
        "V4" | "C2XC2" => "V4",
        "C2XC2XC2" => "C2xC2xC2",
        "C2XC4" => "C2xC4",
        "C2XC2XC4" => "C2xC2xC4",
        "D4" => "D4",
        "Q8" => "Q8",
        "HEIS27" => "Heis27",
        "U64" => "U64",
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    let file = builtin_file(canonical);
    entry_from_file(file)
}

fn zeros(n: usize) -> Vec<u8> {
    vec![0; n * n]
}

fn table_from_fn(n: usize, f: impl Fn(usize, usize) -> u8) -> Vec<u8> {
    let mut t = vec![0u8; n * n];
    for g in 0..n {
        for h in 0..n {
            t[g * n + h] = f(g, h);
        }
    }
    t
}

fn carry2() -> Vec<u8> {
    table_from_fn(2, |g, h| (g == 1 && h == 1) as u8)
}

fn builtin_file(name: &str) -> CatalogFile {
    let trivial = StepDto::Trivial;
    let cup = |terms: Vec<(FactorDto, FactorDto)>| StepDto::Cup { terms };
    let coord = FactorDto::Coord { coord: 1 };
    let coord2 = FactorDto::Coord { coord: 2 };
    let minus1 = FactorDto::Const { value: -1 };
    match name {
        "C2" => CatalogFile {
            name: "C2".into(),
            l: 2,
            tables: vec![zeros(1)],
            steps: vec![trivial],
        },
        "C4" => CatalogFile {
            name: "C4".into(),
            l: 2,
            tables: vec![zeros(1), carry2()],
            steps: vec![trivial, cup(vec![(coord, minus1)])],
        },
        "C8" => CatalogFile {
            name: "C8".into(),
            l: 2,
            tables: vec![
                zeros(1),
                carry2(),
                // carry Z/8 -> Z/4 written on digit pairs
                table_from_fn(4, |g, h| {
                    let (g1, g2) = (g & 1, g >> 1);
                    let (h1, h2) = (h & 1, h >> 1);
                    ((g1 * h1 * g2 + g1 * h1 * h2 + g2 * h2) % 2) as u8
                }),
            ],
            steps: vec![trivial, cup(vec![(coord, minus1)]), StepDto::Frob],
        },
        "V4" => CatalogFile {
            name: "V4".into(),
            l: 2,
            tables: vec![zeros(1), zeros(2)],
            steps: vec![trivial.clone(), trivial],
        },
        "C2xC2xC2" => CatalogFile {
            name: "C2xC2xC2".into(),
            l: 2,
            tables: vec![zeros(1), zeros(2), zeros(4)],
            steps: vec![trivial.clone(), trivial.clone(), trivial],
        },
        "C2xC4" => CatalogFile {
            name: "C2xC4".into(),
            l: 2,
            tables: vec![
                zeros(1),
                zeros(2),
                table_from_fn(4, |g, h| ((g & 1) * (h & 1)) as u8),
            ],
            steps: vec![trivial.clone(), trivial, cup(vec![(coord, minus1)])],
        },
        "C2xC2xC4" => CatalogFile {
            name: "C2xC2xC4".into(),
            l: 2,
            tables: vec![
                zeros(1),
                zeros(2),
                zeros(4),
                table_from_fn(8, |g, h| ((g & 1) * (h & 1)) as u8),
            ],
            steps: vec![trivial.clone(), trivial.clone(), trivial, cup(vec![(coord, minus1)])],
        },
        "D4" => CatalogFile {
            name: "D4".into(),
            l: 2,
            tables: vec![
                zeros(1),
                zeros(2),
                table_from_fn(4, |g, h| {
                    let (a, b) = (g & 1, (g >> 1) & 1);
                    let a1 = h & 1;
                    ((a * a1 + a1 * b) % 2) as u8
                }),
            ],
            steps: vec![
                trivial.clone(),
                trivial,
                cup(vec![(coord, coord), (coord2, coord)]),
            ],
        },
        "Q8" => CatalogFile {
            name: "Q8".into(),
            l: 2,
            tables: vec![
                zeros(1),
                zeros(2),
                table_from_fn(4, |g, h| {
                    let (a, b) = (g & 1, (g >> 1) & 1);
                    let (a1, b1) = (h & 1, (h >> 1) & 1);
                    ((a * a1 + b * a1 + b * b1) % 2) as u8
                }),
            ],
            steps: vec![
                trivial.clone(),
                trivial,
                cup(vec![(coord, coord), (coord2, coord), (coord2, coord2)]),
            ],
        },
        "Heis27" => CatalogFile {
            name: "Heis27".into(),
            l: 3,
            tables: vec![
                zeros(1),
                zeros(3),
                table_from_fn(9, |g, h| (((g % 3) * (h / 3)) % 3) as u8),
            ],
            steps: vec![trivial.clone(), trivial, StepDto::Frob],
        },
        "U64" => u64_file(),
        _ => unreachable!("unknown builtin {name}"),
    }
}

/// The order-64 group R x| F2^2 with R = F2[x1,x2]/(x1^2, x2^2): a nibble
/// over the basis (1, x1, x2, x1x2) and two twist bits acting by
/// multiplication with (1+x1)^t1 (1+x2)^t2.
fn u64_concrete() -> ConcreteGroup {
    let act = |t: usize, b: usize| -> usize {
        let mut c = [b & 1, (b >> 1) & 1, (b >> 2) & 1, (b >> 3) & 1];
        if t & 1 == 1 {
            // multiply by 1 + x1
            c = [c[0], c[0] ^ c[1], c[2], c[2] ^ c[3]];
        }
        if t & 2 == 2 {
            // multiply by 1 + x2
            c = [c[0], c[1], c[0] ^ c[2], c[1] ^ c[3]];
        }
        c[0] | c[1] << 1 | c[2] << 2 | c[3] << 3
    };
    let mut mul = vec![0u16; 64 * 64];
    for a in 0..16 {
        for t in 0..4 {
            for b in 0..16 {
                for s in 0..4 {
                    let left = a | t << 4;
                    let right = b | s << 4;
                    let prod = (a ^ act(t, b)) | (t ^ s) << 4;
                    mul[left * 64 + right] = prod as u16;
                }
            }
        }
    }
    ConcreteGroup::new(64, mul).expect("valid model")
}

fn u64_file() -> CatalogFile {
    let g = u64_concrete();
    // ascending central chain: <x1x2>, <x1,x1x2>, ideal (x1,x2), R, R+one
    // twist, G; layer quotients all have order 2
    let x1 = 2u16;
    let x1x2 = 8u16;
    let chain: Vec<Vec<u16>> = vec![
        vec![0],
        vec![0, x1x2],
        vec![0, x1, x1x2, x1 ^ x1x2],
        (0..16u16).filter(|a| a & 1 == 0).collect(),
        (0..16u16).collect(),
        (0..32u16).collect(),
        (0..64u16).collect(),
    ];
    let (tower, _) = tower_from_chain(&g, 2, &chain).expect("valid chain");
    let tables = tower.tables.iter().map(|t| t.entries().to_vec()).collect();
    let steps = tower
        .tables
        .iter()
        .map(|t| if t.is_zero() { StepDto::Trivial } else { StepDto::Frob })
        .collect();
    CatalogFile { name: "U64".into(), l: 2, tables, steps }
}

// JSON layer

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    name: String,
    l: u8,
    tables: Vec<Vec<u8>>,
    steps: Vec<StepDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum StepDto {
    Trivial,
    Cup { terms: Vec<(FactorDto, FactorDto)> },
    Frob,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum FactorDto {
    Coord {
        coord: u32,
    },
    Const {
        #[serde(rename = "const")]
        value: i64,
    },
}

fn entry_from_file(file: CatalogFile) -> Result<CatalogEntry> {
    let mut tables = Vec::new();
    let mut level_order = 1usize;
    for t in &file.tables {
        tables.push(CocycleTable::new(file.l, level_order, t.clone())?);
        level_order = level_order
            .checked_mul(file.l as usize)
            .ok_or_else(|| Error::TooLarge("tower too deep".into()))?;
    }
    let tower = CocycleTower::new(file.l, tables)?;
    let group = LGroup::from_tower(tower)?;
    if file.steps.len() != group.r as usize {
        return Err(Error::StepMismatch(format!(
            "{} steps for a depth-{} tower",
            file.steps.len(),
            group.r
        )));
    }
    let mut steps = Vec::new();
    for (i, dto) in file.steps.iter().enumerate() {
        let level = i as u32 + 1;
        let table_zero = group.tower.tables[i].is_zero();
        let step = match dto {
            StepDto::Trivial => {
                if !table_zero {
                    return Err(Error::StepMismatch(format!(
                        "level {level} marked trivial but its table is nonzero"
                    )));
                }
                StepSpec::Trivial
            }
            StepDto::Cup { terms } => {
                if table_zero {
                    return Err(Error::StepMismatch(format!(
                        "level {level} has a cup expression over a zero table"
                    )));
                }
                let mut parsed = Vec::new();
                for (a, b) in terms {
                    parsed.push((parse_factor(*a, level)?, parse_factor(*b, level)?));
                }
                StepSpec::Cup(parsed)
            }
            StepDto::Frob => {
                if table_zero {
                    return Err(Error::StepMismatch(format!(
                        "level {level} uses lift tests over a zero table"
                    )));
                }
                StepSpec::Frob
            }
        };
        steps.push(step);
    }
    Ok(CatalogEntry { name: file.name, group, steps })
}

fn parse_factor(f: FactorDto, level: u32) -> Result<CupFactor> {
    match f {
        FactorDto::Coord { coord } => {
            if coord == 0 || coord >= level {
                return Err(Error::StepMismatch(format!(
                    "coordinate {coord} not available below level {level}"
                )));
            }
            Ok(CupFactor::Coord(coord))
        }
        FactorDto::Const { value } => {
            if value == 0 {
                return Err(Error::StepMismatch("constant factor must be nonzero".into()));
            }
            Ok(CupFactor::Const(value))
        }
    }
}

fn file_from_entry(entry: &CatalogEntry) -> CatalogFile {
    CatalogFile {
        name: entry.name.clone(),
        l: entry.group.l,
        tables: entry.group.tower.tables.iter().map(|t| t.entries().to_vec()).collect(),
        steps: entry
            .steps
            .iter()
            .map(|s| match s {
                StepSpec::Trivial => StepDto::Trivial,
                StepSpec::Frob => StepDto::Frob,
                StepSpec::Cup(terms) => StepDto::Cup {
                    terms: terms
                        .iter()
                        .map(|(a, b)| (factor_dto(*a), factor_dto(*b)))
                        .collect(),
                },
            })
            .collect(),
    }
}

fn factor_dto(f: CupFactor) -> FactorDto {
    match f {
        CupFactor::Coord(c) => FactorDto::Coord { coord: c },
        CupFactor::Const(v) => FactorDto::Const { value: v },
    }
}

/// Serializes an entry to the JSON exchange format.
pub fn to_json(entry: &CatalogEntry) -> Result<String> {
    Ok(serde_json::to_string_pretty(&file_from_entry(entry))?)
}

/// Parses and fully validates an entry from JSON.
pub fn from_json(json: &str) -> Result<CatalogEntry> {
    let file: CatalogFile = serde_json::from_str(json)?;
    entry_from_file(file)
}

/// Loads an entry from a JSON file.
pub fn load(path: &std::path::Path) -> Result<CatalogEntry> {
    from_json(&std::fs::read_to_string(path)?)
}

/// Resolves a group argument: a built-in name or a path to a JSON file.
pub fn resolve(spec: &str) -> Result<CatalogEntry> {
    match builtin(spec) {
        Ok(e) => Ok(e),
        Err(Error::UnknownName(_)) if std::path::Path::new(spec).exists() => {
            load(std::path::Path::new(spec))
        }
        Err(e) => Err(e),
    }
}

/// Hash of the canonical serialization of every built-in entry; reports pin
/// this so results can be tied to the shipped tables.
pub fn catalog_hash() -> String {
    let mut hasher = Sha256::new();
    for name in NAMES {
        let entry = builtin(name).expect("builtin valid");
        hasher.update(to_json(&entry).expect("serializable").as_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_construct() {
        for name in NAMES {
            let e = builtin(name).unwrap();
            assert_eq!(e.steps.len(), e.group.r as usize, "{name}");
        }
    }

    #[test]
    fn census_table() {
        // name, order, exponent, #locus, rank (None = not a subspace),
        // classes-in-locus
        let expect: [(&str, usize, u32, usize, Option<u32>, usize); 11] = [
            ("C2", 2, 2, 1, Some(1), 1),
            ("C4", 4, 4, 1, Some(1), 1),
            ("C8", 8, 8, 1, Some(1), 1),
            ("V4", 4, 2, 3, Some(2), 3),
            ("C2xC2xC2", 8, 2, 7, Some(3), 7),
            ("C2xC4", 8, 4, 3, Some(2), 3),
            ("C2xC2xC4", 16, 4, 7, Some(3), 7),
            ("D4", 8, 4, 5, None, 3),
            ("Q8", 8, 4, 1, Some(1), 1),
            ("Heis27", 27, 3, 26, None, 10),
            ("U64", 64, 4, 27, None, 9),
        ];
        for (name, order, exp, locus, rank, cls) in expect {
            let e = builtin(name).unwrap();
            assert_eq!(e.group.order, order, "{name} order");
            assert_eq!(e.group.exponent(), exp, "{name} exponent");
            assert_eq!(e.group.involution_locus().len(), locus, "{name} locus");
            assert_eq!(e.group.involution_subspace_rank(), rank, "{name} rank");
            assert_eq!(e.group.classes_in_locus().len(), cls, "{name} classes");
        }
    }

    #[test]
    fn constants_table() {
        let expect: [(&str, (u64, u64), u64, u64, u64); 6] = [
            ("C2", (1, 1), 1, 1, 1),
            ("V4", (1, 2), 3, 3, 1),
            ("Q8", (1, 4), 1, 1, 1),
            ("D4", (1, 4), 3, 5, 1),
            ("C2xC2xC4", (1, 8), 7, 7, 1),
            ("Heis27", (1, 18), 5, 13, 2),
        ];
        for (name, a, b, i, d) in expect {
            let c = builtin(name).unwrap().group.constants().unwrap();
            assert_eq!((c.a_num, c.a_den), a, "{name} a");
            assert_eq!(c.b, b, "{name} b");
            assert_eq!(c.i, i, "{name} i");
            assert_eq!(c.d, d, "{name} d");
        }
    }

    #[test]
    fn q8_model_checks() {
        let e = builtin("Q8").unwrap();
        let g = &e.group;
        // i = 1, j = 2, k = i*j; j*i = k*z
        let k = g.mul(1, 2);
        let k_alt = g.mul(2, 1);
        assert_ne!(k, k_alt);
        assert_eq!(g.mul(k_alt, 4), k);
        assert_eq!(g.elem_order(1), 4);
        assert_eq!(g.elem_order(2), 4);
        assert_eq!(g.elem_order(4), 2);
        // i^2 = j^2 = z
        assert_eq!(g.mul(1, 1), 4);
        assert_eq!(g.mul(2, 2), 4);
    }

    #[test]
    fn json_roundtrip() {
        for name in NAMES {
            let e = builtin(name).unwrap();
            let s = to_json(&e).unwrap();
            let back = from_json(&s).unwrap();
            assert_eq!(back.name, e.name);
            assert_eq!(back.steps, e.steps);
            assert_eq!(back.group.order, e.group.order);
            for (a, b) in back.group.tower.tables.iter().zip(&e.group.tower.tables) {
                assert_eq!(a.entries(), b.entries());
            }
        }
    }

    #[test]
    fn invalid_json_rejected() {
        // identity-breaking table
        let bad = r#"{"name":"X","l":2,"tables":[[0],[0,1,0,0]],"steps":[{"kind":"trivial"},{"kind":"frob"}]}"#;
        assert!(from_json(bad).is_err());
        // step/table mismatch
        let bad2 = r#"{"name":"X","l":2,"tables":[[0],[0,0,0,1]],"steps":[{"kind":"trivial"},{"kind":"trivial"}]}"#;
        assert!(matches!(from_json(bad2), Err(Error::StepMismatch(_))));
        // coordinate out of range
        let bad3 = r#"{"name":"X","l":2,"tables":[[0],[0,0,0,1]],"steps":[{"kind":"trivial"},{"kind":"cup","terms":[[{"coord":2},{"const":-1}]]}]}"#;
        assert!(matches!(from_json(bad3), Err(Error::StepMismatch(_))));
    }

    #[test]
    fn hash_is_stable_across_calls() {
        assert_eq!(catalog_hash(), catalog_hash());
        assert_eq!(catalog_hash().len(), 16);
    }

    #[test]
    fn aliases() {
        assert_eq!(builtin("v4").unwrap().name, "V4");
        assert_eq!(builtin("C2xC2").unwrap().name, "V4");
        assert!(matches!(builtin("S3"), Err(Error::UnknownName(_))));
    }
}
