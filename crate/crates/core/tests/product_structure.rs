//! For groups whose involutions are all central, the embedding obstruction
//! lives entirely on the non-involution coordinates: swapping the involution
//! coordinates of a decided tuple for other valid nonunit values never flips
//! the verdict, and for epimorphisms the discriminant scales predictably.

use malle_core::catalog::{builtin, CatalogEntry};
use malle_core::param::{solve, CubicCache, FactoredTuple, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pairwise coprime odd squarefree values, coprime to 3, 5, 13 and 29.
const POOL: [i64; 8] = [7, 11, 17, 19, 23, 31, 37, 41];

fn tuple_for(order: usize, assign: &[(usize, i64)]) -> FactoredTuple {
    let mut vals = vec![1i64; order - 1];
    for &(e, v) in assign {
        vals[e - 1] = v;
    }
    FactoredTuple::new(2, &vals).unwrap()
}

fn decide(entry: &CatalogEntry, assign: &[(usize, i64)]) -> Verdict {
    let mut cubic = CubicCache::default();
    solve(entry, &tuple_for(entry.group.order, assign), &mut cubic).unwrap()
}

fn disc_of(v: &Verdict) -> u128 {
    match v {
        Verdict::Surjective(d) => d.disc.expect("disc fits"),
        other => panic!("expected an epimorphism, got {}", other.label()),
    }
}

/// Random substitutions on the involution coordinates of `base` must keep
/// the verdict kind; epi discriminants scale by the swapped prime powers.
fn assert_locus_free(entry: &CatalogEntry, base: &[(usize, i64)], rng: &mut ChaCha8Rng) {
    let g = &entry.group;
    let locus: Vec<usize> = g.involution_locus().iter().map(|&e| e as usize).collect();
    let base_verdict = decide(entry, base);
    let base_disc = base_verdict.is_surjective().then(|| disc_of(&base_verdict));
    let base_scale: u128 = locus
        .iter()
        .map(|&h| {
            let v = base.iter().find(|&&(e, _)| e == h).map_or(1, |&(_, v)| v) as u128;
            v.pow(g.disc_exponent(h) as u32)
        })
        .product();
    for _ in 0..12 {
        // distinct pool picks keep the tuple pairwise coprime
        let mut picks: Vec<i64> = Vec::new();
        let mut assign = base.to_vec();
        let mut scale = 1u128;
        for &h in &locus {
            let q = loop {
                let q = POOL[rng.gen_range(0..POOL.len())];
                if !picks.contains(&q) {
                    break q;
                }
            };
            picks.push(q);
            // later assignments win, so this overrides any base locus value
            assign.push((h, q));
            scale *= (q as u128).pow(g.disc_exponent(h) as u32);
        }
        let v = decide(entry, &assign);
        match base_disc {
            Some(d) => {
                assert!(v.is_surjective(), "locus swap broke an epi: {}", v.label());
                assert_eq!(disc_of(&v) * base_scale, d * scale);
            }
            None => assert!(
                matches!(v, Verdict::Obstructed(_)),
                "locus swap unblocked an obstruction: {}",
                v.label()
            ),
        }
    }
}

#[test]
fn q8_central_coordinate_is_free() {
    let entry = builtin("Q8").unwrap();
    let g = &entry.group;
    let z = g.involution_locus()[0] as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    // find the surjective (5, 29) base pairs among the order-4 coordinates
    let mut epi_bases = Vec::new();
    for e1 in 1..g.order {
        for e2 in 1..g.order {
            if e1 == e2 || e1 == z || e2 == z {
                continue;
            }
            let base = [(e1, 5i64), (e2, 29i64)];
            if decide(&entry, &base).is_surjective() {
                epi_bases.push(base);
            }
        }
    }
    assert!(!epi_bases.is_empty(), "no surjective (5, 29) base");
    for base in &epi_bases {
        assert_locus_free(&entry, base, &mut rng);
    }
    // 3 is not 1 mod 4, so every base pair through it is locally blocked
    let blocked = [(epi_bases[0][0].0, 3i64), (epi_bases[0][1].0, 29i64)];
    assert!(matches!(decide(&entry, &blocked), Verdict::Obstructed(_)));
    assert_locus_free(&entry, &blocked, &mut rng);
}

#[test]
fn c4_inert_coordinate_is_free() {
    let entry = builtin("C4").unwrap();
    let g = &entry.group;
    let z = g.involution_locus()[0] as usize;
    let order_four: Vec<usize> = (1..g.order).filter(|&e| e != z).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for &e in &order_four {
        let epi = [(e, 5i64)];
        assert!(decide(&entry, &epi).is_surjective());
        assert_locus_free(&entry, &epi, &mut rng);
        let blocked = [(e, 3i64)];
        assert!(matches!(decide(&entry, &blocked), Verdict::Obstructed(_)));
        assert_locus_free(&entry, &blocked, &mut rng);
    }
}

#[test]
fn c2xc4_involution_coordinates_are_free() {
    let entry = builtin("C2xC4").unwrap();
    let g = &entry.group;
    let locus: Vec<usize> = g.involution_locus().iter().map(|&e| e as usize).collect();
    assert_eq!(locus.len(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut found = 0;
    for e in 1..g.order {
        if locus.contains(&e) {
            continue;
        }
        // a cyclic coordinate plus two involutions always generates, since
        // the cyclic part contains only one of the three involutions
        let base = [(e, 5i64), (locus[0], 13), (locus[1], 29)];
        if decide(&entry, &base).is_surjective() {
            assert_locus_free(&entry, &base, &mut rng);
            found += 1;
        }
    }
    assert!(found > 0, "no surjective base through the involution locus");
}
