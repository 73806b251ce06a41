//! Library results against independent brute-force computations.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use hmkit_core::freecons::{free_algebra, FiniteAlgebra, FreeStructure};
use hmkit_core::gadget::{gadget_transform, y_structure};
use hmkit_core::homsearch::{find_homs, polymorphisms};
use hmkit_core::identlang::{holds_in, labelings, parse, satisfies, TermSystem};
use hmkit_core::semilat::{classify_meet_operation, is_partial_semilattice, MeetClassification, MeetVerdict};
use hmkit_core::structures::{connected_components, disjoint_union, find_isomorphism, power, product, RawRelation};
use hmkit_core::{Limits, OperationTable, RelationalStructure, SearchOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s() -> RelationalStructure {
    RelationalStructure::semilattice_s()
}

/// Odometer over `0..radix` digits, last digit fastest.
fn all_maps(len: usize, radix: usize) -> Vec<Vec<usize>> {
    if radix == 0 {
        return if len == 0 { vec![vec![]] } else { vec![] };
    }
    let total = radix.pow(len as u32);
    (0..total)
        .map(|mut r| {
            let mut m = vec![0; len];
            for slot in m.iter_mut().rev() {
                *slot = r % radix;
                r /= radix;
            }
            m
        })
        .collect()
}

fn brute_is_hom(g: &RelationalStructure, h: &RelationalStructure, map: &[usize]) -> bool {
    g.relations().all(|(sym, rel)| {
        let target = h.relation(sym).expect("same signature");
        rel.tuples()
            .all(|t| target.contains(&t.iter().map(|&x| map[x]).collect::<Vec<_>>()))
    })
}

fn brute_homs(g: &RelationalStructure, h: &RelationalStructure) -> Vec<Vec<usize>> {
    all_maps(g.len(), h.len())
        .into_iter()
        .filter(|m| brute_is_hom(g, h, m))
        .collect()
}

fn random_structure(rng: &mut ChaCha8Rng, n: usize, sig: &[(&str, usize)]) -> RelationalStructure {
    let relations: Vec<RawRelation> = sig
        .iter()
        .map(|&(sym, arity)| {
            let tuples: BTreeSet<Vec<usize>> = all_maps(arity, n).into_iter().filter(|_| rng.gen_bool(0.3)).collect();
            (sym.to_string(), arity, tuples.into_iter().collect())
        })
        .collect();
    RelationalStructure::with_size(n, relations).unwrap()
}

/// Named structures plus random ones with at most three elements.
fn corpus() -> Vec<RelationalStructure> {
    let mut out = vec![
        s(),
        RelationalStructure::singleton_i(),
        gadget_transform(&s()).unwrap(),
        disjoint_union(&[&s(), &RelationalStructure::singleton_i()]).unwrap(),
        RelationalStructure::ternary(vec!["a".into(), "b".into()], &[[0, 0, 0], [1, 1, 1]]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 1..=3 {
        for _ in 0..6 {
            out.push(random_structure(&mut rng, n, &[("R", 3)]));
        }
    }
    out
}

#[test]
fn find_homs_matches_exhaustive_enumeration() {
    let c = corpus();
    let mut pairs = 0;
    for g in &c {
        for h in &c {
            if g.len() > 3 || h.len() > 3 {
                continue;
            }
            pairs += 1;
            let expected = brute_homs(g, h);
            let found: Vec<Vec<usize>> = find_homs(g, h, &SearchOptions::all())
                .into_iter()
                .map(|f| f.into_map())
                .collect();
            assert_eq!(found, expected, "homs\n{g}\n->\n{h}");

            let parallel = SearchOptions {
                deterministic_order: false,
                ..SearchOptions::all()
            };
            let par: Vec<Vec<usize>> = find_homs(g, h, &parallel).into_iter().map(|f| f.into_map()).collect();
            assert_eq!(par, expected);

            let nonconstant: Vec<Vec<usize>> = expected
                .iter()
                .filter(|m| m.windows(2).any(|w| w[0] != w[1]))
                .cloned()
                .collect();
            let found: Vec<Vec<usize>> = find_homs(g, h, &SearchOptions::nonconstant())
                .into_iter()
                .map(|f| f.into_map())
                .collect();
            assert_eq!(found, nonconstant);

            let injective: Vec<Vec<usize>> = expected
                .iter()
                .filter(|m| m.iter().collect::<BTreeSet<_>>().len() == m.len())
                .cloned()
                .collect();
            let opts = SearchOptions {
                injective: true,
                ..SearchOptions::all()
            };
            let found: Vec<Vec<usize>> = find_homs(g, h, &opts).into_iter().map(|f| f.into_map()).collect();
            assert_eq!(found, injective);

            if !g.is_empty() && !h.is_empty() {
                let pinned = SearchOptions {
                    pinned: [(0, h.len() - 1)].into(),
                    ..SearchOptions::all()
                };
                let expected_pinned: Vec<Vec<usize>> =
                    expected.iter().filter(|m| m[0] == h.len() - 1).cloned().collect();
                let found: Vec<Vec<usize>> = find_homs(g, h, &pinned).into_iter().map(|f| f.into_map()).collect();
                assert_eq!(found, expected_pinned);
            }
        }
    }
    assert!(pairs > 100);
}

#[test]
fn binary_signatures_match_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let sig = [("E", 2), ("U", 1)];
    let structures: Vec<RelationalStructure> = (1..=3)
        .flat_map(|n| (0..4).map(move |_| n))
        .map(|n| random_structure(&mut rng, n, &sig))
        .collect();
    for g in &structures {
        for h in &structures {
            let found: Vec<Vec<usize>> = find_homs(g, h, &SearchOptions::all())
                .into_iter()
                .map(|f| f.into_map())
                .collect();
            assert_eq!(found, brute_homs(g, h));
        }
    }
}

fn brute_polymorphisms(h: &RelationalStructure, n: usize) -> Vec<Vec<usize>> {
    let rel: Vec<&Vec<usize>> = h.single_ternary().unwrap().tuples().collect();
    let cells = h.len().pow(n as u32);
    all_maps(cells, h.len())
        .into_iter()
        .filter(|values| {
            let t = OperationTable::new(n, h.len(), values.clone()).unwrap();
            all_maps(n, rel.len()).iter().all(|pick| {
                let image: Vec<usize> = (0..3)
                    .map(|j| t.apply(&pick.iter().map(|&p| rel[p][j]).collect::<Vec<_>>()))
                    .collect();
                h.single_ternary().unwrap().contains(&image)
            })
        })
        .collect()
}

#[test]
fn polymorphisms_match_homs_from_powers_and_brute_force() {
    for n in 1..=3 {
        let tables: Vec<Vec<usize>> = polymorphisms(&s(), n).unwrap().into_iter().map(|t| t.values).collect();
        let homs: Vec<Vec<usize>> = find_homs(&power(&s(), n).unwrap(), &s(), &SearchOptions::all())
            .into_iter()
            .map(|f| f.into_map())
            .collect();
        assert_eq!(tables, homs);
        assert_eq!(tables, brute_polymorphisms(&s(), n));
    }
}

#[test]
fn classification_matches_definitions() {
    for n in 1..=3 {
        let pol: HashSet<Vec<usize>> = polymorphisms(&s(), n).unwrap().into_iter().map(|t| t.values).collect();
        for values in all_maps(1 << n, 2) {
            let t = OperationTable::new(n, 2, values.clone()).unwrap();
            match classify_meet_operation(&t).unwrap() {
                MeetVerdict::Classified(MeetClassification::Constant(v)) => {
                    assert!(values.iter().all(|&x| x == v));
                    assert!(pol.contains(&values));
                }
                MeetVerdict::Classified(MeetClassification::Meet(j)) => {
                    for args in all_maps(n, 2) {
                        let min = j.iter().map(|&i| args[i - 1]).min().unwrap();
                        assert_eq!(t.apply(&args), min);
                    }
                    assert!(pol.contains(&values));
                }
                MeetVerdict::Refused { witness } => {
                    assert!(witness.is_some());
                    assert!(!pol.contains(&values));
                }
            }
        }
    }
}

fn brute_components(st: &RelationalStructure) -> BTreeSet<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); st.len()];
    for (_, rel) in st.relations() {
        for t in rel.tuples() {
            for &a in t {
                for &b in t {
                    adj[a].insert(b);
                }
            }
        }
    }
    let mut seen = vec![false; st.len()];
    let mut out = BTreeSet::new();
    for start in 0..st.len() {
        if seen[start] {
            continue;
        }
        let mut block = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(x) = queue.pop_front() {
            block.insert(x);
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        out.insert(block);
    }
    out
}

#[test]
fn components_match_breadth_first_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=7 {
        for _ in 0..10 {
            let st = random_structure(&mut rng, n, &[("R", 3), ("E", 2)]);
            let got: BTreeSet<BTreeSet<usize>> = connected_components(&st)
                .partition
                .into_iter()
                .map(|b| b.into_iter().collect())
                .collect();
            assert_eq!(got, brute_components(&st));
        }
    }
}

fn naive_closure(gens: &[Vec<usize>], ops: &BTreeMap<String, OperationTable>) -> BTreeSet<Vec<usize>> {
    let mut set: BTreeSet<Vec<usize>> = gens.iter().cloned().collect();
    loop {
        let items: Vec<Vec<usize>> = set.iter().cloned().collect();
        let before = set.len();
        for t in ops.values() {
            for pick in all_maps(t.arity, items.len()) {
                let v: Vec<usize> = (0..items[0].len())
                    .map(|c| t.apply(&pick.iter().map(|&p| items[p][c]).collect::<Vec<_>>()))
                    .collect();
                set.insert(v);
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

fn random_algebra(rng: &mut ChaCha8Rng, size: usize) -> FiniteAlgebra {
    let mut ops = BTreeMap::new();
    for (i, arity) in [1usize, 2, 2].into_iter().enumerate() {
        if rng.gen_bool(0.6) {
            let t = OperationTable::from_fn(arity, size, |_| 0).unwrap();
            let values = (0..t.values.len()).map(|_| rng.gen_range(0..size)).collect();
            ops.insert(format!("f{i}"), OperationTable::new(arity, size, values).unwrap());
        }
    }
    FiniteAlgebra::new(size, ops).unwrap()
}

#[test]
fn free_algebras_match_naive_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut algebras = vec![
        FiniteAlgebra::semilattice(),
        FiniteAlgebra::lattice(),
        FiniteAlgebra::majority(),
        FiniteAlgebra::set(3),
    ];
    for size in 2..=3 {
        for _ in 0..5 {
            algebras.push(random_algebra(&mut rng, size));
        }
    }
    for a in &algebras {
        // two generators over three elements can reach 3^9 elements
        let max_k = if a.size() == 2 { 2 } else { 1 };
        for k in 1..=max_k {
            let f = free_algebra(a, k).unwrap();
            let n = a.size();
            let gens: Vec<Vec<usize>> = (0..k)
                .map(|i| all_maps(k, n).into_iter().map(|c| c[i]).collect())
                .collect();
            let expected = naive_closure(&gens, a.operations());
            let got: BTreeSet<Vec<usize>> = (0..f.len()).map(|i| f.element(i).to_vec()).collect();
            assert_eq!(got, expected);
        }
        if a.size() == 2 {
            let fs = FreeStructure::build(a, &Limits::default()).unwrap();
            let (x, y) = (fs.x(), fs.y());
            let seeds: Vec<Vec<usize>> = vec![vec![x, x, x], vec![x, y, x], vec![y, x, x], vec![y, y, y]];
            let expected = naive_closure(&seeds, fs.free.algebra.operations());
            let got: BTreeSet<Vec<usize>> = fs.fstruct.single_ternary().unwrap().tuples().cloned().collect();
            assert_eq!(got, expected);
        }
    }
}

/// Congruence on non-empty subsets generated by `({a,b},{c})`, computed by
/// alternating translation closure and equivalence closure until nothing
/// changes.
fn naive_psl(st: &RelationalStructure) -> bool {
    let n = st.len();
    let rel = st.single_ternary().unwrap();
    if (0..n).any(|a| !rel.contains(&[a, a, a])) {
        return false;
    }
    let mut meets = BTreeMap::new();
    for t in rel.tuples() {
        if meets.insert((t[0], t[1]), t[2]).is_some_and(|c| c != t[2]) {
            return false;
        }
    }
    let full = 1usize << n;
    let mut eq = vec![vec![false; full]; full];
    for (a, row) in eq.iter_mut().enumerate() {
        row[a] = true;
    }
    for t in rel.tuples() {
        let l = (1 << t[0]) | (1 << t[1]);
        let r = 1 << t[2];
        eq[l][r] = true;
        eq[r][l] = true;
    }
    loop {
        let mut changed = false;
        for a in 1..full {
            for b in 1..full {
                if !eq[a][b] {
                    continue;
                }
                for c in 0..full {
                    if !eq[a | c][b | c] {
                        eq[a | c][b | c] = true;
                        changed = true;
                    }
                }
                let row_b = eq[b].clone();
                for (c, &bc) in row_b.iter().enumerate().skip(1) {
                    if bc && !eq[a][c] {
                        eq[a][c] = true;
                        changed = true;
                    }
                }
                if !eq[b][a] {
                    eq[b][a] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).all(|a| (0..n).all(|b| a == b || !eq[1 << a][1 << b]))
}

#[test]
fn partial_semilattice_test_matches_fixpoint_congruence() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut accepted = 0;
    let mut refused = 0;
    for n in 1..=4 {
        for _ in 0..60 {
            // reflexive and functional by construction, random partial meets
            let mut triples: Vec<[usize; 3]> = (0..n).map(|a| [a, a, a]).collect();
            for a in 0..n {
                for b in 0..n {
                    if a != b && rng.gen_bool(0.4) {
                        triples.push([a, b, rng.gen_range(0..n)]);
                    }
                }
            }
            let st = RelationalStructure::ternary((0..n).map(|i| i.to_string()).collect(), &triples).unwrap();
            let got = is_partial_semilattice(&st).unwrap().is_accepted();
            assert_eq!(got, naive_psl(&st), "{st}");
            if got {
                accepted += 1;
            } else {
                refused += 1;
            }
        }
    }
    assert!(accepted > 10 && refused > 10, "{accepted} / {refused}");
}

#[test]
fn labelings_agree_with_semantics_in_the_two_element_semilattice() {
    let systems = [
        "ops: t/3\nt(y,x,x) = x\nt(x,y,x) = x\nt(x,x,y) = x",
        "ops: p/3\np(x,y,y) = x\np(y,y,x) = x",
        "ops: f/2\nf(x,y) = f(y,x)\nf(x,x) = x\nf(f(x,y),z) = f(x,f(y,z))",
        "ops: f/2, g/1\nf(g(x),y) = g(f(y,x))\ng(g(x)) = x\nf(x,g(y)) = f(x,y)",
    ];
    let two = FiniteAlgebra::set(2);
    for text in systems {
        let sys: TermSystem = parse(text).unwrap();
        for sigma in labelings(&sys.declarations).unwrap() {
            let interp: BTreeMap<String, OperationTable> = sigma
                .sigma
                .iter()
                .map(|(f, coords)| {
                    let n = sys.declarations[f];
                    let t = OperationTable::from_fn(n, 2, |a| coords.iter().map(|&i| a[i - 1]).min().unwrap()).unwrap();
                    (f.clone(), t)
                })
                .collect();
            for i in &sys.identities {
                assert_eq!(satisfies(&sigma, i), holds_in(&two, i, &interp).unwrap(), "{sigma} {i}");
            }
        }
    }
}

#[test]
fn gadget_transform_matches_definition() {
    let y = y_structure();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut inputs = vec![
        s(),
        power(&s(), 2).unwrap(),
        product(&[&s(), &RelationalStructure::singleton_i()]).unwrap(),
    ];
    for n in 1..=3 {
        inputs.push(random_structure(&mut rng, n, &[("R", 3)]));
    }
    for d in &inputs {
        let homs = brute_homs(&s(), d);
        let mut triples = BTreeSet::new();
        for (i, f) in homs.iter().enumerate() {
            for (j, g) in homs.iter().enumerate() {
                for (k, h) in homs.iter().enumerate() {
                    let same_base = f[0] == g[0] && g[0] == h[0];
                    if same_base && brute_is_hom(&y, d, &[f[0], f[1], g[1], h[1]]) {
                        triples.insert(vec![i, j, k]);
                    }
                }
            }
        }
        let got = gadget_transform(d).unwrap();
        assert_eq!(got.len(), homs.len());
        let got_triples: BTreeSet<Vec<usize>> = got.single_ternary().unwrap().tuples().cloned().collect();
        assert_eq!(got_triples, triples);
    }
}

#[test]
fn isomorphism_matches_permutation_search() {
    let c = corpus();
    for a in &c {
        for b in &c {
            let brute = a.len() == b.len()
                && brute_homs(a, b).iter().any(|m| {
                    let distinct: BTreeSet<_> = m.iter().collect();
                    distinct.len() == m.len() && {
                        let mut inv = vec![0; m.len()];
                        for (x, &y) in m.iter().enumerate() {
                            inv[y] = x;
                        }
                        brute_is_hom(b, a, &inv)
                    }
                });
            assert_eq!(find_isomorphism(a, b).is_some(), brute);
        }
    }
}
