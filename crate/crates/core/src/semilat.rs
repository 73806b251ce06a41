//! Partial semilattices: ternary structures whose triples are `(a, b, a∧b)`
//! for some ambient meet semilattice.
//!
//! The ambient semilattice is decided by congruence generation on the free
//! semilattice over the universe (non-empty subsets under union, `a ↦ {a}`):
//! the structure is a partial semilattice iff the congruence generated by the
//! pairs `({a,b}, {c})` keeps all singletons apart.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::homsearch::{self, check_homomorphism, HomFailure, OperationTable, SearchOptions};
use crate::structures::{power, product, Homomorphism, Limits, ProductIndex, RelationalStructure};

/// The partial binary operation `⊓` of a functional ternary relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeetTable {
    n: usize,
    table: Vec<Option<usize>>,
}

impl MeetTable {
    /// Fails unless `s` has a single ternary relation in which `(a, b)`
    /// determines the third entry.
    pub fn new(s: &RelationalStructure) -> Result<Self> {
        let rel = s.single_ternary()?;
        let n = s.len();
        let mut table = vec![None; n * n];
        for t in rel.tuples() {
            let slot = &mut table[t[0] * n + t[1]];
            match *slot {
                Some(c) if c != t[2] => {
                    return Err(Error::NonFunctional {
                        a: t[0],
                        b: t[1],
                        c,
                        c2: t[2],
                    })
                }
                _ => *slot = Some(t[2]),
            }
        }
        Ok(MeetTable { n, table })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check(&self, a: usize) -> Result<()> {
        if a >= self.n {
            return Err(Error::NotInUniverse {
                id: a,
                universe: self.n,
            });
        }
        Ok(())
    }

    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        self.table[a * self.n + b]
    }

    /// Left-associated fold `((a1 ⊓ a2) ⊓ a3) ⊓ ...`; `None` as soon as an
    /// intermediate meet is missing, or for an empty sequence.
    pub fn iterated(&self, seq: &[usize]) -> Option<usize> {
        let (&first, rest) = seq.split_first()?;
        rest.iter().try_fold(first, |acc, &b| self.meet(acc, b))
    }

    /// The element `1` with `(a,1,a)` and `(1,a,a)` for every `a`.
    pub fn largest_element(&self) -> Option<usize> {
        (0..self.n).find(|&e| (0..self.n).all(|a| self.meet(a, e) == Some(a) && self.meet(e, a) == Some(a)))
    }
}

pub fn meet_lookup(s: &RelationalStructure, a: usize, b: usize) -> Result<Option<usize>> {
    let m = MeetTable::new(s)?;
    m.check(a)?;
    m.check(b)?;
    Ok(m.meet(a, b))
}

pub fn iterated_meet(s: &RelationalStructure, seq: &[usize]) -> Result<Option<usize>> {
    let m = MeetTable::new(s)?;
    for &a in seq {
        m.check(a)?;
    }
    Ok(m.iterated(seq))
}

pub fn largest_element(s: &RelationalStructure) -> Result<Option<usize>> {
    Ok(MeetTable::new(s)?.largest_element())
}

/// An ambient meet semilattice (a quotient of the subset semilattice) and the
/// embedding of the structure's universe into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSemilatticeWitness {
    /// Least subset (as a bit mask) of each ambient element's class.
    representatives: Vec<u64>,
    /// Ambient element of every non-empty subset mask; index 0 is unused.
    class_of: Vec<usize>,
    pub embedding: Vec<usize>,
}

impl PartialSemilatticeWitness {
    pub fn ambient_size(&self) -> usize {
        self.representatives.len()
    }

    pub fn ambient_meet(&self, x: usize, y: usize) -> usize {
        self.class_of[(self.representatives[x] | self.representatives[y]) as usize]
    }

    /// The ambient operation as a full table (quadratic in the ambient size).
    pub fn ambient_table(&self) -> OperationTable {
        let k = self.ambient_size();
        OperationTable::from_fn(2, k, |a| self.ambient_meet(a[0], a[1])).expect("well-formed")
    }

    /// Re-checks the witness: the ambient operation is idempotent, commutative
    /// and associative, the embedding is injective, and each triple `(a,b,c)`
    /// satisfies `e(a) ∧ e(b) = e(c)`. Cubic in the ambient size.
    pub fn verify(&self, s: &RelationalStructure) -> Result<()> {
        let k = self.ambient_size();
        for x in 0..k {
            if self.ambient_meet(x, x) != x {
                return Err(Error::Verification(format!("ambient not idempotent at {x}")));
            }
            for y in 0..k {
                let xy = self.ambient_meet(x, y);
                if xy != self.ambient_meet(y, x) {
                    return Err(Error::Verification(format!("ambient not commutative at {x},{y}")));
                }
                for z in 0..k {
                    if self.ambient_meet(xy, z) != self.ambient_meet(x, self.ambient_meet(y, z)) {
                        return Err(Error::Verification(format!("ambient not associative at {x},{y},{z}")));
                    }
                }
            }
        }
        let distinct: BTreeSet<_> = self.embedding.iter().collect();
        if distinct.len() != self.embedding.len() || self.embedding.len() != s.len() {
            return Err(Error::Verification("embedding not injective".into()));
        }
        for t in s.single_ternary()?.tuples() {
            let e = |i: usize| self.embedding[t[i]];
            if self.ambient_meet(e(0), e(1)) != e(2) {
                return Err(Error::Verification(format!("triple {t:?} is not a meet")));
            }
        }
        Ok(())
    }
}

/// Why a ternary structure is not a partial semilattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PslRefusal {
    NotReflexive {
        element: usize,
    },
    NonFunctional {
        a: usize,
        b: usize,
        c: usize,
        c2: usize,
    },
    /// The generated congruence identifies `{a}` and `{b}`.
    Merged {
        a: usize,
        b: usize,
    },
}

impl fmt::Display for PslRefusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PslRefusal::NotReflexive { element } => write!(f, "({element},{element},{element}) missing"),
            PslRefusal::NonFunctional { a, b, c, c2 } => {
                write!(f, "({a},{b}) has two meets {c} and {c2}")
            }
            PslRefusal::Merged { a, b } => write!(f, "congruence merges {{{a}}} and {{{b}}}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PslVerdict {
    Accepted(PartialSemilatticeWitness),
    Refused(PslRefusal),
}

impl PslVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, PslVerdict::Accepted(_))
    }
}

pub fn is_partial_semilattice(s: &RelationalStructure) -> Result<PslVerdict> {
    is_partial_semilattice_with(s, &Limits::default())
}

pub fn is_partial_semilattice_with(s: &RelationalStructure, limits: &Limits) -> Result<PslVerdict> {
    let rel = s.single_ternary()?;
    let n = s.len();
    let bound = limits.max_psl_universe.min(24);
    if n > bound {
        return Err(Error::SizeBound {
            what: "partial-semilattice universe".into(),
            needed: n.to_string(),
            bound,
        });
    }
    if let Some(element) = (0..n).find(|&a| !rel.contains(&[a, a, a])) {
        return Ok(PslVerdict::Refused(PslRefusal::NotReflexive { element }));
    }
    if let Err(Error::NonFunctional { a, b, c, c2 }) = MeetTable::new(s) {
        return Ok(PslVerdict::Refused(PslRefusal::NonFunctional { a, b, c, c2 }));
    }

    let full = 1usize << n;
    let mut uf = UnionFind::<usize>::new(full);
    // Unary polynomials of a semilattice are the identity and the translations
    // X ↦ X ∪ C, so translating each generating pair by every C (C = ∅ gives the
    // pair itself) and closing under equivalence yields the congruence.
    for t in rel.tuples() {
        let left = (1usize << t[0]) | (1usize << t[1]);
        let right = 1usize << t[2];
        if left == right {
            continue;
        }
        for c in 0..full {
            uf.union(left | c, right | c);
        }
    }

    for a in 0..n {
        for b in a + 1..n {
            if uf.equiv(1 << a, 1 << b) {
                return Ok(PslVerdict::Refused(PslRefusal::Merged { a, b }));
            }
        }
    }

    let mut class_of = vec![usize::MAX; full];
    let mut root_class: BTreeMap<usize, usize> = BTreeMap::new();
    let mut representatives = Vec::new();
    for (mask, slot) in class_of.iter_mut().enumerate().skip(1) {
        let root = uf.find(mask);
        *slot = *root_class.entry(root).or_insert_with(|| {
            representatives.push(mask as u64);
            representatives.len() - 1
        });
    }
    let embedding = (0..n).map(|a| class_of[1 << a]).collect();
    Ok(PslVerdict::Accepted(PartialSemilatticeWitness {
        representatives,
        class_of,
        embedding,
    }))
}

/// Outcome of splitting a homomorphism out of a product of partial semilattices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    Constant(usize),
    /// One unary homomorphism per factor; `f(x) = ⨅ f_i(x_i)`.
    Meet(Vec<Homomorphism>),
}

/// Splits `f: ∏ H_i -> H` into unary maps `f_i(x) = f(1_1, …, x, …, 1_n)` and
/// verifies `f(x_1..x_n) = ⨅ f_i(x_i)` (left-associated) at every point.
pub fn decompose_product_hom(
    factors: &[&RelationalStructure],
    target: &RelationalStructure,
    f: &[usize],
    tops: &[usize],
) -> Result<Decomposition> {
    if factors.is_empty() || factors.len() != tops.len() {
        return Err(Error::InvalidArgument(format!(
            "{} factors with {} largest elements",
            factors.len(),
            tops.len()
        )));
    }
    for (i, (h, &top)) in factors.iter().zip(tops).enumerate() {
        let found = largest_element(h)?;
        if found != Some(top) {
            return Err(Error::Verification(format!(
                "factor {i}: largest element is {found:?}, not {top}"
            )));
        }
    }
    let meets = MeetTable::new(target)?;
    let p = product(factors)?;
    check_homomorphism(&p, target, f).map_err(|e| Error::Verification(format!("not a homomorphism: {e}")))?;
    if f.windows(2).all(|w| w[0] == w[1]) {
        return Ok(Decomposition::Constant(f[0]));
    }

    let index = ProductIndex::new(factors.iter().map(|h| h.len()).collect()).expect("product built");
    let mut unary = Vec::with_capacity(factors.len());
    for (i, h) in factors.iter().enumerate() {
        let mut coords = tops.to_vec();
        let map: Vec<usize> = (0..h.len())
            .map(|x| {
                coords[i] = x;
                f[index.encode(&coords)]
            })
            .collect();
        check_homomorphism(h, target, &map)
            .map_err(|e| Error::Verification(format!("f_{} is not a homomorphism: {e}", i + 1)))?;
        unary.push(map);
    }
    let mut values = vec![0; factors.len()];
    for (id, coords) in index.iter().enumerate() {
        for (slot, (fi, &x)) in values.iter_mut().zip(unary.iter().zip(&coords)) {
            *slot = fi[x];
        }
        if meets.iterated(&values) != Some(f[id]) {
            return Err(Error::Verification(format!(
                "meet of {values:?} at {coords:?} does not give {}",
                f[id]
            )));
        }
    }
    Ok(Decomposition::Meet(
        unary.into_iter().map(Homomorphism::from_verified).collect(),
    ))
}

/// A non-empty set of 1-based coordinates.
pub type Coords = BTreeSet<usize>;

pub(crate) fn fmt_coords(c: &Coords) -> String {
    let parts: Vec<String> = c.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// Shape of an operation on `{0,1}` that preserves the semilattice structure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum MeetClassification {
    Constant(usize),
    /// Minimum over the given 1-based coordinates.
    Meet(Coords),
}

impl fmt::Display for MeetClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeetClassification::Constant(v) => write!(f, "Constant({v})"),
            MeetClassification::Meet(c) => write!(f, "Meet({})", fmt_coords(c)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeetVerdict {
    Classified(MeetClassification),
    /// Neither constant nor a meet; `witness` is the tuple showing the table
    /// is not a polymorphism (`None` would contradict the classification of
    /// the polymorphisms of the two-element semilattice).
    Refused {
        witness: Option<HomFailure>,
    },
}

/// Classifies a table on `{0,1}` as a constant or a meet of coordinates.
pub fn classify_meet_operation(t: &OperationTable) -> Result<MeetVerdict> {
    if t.size != 2 {
        return Err(Error::InvalidTable(format!("base size {} (expected 2)", t.size)));
    }
    t.validate()?;
    if t.is_constant() {
        return Ok(MeetVerdict::Classified(MeetClassification::Constant(t.values[0])));
    }
    let n = t.arity;
    let coords: Coords = (0..n)
        .filter(|&i| {
            let mut args = vec![1; n];
            args[i] = 0;
            t.apply(&args) == 0
        })
        .map(|i| i + 1)
        .collect();
    let matches = !coords.is_empty() && {
        let mut args = vec![0; n];
        let mut ok = true;
        for &v in &t.values {
            let expected = coords.iter().map(|&c| args[c - 1]).min().expect("non-empty");
            if v != expected {
                ok = false;
                break;
            }
            crate::structures::advance(&mut args, |_| 2);
        }
        ok
    };
    if matches {
        return Ok(MeetVerdict::Classified(MeetClassification::Meet(coords)));
    }
    let s = RelationalStructure::semilattice_s();
    let witness = check_homomorphism(&power(&s, n)?, &s, &t.values).err();
    Ok(MeetVerdict::Refused { witness })
}

/// Random partial semilattice with a largest element: a meet-closed family of
/// bit masks (at most `max_size` of them, including the all-ones top) under
/// bitwise AND, keeping every constant triple and every triple with the top,
/// plus a random subset of the remaining meets. Elements are shuffled.
pub fn random_partial_semilattice<R: Rng>(rng: &mut R, max_size: usize) -> (RelationalStructure, usize) {
    assert!(max_size >= 1);
    loop {
        let bits = rng.gen_range(1..=3u32);
        let top = (1u32 << bits) - 1;
        let target = rng.gen_range(1..=max_size);
        let mut set: BTreeSet<u32> = std::iter::once(top).collect();
        for _ in 0..8 {
            if set.len() >= target {
                break;
            }
            let m = rng.gen_range(0..=top);
            let mut next = set.clone();
            next.insert(m);
            loop {
                let meets: Vec<u32> = next
                    .iter()
                    .flat_map(|&a| next.iter().map(move |&b| a & b))
                    .filter(|x| !next.contains(x))
                    .collect();
                if meets.is_empty() {
                    break;
                }
                next.extend(meets);
            }
            if next.len() <= max_size {
                set = next;
            }
        }
        let masks: Vec<u32> = set.into_iter().collect();
        let mut perm: Vec<usize> = (0..masks.len()).collect();
        perm.shuffle(rng);
        let id_of = |m: u32| perm[masks.iter().position(|&x| x == m).expect("meet-closed")];
        let top_id = id_of(top);
        let mut triples = Vec::new();
        for &a in &masks {
            for &b in &masks {
                let keep = a == b || a == top || b == top || rng.gen_bool(0.5);
                if keep {
                    triples.push([id_of(a), id_of(b), id_of(a & b)]);
                }
            }
        }
        let s = RelationalStructure::ternary(crate::structures::default_labels(masks.len()), &triples)
            .expect("valid triples");
        if largest_element(&s).ok().flatten() == Some(top_id) {
            return (s, top_id);
        }
    }
}

/// Summary of a seeded run of the product-decomposition property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionSuite {
    pub seed: u64,
    pub instances: usize,
    pub homomorphisms: usize,
    pub failures: Vec<String>,
}

/// Draws `instances` products of one to three random partial semilattices
/// (each with a largest element, at most four elements) and decomposes every
/// homomorphism from the product to the two-element semilattice.
pub fn run_decomposition_suite(seed: u64, instances: usize) -> DecompositionSuite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = RelationalStructure::semilattice_s();
    let mut report = DecompositionSuite {
        seed,
        instances,
        homomorphisms: 0,
        failures: Vec::new(),
    };
    for k in 0..instances {
        let count = rng.gen_range(1..=3);
        let (factors, tops): (Vec<_>, Vec<_>) = (0..count).map(|_| random_partial_semilattice(&mut rng, 4)).unzip();
        let refs: Vec<&RelationalStructure> = factors.iter().collect();
        let p = match product(&refs) {
            Ok(p) => p,
            Err(e) => {
                report.failures.push(format!("instance {k}: {e}"));
                continue;
            }
        };
        for f in homsearch::find_homs(&p, &s, &SearchOptions::all()) {
            report.homomorphisms += 1;
            if let Err(e) = decompose_product_hom(&refs, &s, f.map(), &tops) {
                report.failures.push(format!("instance {k}, map {:?}: {e}", f.map()));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{induced_substructure, is_reflexive, power};

    fn s() -> RelationalStructure {
        RelationalStructure::semilattice_s()
    }

    #[test]
    fn meets_in_s() {
        assert_eq!(meet_lookup(&s(), 1, 0).unwrap(), Some(0));
        assert_eq!(meet_lookup(&s(), 1, 1).unwrap(), Some(1));
        let bad = RelationalStructure::ternary(
            vec!["0".into(), "1".into()],
            &[[0, 0, 0], [1, 1, 1], [0, 1, 0], [0, 1, 1]],
        )
        .unwrap();
        assert!(matches!(meet_lookup(&bad, 0, 1), Err(Error::NonFunctional { .. })));
        assert!(matches!(meet_lookup(&s(), 0, 7), Err(Error::NotInUniverse { .. })));
    }

    #[test]
    fn iterated_meets() {
        assert_eq!(iterated_meet(&s(), &[1, 1, 1]).unwrap(), Some(1));
        assert_eq!(iterated_meet(&s(), &[1, 0, 1]).unwrap(), Some(0));
        let diag = RelationalStructure::ternary(vec!["a".into(), "b".into()], &[[0, 0, 0], [1, 1, 1]]).unwrap();
        assert_eq!(iterated_meet(&diag, &[0, 1]).unwrap(), None);
    }

    #[test]
    fn largest_elements() {
        assert_eq!(largest_element(&s()).unwrap(), Some(1));
        assert_eq!(largest_element(&power(&s(), 2).unwrap()).unwrap(), Some(3));
        let diag = RelationalStructure::ternary(vec!["a".into(), "b".into()], &[[0, 0, 0], [1, 1, 1]]).unwrap();
        assert_eq!(largest_element(&diag).unwrap(), None);
    }

    #[test]
    fn recognizes_s_and_weak_subpowers() {
        let PslVerdict::Accepted(w) = is_partial_semilattice(&s()).unwrap() else {
            panic!("S is a semilattice");
        };
        w.verify(&s()).unwrap();
        assert_eq!(w.ambient_size(), 2);
        let table = w.ambient_table();
        let e = &w.embedding;
        assert_eq!(table.apply(&[e[0], e[1]]), e[0]);

        let s2 = power(&s(), 2).unwrap();
        let sub = induced_substructure(&s2, &[0, 1, 3]).unwrap().structure;
        match is_partial_semilattice(&sub).unwrap() {
            PslVerdict::Accepted(w) => w.verify(&sub).unwrap(),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn refuses_conflicting_meets() {
        // ({a,b},{c}) and ({b,a},{d}) force {c} ~ {d}
        let labels = vec!["a".into(), "b".into(), "c".into(), "d".into()];
        let g = RelationalStructure::ternary(
            labels,
            &[[0, 0, 0], [1, 1, 1], [2, 2, 2], [3, 3, 3], [0, 1, 2], [1, 0, 3]],
        )
        .unwrap();
        let v = is_partial_semilattice(&g).unwrap();
        assert_eq!(v, PslVerdict::Refused(PslRefusal::Merged { a: 2, b: 3 }));
        assert_eq!(is_partial_semilattice(&g).unwrap(), v);
    }

    #[test]
    fn refuses_non_reflexive_and_bounds() {
        let g = RelationalStructure::ternary(vec!["a".into(), "b".into()], &[[0, 0, 0]]).unwrap();
        assert_eq!(
            is_partial_semilattice(&g).unwrap(),
            PslVerdict::Refused(PslRefusal::NotReflexive { element: 1 })
        );
        let big = RelationalStructure::ternary(crate::structures::default_labels(13), &[]).unwrap();
        assert!(matches!(is_partial_semilattice(&big), Err(Error::SizeBound { .. })));
        let two = disjoint_relations();
        assert!(matches!(is_partial_semilattice(&two), Err(Error::NotSingleTernary(_))));
    }

    fn disjoint_relations() -> RelationalStructure {
        RelationalStructure::with_size(1, vec![("R".into(), 3, vec![vec![0, 0, 0]]), ("T".into(), 3, vec![])]).unwrap()
    }

    #[test]
    fn generated_relation_is_a_congruence() {
        // a chain-like partial semilattice on four elements with one gap
        let g = RelationalStructure::ternary(
            crate::structures::default_labels(4),
            &[
                [0, 0, 0],
                [1, 1, 1],
                [2, 2, 2],
                [3, 3, 3],
                [0, 1, 2],
                [1, 0, 2],
                [2, 3, 2],
            ],
        )
        .unwrap();
        let PslVerdict::Accepted(w) = is_partial_semilattice(&g).unwrap() else {
            panic!("expected a partial semilattice");
        };
        w.verify(&g).unwrap();
        let full = 1usize << g.len();
        for a in 1..full {
            for b in 1..full {
                if w.class_of[a] == w.class_of[b] {
                    for c in 0..full {
                        assert_eq!(w.class_of[a | c], w.class_of[b | c]);
                    }
                }
            }
        }
    }

    #[test]
    fn decompositions() {
        let s2 = [&s(), &s()];
        let meet = [0, 0, 0, 1];
        match decompose_product_hom(&s2, &s(), &meet, &[1, 1]).unwrap() {
            Decomposition::Meet(fs) => {
                assert_eq!(fs[0].map(), &[0, 1]);
                assert_eq!(fs[1].map(), &[0, 1]);
            }
            other => panic!("{other:?}"),
        }
        match decompose_product_hom(&s2, &s(), &[0, 0, 1, 1], &[1, 1]).unwrap() {
            Decomposition::Meet(fs) => {
                assert_eq!(fs[0].map(), &[0, 1]);
                assert_eq!(fs[1].map(), &[1, 1]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            decompose_product_hom(&s2, &s(), &[0, 0, 0, 0], &[1, 1]).unwrap(),
            Decomposition::Constant(0)
        );
        assert!(decompose_product_hom(&s2, &s(), &[0, 1, 1, 1], &[1, 1]).is_err());
        assert!(decompose_product_hom(&s2, &s(), &meet, &[0, 1]).is_err());
    }

    #[test]
    fn classifications() {
        let min = OperationTable::new(2, 2, vec![0, 0, 0, 1]).unwrap();
        assert_eq!(
            classify_meet_operation(&min).unwrap(),
            MeetVerdict::Classified(MeetClassification::Meet([1, 2].into()))
        );
        let t = OperationTable::from_fn(3, 2, |a| a[0].min(a[2])).unwrap();
        assert_eq!(
            classify_meet_operation(&t).unwrap(),
            MeetVerdict::Classified(MeetClassification::Meet([1, 3].into()))
        );
        let max = OperationTable::new(2, 2, vec![0, 1, 1, 1]).unwrap();
        let MeetVerdict::Refused { witness } = classify_meet_operation(&max).unwrap() else {
            panic!("max is not a meet");
        };
        assert!(witness.is_some());
        assert!(!homsearch::is_homomorphism(&power(&s(), 2).unwrap(), &s(), &max.values));
        assert!(classify_meet_operation(&OperationTable::new(1, 3, vec![0, 1, 2]).unwrap()).is_err());
    }

    #[test]
    fn random_instances_have_tops() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (g, top) = random_partial_semilattice(&mut rng, 4);
            assert!(g.len() <= 4);
            assert!(is_reflexive(&g));
            assert_eq!(largest_element(&g).unwrap(), Some(top));
            assert!(is_partial_semilattice(&g).unwrap().is_accepted());
        }
    }

    #[test]
    fn small_decomposition_suite() {
        let r = run_decomposition_suite(11, 20);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert!(r.homomorphisms > 0);
    }
}
