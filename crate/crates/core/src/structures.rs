//! Finite relational structures and the usual combinators on them: products,
//! powers, disjoint unions, induced and weak substructures, images, kernels,
//! binary projections and connected components.
//!
//! Elements are dense ids `0..n`. Labels ride along as metadata and never
//! influence a computation. Product ids are lexicographic ranks of coordinate
//! sequences (first factor most significant), so results are reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::homsearch::{self, SearchOptions};

/// Relation symbol to arity.
pub type Signature = BTreeMap<String, usize>;

/// Default bound on universe sizes and tuple counts of derived structures.
pub const DEFAULT_MAX_TUPLES: usize = 5_000_000;

/// Size bounds for the exponential constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Bound on universe sizes and per-relation tuple counts.
    pub max_tuples: usize,
    /// Universe bound for the partial-semilattice decision procedure.
    pub max_psl_universe: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tuples: DEFAULT_MAX_TUPLES,
            max_psl_universe: 12,
        }
    }
}

impl Limits {
    pub(crate) fn check(&self, what: impl Into<String>, needed: Option<usize>) -> Result<usize> {
        match needed {
            Some(n) if n <= self.max_tuples => Ok(n),
            Some(n) => Err(Error::SizeBound {
                what: what.into(),
                needed: n.to_string(),
                bound: self.max_tuples,
            }),
            None => Err(Error::SizeBound {
                what: what.into(),
                needed: "more than usize::MAX".into(),
                bound: self.max_tuples,
            }),
        }
    }
}

/// One relation: its arity and a duplicate-free, sorted tuple set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    arity: usize,
    tuples: BTreeSet<Vec<usize>>,
}

impl Relation {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn tuples(&self) -> impl ExactSizeIterator<Item = &Vec<usize>> + '_ {
        self.tuples.iter()
    }
}

/// A finite universe with named finitary relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationalStructure {
    labels: Vec<String>,
    relations: BTreeMap<String, Relation>,
}

/// Raw relation data as read from a file, before validation.
pub type RawRelation = (String, usize, Vec<Vec<usize>>);

/// Checks raw relation data against a universe of the given size and reports
/// the first violated invariant.
pub fn validate_raw(universe: usize, relations: &[RawRelation]) -> Result<()> {
    for (symbol, arity, tuples) in relations {
        if *arity == 0 {
            return Err(Error::ZeroArity(symbol.clone()));
        }
        let mut seen = BTreeSet::new();
        for t in tuples {
            if t.len() != *arity {
                return Err(Error::ArityMismatch {
                    symbol: symbol.clone(),
                    tuple: t.clone(),
                    expected: *arity,
                    found: t.len(),
                });
            }
            if t.iter().any(|&x| x >= universe) {
                return Err(Error::IdOutOfRange {
                    symbol: symbol.clone(),
                    tuple: t.clone(),
                    universe,
                });
            }
            if !seen.insert(t) {
                return Err(Error::DuplicateTuple {
                    symbol: symbol.clone(),
                    tuple: t.clone(),
                });
            }
        }
    }
    Ok(())
}

impl RelationalStructure {
    /// Builds a structure, rejecting arity mismatches, out-of-range ids and
    /// duplicate tuples.
    pub fn new(labels: Vec<String>, relations: Vec<RawRelation>) -> Result<Self> {
        validate_raw(labels.len(), &relations)?;
        let mut map = BTreeMap::new();
        for (symbol, arity, tuples) in relations {
            if map.contains_key(&symbol) {
                return Err(Error::Format(format!("relation `{symbol}` declared twice")));
            }
            map.insert(
                symbol,
                Relation {
                    arity,
                    tuples: tuples.into_iter().collect(),
                },
            );
        }
        Ok(RelationalStructure { labels, relations: map })
    }

    /// Like [`RelationalStructure::new`] with labels `"0".."n-1"`.
    pub fn with_size(n: usize, relations: Vec<RawRelation>) -> Result<Self> {
        Self::new(default_labels(n), relations)
    }

    /// Assembles a structure from already-checked parts.
    pub(crate) fn from_parts(labels: Vec<String>, relations: BTreeMap<String, Relation>) -> Self {
        let s = RelationalStructure { labels, relations };
        debug_assert!(s.validate().is_ok());
        s
    }

    /// Single ternary relation `R` with the given triples.
    pub fn ternary(labels: Vec<String>, triples: &[[usize; 3]]) -> Result<Self> {
        let tuples = triples.iter().map(|t| t.to_vec()).collect();
        Self::new(labels, vec![("R".to_string(), 3, tuples)])
    }

    /// The two-element full semilattice structure on `{0,1}`: the graph of
    /// binary meet.
    pub fn semilattice_s() -> Self {
        Self::ternary(default_labels(2), &[[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 1]]).expect("static structure")
    }

    /// The one-element ternary structure with the constant triple.
    pub fn singleton_i() -> Self {
        Self::point(&[("R".to_string(), 3)].into_iter().collect())
    }

    /// One-element reflexive structure of the given signature.
    pub fn point(signature: &Signature) -> Self {
        let relations = signature
            .iter()
            .map(|(s, &a)| {
                (
                    s.clone(),
                    Relation {
                        arity: a,
                        tuples: std::iter::once(vec![0; a]).collect(),
                    },
                )
            })
            .collect();
        RelationalStructure {
            labels: vec!["0".into()],
            relations,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for a universe of size {}",
                labels.len(),
                self.labels.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> + '_ {
        self.relations.iter().map(|(s, r)| (s.as_str(), r))
    }

    pub fn relation(&self, symbol: &str) -> Option<&Relation> {
        self.relations.get(symbol)
    }

    pub fn signature(&self) -> Signature {
        self.relations.iter().map(|(s, r)| (s.clone(), r.arity)).collect()
    }

    /// Total number of tuples over all relations.
    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(Relation::len).sum()
    }

    /// The unique ternary relation, if the signature is exactly one ternary symbol.
    pub fn single_ternary(&self) -> Result<&Relation> {
        let mut it = self.relations.values();
        match (it.next(), it.next()) {
            (Some(r), None) if r.arity == 3 => Ok(r),
            _ => Err(Error::NotSingleTernary(format!("signature {:?}", self.signature()))),
        }
    }

    /// Re-checks every type invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for (symbol, rel) in &self.relations {
            if rel.arity == 0 {
                return Err(Error::ZeroArity(symbol.clone()));
            }
            for t in &rel.tuples {
                if t.len() != rel.arity {
                    return Err(Error::ArityMismatch {
                        symbol: symbol.clone(),
                        tuple: t.clone(),
                        expected: rel.arity,
                        found: t.len(),
                    });
                }
                if t.iter().any(|&x| x >= n) {
                    return Err(Error::IdOutOfRange {
                        symbol: symbol.clone(),
                        tuple: t.clone(),
                        universe: n,
                    });
                }
            }
        }
        Ok(())
    }

    /// Equality of universes sizes and relations, ignoring labels.
    pub fn same_relations(&self, other: &Self) -> bool {
        self.len() == other.len() && self.relations == other.relations
    }
}

impl fmt::Display for RelationalStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(", "))?;
        for (s, r) in &self.relations {
            write!(f, " {s}/{}:", r.arity)?;
            for t in &r.tuples {
                let parts: Vec<&str> = t.iter().map(|&x| self.labels[x].as_str()).collect();
                write!(f, " ({})", parts.join(","))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// A total map between universes that preserves every relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Homomorphism {
    map: Vec<usize>,
}

impl Homomorphism {
    /// Checks the map against both structures.
    pub fn new(
        source: &RelationalStructure,
        target: &RelationalStructure,
        map: Vec<usize>,
    ) -> Result<Self, homsearch::HomFailure> {
        homsearch::check_homomorphism(source, target, &map)?;
        Ok(Homomorphism { map })
    }

    /// Wraps a map that the caller already verified.
    pub(crate) fn from_verified(map: Vec<usize>) -> Self {
        Homomorphism { map }
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn into_map(self) -> Vec<usize> {
        self.map
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn is_constant(&self) -> bool {
        self.map.windows(2).all(|w| w[0] == w[1])
    }

    /// `other ∘ self`: first `self`, then `other`.
    pub fn then(&self, other: &Homomorphism) -> Homomorphism {
        Homomorphism {
            map: self.map.iter().map(|&x| other.map[x]).collect(),
        }
    }
}

/// A structure together with the ids its elements have in a parent structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substructure {
    pub structure: RelationalStructure,
    pub parent_ids: Vec<usize>,
}

impl Substructure {
    /// Local id of a parent id, if present.
    pub fn local_id(&self, parent: usize) -> Option<usize> {
        self.parent_ids.binary_search(&parent).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecomposition {
    /// Blocks sorted ascending internally and ordered by their least element.
    pub partition: Vec<Vec<usize>>,
    pub induced: Vec<RelationalStructure>,
}

impl ComponentDecomposition {
    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partition.is_empty()
    }

    /// Block index of every element.
    pub fn block_of(&self, universe: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; universe];
        for (b, block) in self.partition.iter().enumerate() {
            for &x in block {
                out[x] = b;
            }
        }
        out
    }
}

/// Mixed-radix ranking of coordinate sequences, first coordinate most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductIndex {
    radices: Vec<usize>,
    size: usize,
}

impl ProductIndex {
    pub fn new(radices: Vec<usize>) -> Option<Self> {
        let size = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r))?;
        Some(ProductIndex { radices, size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn factors(&self) -> usize {
        self.radices.len()
    }

    pub fn encode(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.radices.len());
        coords.iter().zip(&self.radices).fold(0, |acc, (&c, &r)| acc * r + c)
    }

    pub fn decode(&self, mut id: usize) -> Vec<usize> {
        let mut out = vec![0; self.radices.len()];
        for (slot, &r) in out.iter_mut().zip(&self.radices).rev() {
            *slot = id % r;
            id /= r;
        }
        out
    }

    /// All coordinate sequences in rank order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size).map(move |i| self.decode(i))
    }
}

/// True iff every relation contains every constant tuple.
pub fn is_reflexive(s: &RelationalStructure) -> bool {
    s.relations
        .values()
        .all(|r| (0..s.len()).all(|a| r.tuples.contains(&vec![a; r.arity])))
}

/// The binary structure of all two-coordinate projections `R_{i,j}` (coordinates
/// 1-based, `i < j`).
pub fn binary_projection(s: &RelationalStructure) -> Result<RelationalStructure> {
    let mut relations = BTreeMap::new();
    for (symbol, rel) in &s.relations {
        if rel.arity < 2 {
            return Err(Error::UnaryRelation(symbol.clone()));
        }
        for i in 0..rel.arity {
            for j in i + 1..rel.arity {
                let tuples = rel.tuples.iter().map(|t| vec![t[i], t[j]]).collect();
                relations.insert(
                    format!("{symbol}_{{{},{}}}", i + 1, j + 1),
                    Relation { arity: 2, tuples },
                );
            }
        }
    }
    Ok(RelationalStructure::from_parts(s.labels.clone(), relations))
}

/// Classes of the equivalence generated by the binary projections. Unary
/// relations contribute no edges.
pub fn connected_components(s: &RelationalStructure) -> ComponentDecomposition {
    let mut uf = UnionFind::<usize>::new(s.len());
    for rel in s.relations.values() {
        for t in &rel.tuples {
            for w in t.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut first_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    for x in 0..s.len() {
        let root = uf.find(x);
        let key = *first_of_root.entry(root).or_insert(x);
        blocks.entry(key).or_default().push(x);
    }
    let partition: Vec<Vec<usize>> = blocks.into_values().collect();
    let induced = partition
        .iter()
        .map(|b| induced_substructure(s, b).expect("block ids are in range").structure)
        .collect();
    ComponentDecomposition { partition, induced }
}

/// True iff the structure has exactly one component (the empty structure has none).
pub fn is_connected(s: &RelationalStructure) -> bool {
    connected_components(s).len() == 1
}

fn require_same_signature(items: &[&RelationalStructure], what: &str) -> Result<Signature> {
    let first = items
        .first()
        .ok_or_else(|| Error::InvalidArgument(format!("{what} of an empty list")))?;
    let sig = first.signature();
    for (i, s) in items.iter().enumerate().skip(1) {
        let other = s.signature();
        if other != sig {
            return Err(Error::SignatureMismatch(format!(
                "{what}: factor {i} has {other:?}, factor 0 has {sig:?}"
            )));
        }
    }
    Ok(sig)
}

pub fn product(factors: &[&RelationalStructure]) -> Result<RelationalStructure> {
    product_with(factors, &Limits::default())
}

/// Direct product; element ids are lexicographic ranks of coordinate sequences.
pub fn product_with(factors: &[&RelationalStructure], limits: &Limits) -> Result<RelationalStructure> {
    let sig = require_same_signature(factors, "product")?;
    let index = ProductIndex::new(factors.iter().map(|f| f.len()).collect());
    let size = limits.check("product universe", index.as_ref().map(|i| i.size()))?;
    let index = index.expect("checked");

    let labels = (0..size)
        .map(|id| {
            let coords = index.decode(id);
            let parts: Vec<&str> = coords.iter().zip(factors).map(|(&c, f)| f.label(c)).collect();
            format!("({})", parts.join(","))
        })
        .collect();

    let mut relations = BTreeMap::new();
    for (symbol, &arity) in &sig {
        let lists: Vec<Vec<&Vec<usize>>> = factors
            .iter()
            .map(|f| f.relations[symbol].tuples.iter().collect())
            .collect();
        let count = lists.iter().try_fold(1usize, |acc, l| acc.checked_mul(l.len()));
        limits.check(format!("product relation `{symbol}`"), count)?;
        let mut tuples = BTreeSet::new();
        if lists.iter().all(|l| !l.is_empty()) {
            let mut pick = vec![0usize; lists.len()];
            let mut coords = vec![0usize; lists.len()];
            loop {
                let tuple: Vec<usize> = (0..arity)
                    .map(|p| {
                        for (k, l) in lists.iter().enumerate() {
                            coords[k] = l[pick[k]][p];
                        }
                        index.encode(&coords)
                    })
                    .collect();
                tuples.insert(tuple);
                if !advance(&mut pick, |k| lists[k].len()) {
                    break;
                }
            }
        }
        relations.insert(symbol.clone(), Relation { arity, tuples });
    }
    Ok(RelationalStructure::from_parts(labels, relations))
}

/// Steps a mixed-radix counter, last digit fastest. Returns false on wrap-around.
pub(crate) fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radix(k) {
            return true;
        }
        digits[k] = 0;
    }
    false
}

pub fn power(s: &RelationalStructure, n: usize) -> Result<RelationalStructure> {
    power_with(s, n, &Limits::default())
}

/// Product of `n >= 1` copies of `s`.
pub fn power_with(s: &RelationalStructure, n: usize, limits: &Limits) -> Result<RelationalStructure> {
    if n == 0 {
        return Err(Error::InvalidArgument("power exponent must be positive".into()));
    }
    let needed = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(s.len()));
    limits.check("power universe", needed)?;
    let copies: Vec<&RelationalStructure> = std::iter::repeat_n(s, n).collect();
    product_with(&copies, limits)
}

/// Disjoint union; the factors' universes are laid out consecutively.
pub fn disjoint_union(parts: &[&RelationalStructure]) -> Result<RelationalStructure> {
    let sig = require_same_signature(parts, "disjoint union")?;
    let mut labels = Vec::new();
    let mut relations: BTreeMap<String, Relation> = sig
        .iter()
        .map(|(s, &a)| {
            (
                s.clone(),
                Relation {
                    arity: a,
                    tuples: BTreeSet::new(),
                },
            )
        })
        .collect();
    let mut offset = 0;
    for (i, part) in parts.iter().enumerate() {
        labels.extend(part.labels.iter().map(|l| format!("{i}:{l}")));
        for (symbol, rel) in &part.relations {
            let target = relations.get_mut(symbol).expect("same signature");
            target
                .tuples
                .extend(rel.tuples.iter().map(|t| t.iter().map(|&x| x + offset).collect()));
        }
        offset += part.len();
    }
    Ok(RelationalStructure::from_parts(labels, relations))
}

/// The substructure induced on `subset`; local ids follow ascending parent ids.
pub fn induced_substructure(s: &RelationalStructure, subset: &[usize]) -> Result<Substructure> {
    if let Some(&bad) = subset.iter().find(|&&x| x >= s.len()) {
        return Err(Error::NotInUniverse {
            id: bad,
            universe: s.len(),
        });
    }
    let parent_ids: Vec<usize> = subset.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut local = vec![usize::MAX; s.len()];
    for (i, &p) in parent_ids.iter().enumerate() {
        local[p] = i;
    }
    let relations = s
        .relations
        .iter()
        .map(|(symbol, rel)| {
            let tuples = rel
                .tuples
                .iter()
                .filter(|t| t.iter().all(|&x| local[x] != usize::MAX))
                .map(|t| t.iter().map(|&x| local[x]).collect())
                .collect();
            (
                symbol.clone(),
                Relation {
                    arity: rel.arity,
                    tuples,
                },
            )
        })
        .collect();
    let labels = parent_ids.iter().map(|&p| s.labels[p].clone()).collect();
    Ok(Substructure {
        structure: RelationalStructure::from_parts(labels, relations),
        parent_ids,
    })
}

/// Weak substructure test: `inclusion` sends the elements of `h` injectively
/// into `g` and every tuple of `h` lands in the corresponding relation of `g`.
pub fn is_weak_substructure(h: &RelationalStructure, g: &RelationalStructure, inclusion: &[usize]) -> bool {
    if h.signature() != g.signature() || inclusion.len() != h.len() {
        return false;
    }
    if inclusion.iter().any(|&x| x >= g.len()) {
        return false;
    }
    let distinct: BTreeSet<_> = inclusion.iter().collect();
    if distinct.len() != inclusion.len() {
        return false;
    }
    h.relations.iter().all(|(symbol, rel)| {
        let target = &g.relations[symbol];
        rel.tuples.iter().all(|t| {
            let img: Vec<usize> = t.iter().map(|&x| inclusion[x]).collect();
            target.tuples.contains(&img)
        })
    })
}

/// The image structure `φ(G)`: universe `φ(G)`, relations the images of the
/// source relations. Parent ids refer to the target.
pub fn image_structure(source: &RelationalStructure, target: &RelationalStructure, phi: &Homomorphism) -> Substructure {
    let parent_ids: Vec<usize> = phi.map.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut local = vec![usize::MAX; target.len()];
    for (i, &p) in parent_ids.iter().enumerate() {
        local[p] = i;
    }
    let relations = source
        .relations
        .iter()
        .map(|(symbol, rel)| {
            let tuples = rel
                .tuples
                .iter()
                .map(|t| t.iter().map(|&x| local[phi.map[x]]).collect())
                .collect();
            (
                symbol.clone(),
                Relation {
                    arity: rel.arity,
                    tuples,
                },
            )
        })
        .collect();
    let labels = parent_ids.iter().map(|&p| target.labels[p].clone()).collect();
    Substructure {
        structure: RelationalStructure::from_parts(labels, relations),
        parent_ids,
    }
}

/// Preimage classes of a map, ordered by least element.
pub fn kernel(map: &[usize]) -> Vec<Vec<usize>> {
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut first: BTreeMap<usize, usize> = BTreeMap::new();
    for (x, &y) in map.iter().enumerate() {
        let key = *first.entry(y).or_insert(x);
        classes.entry(key).or_default().push(x);
    }
    classes.into_values().collect()
}

/// A bijection that is a homomorphism in both directions, if one exists.
pub fn find_isomorphism(a: &RelationalStructure, b: &RelationalStructure) -> Option<Homomorphism> {
    if a.len() != b.len() || a.signature() != b.signature() {
        return None;
    }
    if a.relations.iter().any(|(s, r)| r.len() != b.relations[s].len()) {
        return None;
    }
    // An injective homomorphism between equal-size structures with equal tuple
    // counts maps every relation onto its counterpart, so its inverse is one too.
    let opts = SearchOptions {
        limit: 1,
        injective: true,
        ..SearchOptions::default()
    };
    homsearch::find_homs(a, b, &opts).into_iter().next()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> RelationalStructure {
        RelationalStructure::semilattice_s()
    }

    fn i() -> RelationalStructure {
        RelationalStructure::singleton_i()
    }

    fn tuples(r: &Relation) -> Vec<Vec<usize>> {
        r.tuples().cloned().collect()
    }

    #[test]
    fn validate_examples() {
        assert!(s().validate().is_ok());
        assert!(i().validate().is_ok());
        let err = RelationalStructure::with_size(2, vec![("R".into(), 3, vec![vec![0, 2, 0]])]);
        assert!(matches!(err, Err(Error::IdOutOfRange { .. })));
        let err = RelationalStructure::with_size(2, vec![("R".into(), 3, vec![vec![0, 1]])]);
        assert!(matches!(err, Err(Error::ArityMismatch { .. })));
        let err = RelationalStructure::with_size(2, vec![("R".into(), 2, vec![vec![0, 1], vec![0, 1]])]);
        assert!(matches!(err, Err(Error::DuplicateTuple { .. })));
    }

    #[test]
    fn reflexivity() {
        assert!(is_reflexive(&s()));
        let r = RelationalStructure::with_size(2, vec![("R".into(), 3, vec![vec![0, 0, 0]])]).unwrap();
        assert!(!is_reflexive(&r));
    }

    #[test]
    fn binary_projection_of_s() {
        let b = binary_projection(&s()).unwrap();
        assert_eq!(b.relations().count(), 3);
        let r12 = b.relation("R_{1,2}").unwrap();
        assert_eq!(tuples(r12), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let expected = vec![vec![0, 0], vec![1, 0], vec![1, 1]];
        assert_eq!(tuples(b.relation("R_{1,3}").unwrap()), expected);
        assert_eq!(tuples(b.relation("R_{2,3}").unwrap()), expected);

        let bi = binary_projection(&i()).unwrap();
        assert!(bi.relations().all(|(_, r)| tuples(r) == vec![vec![0, 0]]));

        let empty = RelationalStructure::with_size(2, vec![("R".into(), 3, vec![])]).unwrap();
        assert!(binary_projection(&empty)
            .unwrap()
            .relations()
            .all(|(_, r)| r.is_empty()));

        let unary = RelationalStructure::with_size(2, vec![("P".into(), 1, vec![vec![0]])]).unwrap();
        assert!(matches!(binary_projection(&unary), Err(Error::UnaryRelation(_))));
    }

    #[test]
    fn components() {
        let c = connected_components(&s());
        assert_eq!(c.partition, vec![vec![0, 1]]);

        let ss = disjoint_union(&[&s(), &s()]).unwrap();
        let c = connected_components(&ss);
        assert_eq!(c.partition, vec![vec![0, 1], vec![2, 3]]);
        for part in &c.induced {
            assert!(find_isomorphism(part, &s()).is_some());
        }

        let si = disjoint_union(&[&s(), &i()]).unwrap();
        let sizes: Vec<usize> = connected_components(&si).partition.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 1]);
    }

    #[test]
    fn products_and_powers() {
        let p = product(&[&s(), &s()]).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.relation("R").unwrap().len(), 16);
        assert!(find_isomorphism(&product(&[&s(), &i()]).unwrap(), &s()).is_some());
        assert!(product(&[&s()]).unwrap().same_relations(&s()));

        assert!(power(&s(), 1).unwrap().same_relations(&s()));
        assert_eq!(power(&s(), 2).unwrap(), p);
        let p3 = power(&s(), 3).unwrap();
        assert!(is_reflexive(&p3) && is_connected(&p3));

        let tiny = Limits {
            max_tuples: 7,
            ..Limits::default()
        };
        assert!(matches!(power_with(&s(), 3, &tiny), Err(Error::SizeBound { .. })));
        assert!(power(&s(), 0).is_err());
    }

    #[test]
    fn product_ids_are_lexicographic() {
        let p = power(&s(), 2).unwrap();
        assert_eq!(p.labels(), &["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);
        let idx = ProductIndex::new(vec![2, 3, 2]).unwrap();
        assert_eq!(idx.encode(&[1, 2, 0]), 10);
        assert_eq!(idx.decode(10), vec![1, 2, 0]);
    }

    #[test]
    fn signature_mismatch_rejected() {
        let g = RelationalStructure::with_size(1, vec![("E".into(), 2, vec![vec![0, 0]])]).unwrap();
        assert!(matches!(product(&[&s(), &g]), Err(Error::SignatureMismatch(_))));
        assert!(matches!(disjoint_union(&[&s(), &g]), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn unions() {
        let u = disjoint_union(&[&s(), &s()]).unwrap();
        assert_eq!((u.len(), u.tuple_count()), (4, 8));
        assert!(disjoint_union(&[&i()]).unwrap().same_relations(&i()));
        let u = disjoint_union(&[&s(), &i()]).unwrap();
        assert_eq!((u.len(), u.tuple_count()), (3, 5));
    }

    #[test]
    fn induced() {
        assert!(induced_substructure(&s(), &[0]).unwrap().structure.same_relations(&i()));
        assert!(induced_substructure(&s(), &[0, 1])
            .unwrap()
            .structure
            .same_relations(&s()));
        let diag = induced_substructure(&power(&s(), 2).unwrap(), &[0, 3]).unwrap();
        assert!(diag.structure.same_relations(&s()));
        assert!(matches!(
            induced_substructure(&s(), &[5]),
            Err(Error::NotInUniverse { .. })
        ));
    }

    #[test]
    fn weak_substructures_and_images() {
        assert!(is_weak_substructure(&i(), &s(), &[0]));
        assert!(!is_weak_substructure(&s(), &i(), &[0, 0]));

        let constant = Homomorphism::new(&s(), &s(), vec![0, 0]).unwrap();
        let img = image_structure(&s(), &s(), &constant);
        assert!(img.structure.same_relations(&i()));
        assert_eq!(img.parent_ids, vec![0]);
        assert!(is_weak_substructure(&img.structure, &s(), &img.parent_ids));

        let id = Homomorphism::new(&s(), &s(), vec![0, 1]).unwrap();
        assert!(image_structure(&s(), &s(), &id).structure.same_relations(&s()));

        let s2 = power(&s(), 2).unwrap();
        let diag = Homomorphism::new(&s(), &s2, vec![0, 3]).unwrap();
        let img = image_structure(&s(), &s2, &diag);
        assert_eq!(img.parent_ids, vec![0, 3]);
        assert!(img.structure.same_relations(&s()));
        assert!(is_weak_substructure(&img.structure, &s2, &img.parent_ids));
    }

    #[test]
    fn kernels() {
        assert_eq!(kernel(&[0, 1]), vec![vec![0], vec![1]]);
        assert_eq!(kernel(&[1, 1]), vec![vec![0, 1]]);
        assert_eq!(kernel(&[2, 0, 2, 1]), vec![vec![0, 2], vec![1], vec![3]]);
    }

    #[test]
    fn isomorphisms() {
        assert_eq!(find_isomorphism(&s(), &s()).unwrap().map(), &[0, 1]);
        assert!(find_isomorphism(&s(), &i()).is_none());
    }
}
