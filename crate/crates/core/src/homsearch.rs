//! Backtracking search for homomorphisms, polymorphisms and retractions.
//!
//! Source elements are assigned in ascending id order and values are tried in
//! ascending order, so results come out in lexicographic order of the map.
//! After each assignment every source tuple with exactly one unassigned
//! variable left prunes that variable's candidate set (forward checking).

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structures::{power_with, Homomorphism, Limits, RelationalStructure};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of results; 0 means all.
    pub limit: usize,
    /// Drop constant maps from the result.
    pub nonconstant_only: bool,
    /// Fixed values for some source elements.
    pub pinned: BTreeMap<usize, usize>,
    /// When false, first-level branches may be explored in parallel. The
    /// returned order is canonical either way.
    pub deterministic_order: bool,
    /// Only injective maps.
    pub injective: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            limit: 0,
            nonconstant_only: false,
            pinned: BTreeMap::new(),
            deterministic_order: true,
            injective: false,
        }
    }
}

impl SearchOptions {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn nonconstant() -> Self {
        SearchOptions {
            nonconstant_only: true,
            ..Self::default()
        }
    }
}

/// A total `arity`-ary operation on `0..size`, values listed in row-major
/// (lexicographic) order of the inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationTable {
    pub arity: usize,
    pub size: usize,
    pub values: Vec<usize>,
}

impl OperationTable {
    pub fn new(arity: usize, size: usize, values: Vec<usize>) -> Result<Self> {
        let t = OperationTable { arity, size, values };
        t.validate()?;
        Ok(t)
    }

    pub fn from_fn(arity: usize, size: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let len = table_len(size, arity)?;
        let mut args = vec![0; arity];
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(f(&args));
            crate::structures::advance(&mut args, |_| size);
        }
        Self::new(arity, size, values)
    }

    pub fn validate(&self) -> Result<()> {
        let len = table_len(self.size, self.arity)?;
        if self.values.len() != len {
            return Err(Error::InvalidTable(format!(
                "{} values for arity {} over {} elements (expected {len})",
                self.values.len(),
                self.arity,
                self.size
            )));
        }
        if let Some(v) = self.values.iter().find(|&&v| v >= self.size) {
            return Err(Error::InvalidTable(format!("value {v} >= size {}", self.size)));
        }
        Ok(())
    }

    pub fn index(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        args.iter().fold(0, |acc, &a| acc * self.size + a)
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        self.values[self.index(args)]
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.size).all(|a| self.apply(&vec![a; self.arity]) == a)
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

fn table_len(size: usize, arity: usize) -> Result<usize> {
    if arity == 0 {
        return Err(Error::InvalidTable("arity must be positive".into()));
    }
    (0..arity)
        .try_fold(1usize, |acc, _| acc.checked_mul(size))
        .ok_or_else(|| Error::InvalidTable("table too large".into()))
}

/// Why a map is not a homomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomFailure {
    WrongLength {
        expected: usize,
        found: usize,
    },
    ValueOutOfRange {
        element: usize,
        value: usize,
    },
    /// The image of `tuple` is not in the target relation `symbol`.
    Missing {
        symbol: String,
        tuple: Vec<usize>,
        image: Vec<usize>,
    },
}

impl fmt::Display for HomFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomFailure::WrongLength { expected, found } => {
                write!(f, "map has {found} entries, source has {expected} elements")
            }
            HomFailure::ValueOutOfRange { element, value } => {
                write!(f, "element {element} maps to {value}, outside the target")
            }
            HomFailure::Missing { symbol, tuple, image } => {
                write!(f, "{symbol}{tuple:?} maps to {image:?}, not in {symbol}")
            }
        }
    }
}

impl std::error::Error for HomFailure {}

/// Checks relation preservation and reports the first failing source tuple
/// (relations by symbol, tuples in sorted order).
pub fn check_homomorphism(g: &RelationalStructure, h: &RelationalStructure, map: &[usize]) -> Result<(), HomFailure> {
    if map.len() != g.len() {
        return Err(HomFailure::WrongLength {
            expected: g.len(),
            found: map.len(),
        });
    }
    if let Some((element, &value)) = map.iter().enumerate().find(|(_, &v)| v >= h.len()) {
        return Err(HomFailure::ValueOutOfRange { element, value });
    }
    for (symbol, rel) in g.relations() {
        let target = h.relation(symbol).filter(|r| r.arity() == rel.arity());
        for t in rel.tuples() {
            let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
            if !target.is_some_and(|r| r.contains(&image)) {
                return Err(HomFailure::Missing {
                    symbol: symbol.to_string(),
                    tuple: t.clone(),
                    image,
                });
            }
        }
    }
    Ok(())
}

pub fn is_homomorphism(g: &RelationalStructure, h: &RelationalStructure, map: &[usize]) -> bool {
    check_homomorphism(g, h, map).is_ok()
}

/// Membership index for one target relation.
enum TupleSet {
    Dense { radix: usize, bits: Vec<bool> },
    Sparse(HashSet<Vec<usize>>),
}

const DENSE_LIMIT: usize = 1 << 22;

impl TupleSet {
    fn build(h: &RelationalStructure, symbol: &str, arity: usize) -> Self {
        let Some(rel) = h.relation(symbol).filter(|r| r.arity() == arity) else {
            return TupleSet::Sparse(HashSet::new());
        };
        let radix = h.len();
        let space = (0..arity).try_fold(1usize, |acc, _| acc.checked_mul(radix));
        match space {
            Some(n) if n <= DENSE_LIMIT => {
                let mut bits = vec![false; n];
                for t in rel.tuples() {
                    bits[t.iter().fold(0, |acc, &x| acc * radix + x)] = true;
                }
                TupleSet::Dense { radix, bits }
            }
            _ => TupleSet::Sparse(rel.tuples().cloned().collect()),
        }
    }

    fn contains(&self, t: &[usize]) -> bool {
        match self {
            TupleSet::Dense { radix, bits } => bits[t.iter().fold(0, |acc, &x| acc * radix + x)],
            TupleSet::Sparse(set) => set.contains(t),
        }
    }
}

struct Constraint {
    rel: usize,
    vars: Vec<usize>,
}

struct Problem {
    n_src: usize,
    n_tgt: usize,
    constraints: Vec<Constraint>,
    by_var: Vec<Vec<usize>>,
    sets: Vec<TupleSet>,
    injective: bool,
}

struct State {
    assign: Vec<usize>,
    domains: Vec<Vec<usize>>,
    trail: Vec<(usize, Vec<usize>)>,
    used: Vec<bool>,
    scratch: Vec<usize>,
}

const UNASSIGNED: usize = usize::MAX;

impl Problem {
    fn new(g: &RelationalStructure, h: &RelationalStructure, injective: bool) -> Self {
        let mut constraints = Vec::new();
        let mut sets = Vec::new();
        let mut by_var = vec![Vec::new(); g.len()];
        for (rel_idx, (symbol, rel)) in g.relations().enumerate() {
            sets.push(TupleSet::build(h, symbol, rel.arity()));
            for t in rel.tuples() {
                let id = constraints.len();
                let mut seen = t.clone();
                seen.sort_unstable();
                seen.dedup();
                for &v in &seen {
                    by_var[v].push(id);
                }
                constraints.push(Constraint {
                    rel: rel_idx,
                    vars: t.clone(),
                });
            }
        }
        Problem {
            n_src: g.len(),
            n_tgt: h.len(),
            constraints,
            by_var,
            sets,
            injective,
        }
    }

    /// Initial domains: pinned values and single-variable constraints.
    fn initial_state(&self, pinned: &BTreeMap<usize, usize>) -> Option<State> {
        let mut domains: Vec<Vec<usize>> = (0..self.n_src)
            .map(|v| match pinned.get(&v) {
                Some(&a) if a < self.n_tgt => vec![a],
                Some(_) => vec![],
                None => (0..self.n_tgt).collect(),
            })
            .collect();
        let mut scratch = Vec::new();
        for c in &self.constraints {
            let v = c.vars[0];
            if c.vars.iter().all(|&w| w == v) {
                domains[v].retain(|&a| {
                    scratch.clear();
                    scratch.resize(c.vars.len(), a);
                    self.sets[c.rel].contains(&scratch)
                });
            }
        }
        if domains.iter().any(Vec::is_empty) {
            return None;
        }
        Some(State {
            assign: vec![UNASSIGNED; self.n_src],
            domains,
            trail: Vec::new(),
            used: vec![false; self.n_tgt],
            scratch,
        })
    }

    /// Forward checking after assigning `var`. Returns false on a wipe-out.
    fn propagate(&self, st: &mut State, var: usize) -> bool {
        for &ci in &self.by_var[var] {
            let c = &self.constraints[ci];
            let mut free = UNASSIGNED;
            let mut several = false;
            for &w in &c.vars {
                if st.assign[w] == UNASSIGNED {
                    if free == UNASSIGNED {
                        free = w;
                    } else if free != w {
                        several = true;
                        break;
                    }
                }
            }
            if several {
                continue;
            }
            let set = &self.sets[c.rel];
            if free == UNASSIGNED {
                st.scratch.clear();
                st.scratch.extend(c.vars.iter().map(|&w| st.assign[w]));
                if !set.contains(&st.scratch) {
                    return false;
                }
                continue;
            }
            let old = &st.domains[free];
            let mut kept = Vec::with_capacity(old.len());
            for &b in old {
                st.scratch.clear();
                st.scratch
                    .extend(c.vars.iter().map(|&w| if w == free { b } else { st.assign[w] }));
                if set.contains(&st.scratch) {
                    kept.push(b);
                }
            }
            if kept.len() < old.len() {
                let empty = kept.is_empty();
                let previous = std::mem::replace(&mut st.domains[free], kept);
                st.trail.push((free, previous));
                if empty {
                    return false;
                }
            }
        }
        true
    }

    fn undo(st: &mut State, mark: usize) {
        while st.trail.len() > mark {
            let (v, dom) = st.trail.pop().expect("non-empty trail");
            st.domains[v] = dom;
        }
    }

    fn search<F>(&self, st: &mut State, var: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if var == self.n_src {
            return visit(&st.assign);
        }
        let candidates = st.domains[var].clone();
        for a in candidates {
            if self.injective && st.used[a] {
                continue;
            }
            let mark = st.trail.len();
            st.assign[var] = a;
            st.used[a] = true;
            let flow = if self.propagate(st, var) {
                self.search(st, var + 1, visit)
            } else {
                ControlFlow::Continue(())
            };
            Self::undo(st, mark);
            st.assign[var] = UNASSIGNED;
            st.used[a] = false;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Calls `visit` on every homomorphism admitted by `opts` (ignoring `limit`
/// and `nonconstant_only`), in lexicographic order, until it breaks.
pub fn for_each_hom<F>(g: &RelationalStructure, h: &RelationalStructure, opts: &SearchOptions, mut visit: F)
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let problem = Problem::new(g, h, opts.injective);
    if let Some(mut st) = problem.initial_state(&opts.pinned) {
        let _ = problem.search(&mut st, 0, &mut visit);
    }
}

fn accept(opts: &SearchOptions, map: &[usize]) -> bool {
    !opts.nonconstant_only || map.windows(2).any(|w| w[0] != w[1])
}

/// All (or the first `opts.limit`) homomorphisms from `g` to `h`.
pub fn find_homs(g: &RelationalStructure, h: &RelationalStructure, opts: &SearchOptions) -> Vec<Homomorphism> {
    let problem = Problem::new(g, h, opts.injective);
    let Some(root) = problem.initial_state(&opts.pinned) else {
        return Vec::new();
    };

    let collect = |st: &mut State, start: usize| {
        let mut out = Vec::new();
        let _ = problem.search(st, start, &mut |m: &[usize]| {
            if accept(opts, m) {
                out.push(m.to_vec());
                if opts.limit != 0 && out.len() >= opts.limit {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        out
    };

    let mut maps = if opts.deterministic_order || problem.n_src == 0 {
        let mut st = root;
        collect(&mut st, 0)
    } else {
        let branches: Vec<Vec<Vec<usize>>> = root.domains[0]
            .par_iter()
            .map(|&a| {
                let mut pinned = opts.pinned.clone();
                pinned.insert(0, a);
                match problem.initial_state(&pinned) {
                    Some(mut st) => collect(&mut st, 0),
                    None => Vec::new(),
                }
            })
            .collect();
        branches.into_iter().flatten().collect()
    };
    if opts.limit != 0 {
        maps.truncate(opts.limit);
    }
    maps.into_iter().map(Homomorphism::from_verified).collect()
}

/// Number of homomorphisms admitted by `opts`, without materializing them.
pub fn count_homs(g: &RelationalStructure, h: &RelationalStructure, opts: &SearchOptions) -> usize {
    let mut n = 0;
    for_each_hom(g, h, opts, |m| {
        if accept(opts, m) {
            n += 1;
            if opts.limit != 0 && n >= opts.limit {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    n
}

pub fn polymorphisms(h: &RelationalStructure, n: usize) -> Result<Vec<OperationTable>> {
    polymorphisms_with(h, n, &Limits::default())
}

/// The `n`-ary polymorphisms of `h`: homomorphisms `h^n -> h`, read as
/// operation tables (power ids are lexicographic, so a map is a table).
pub fn polymorphisms_with(h: &RelationalStructure, n: usize, limits: &Limits) -> Result<Vec<OperationTable>> {
    let p = power_with(h, n, limits)?;
    Ok(find_homs(&p, h, &SearchOptions::default())
        .into_iter()
        .map(|f| OperationTable {
            arity: n,
            size: h.len(),
            values: f.into_map(),
        })
        .collect())
}

/// Whether `t` maps every `arity`-tuple of tuples of each relation of `s`
/// back into that relation, i.e. whether `t` is a polymorphism of `s`.
/// Visits `|R|^arity` combinations per relation.
pub fn preserves(s: &RelationalStructure, t: &OperationTable, limits: &Limits) -> Result<bool> {
    if t.size != s.len() {
        return Err(Error::InvalidTable(format!(
            "table over {} elements for a structure on {}",
            t.size,
            s.len()
        )));
    }
    for (symbol, rel) in s.relations() {
        let tuples: Vec<&Vec<usize>> = rel.tuples().collect();
        let combos = (0..t.arity).try_fold(1usize, |acc, _| acc.checked_mul(tuples.len()));
        limits.check(format!("tuple combinations of `{symbol}`"), combos)?;
        if tuples.is_empty() {
            continue;
        }
        let mut pick = vec![0; t.arity];
        let mut args = vec![0; t.arity];
        let mut image = vec![0; rel.arity()];
        loop {
            for (j, slot) in image.iter_mut().enumerate() {
                for (a, &p) in args.iter_mut().zip(&pick) {
                    *a = tuples[p][j];
                }
                *slot = t.apply(&args);
            }
            if !rel.contains(&image) {
                return Ok(false);
            }
            if !crate::structures::advance(&mut pick, |_| tuples.len()) {
                break;
            }
        }
    }
    Ok(true)
}

/// A retraction `alpha: g -> h` with coretraction `beta: h -> g`, `alpha ∘ beta = id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retraction {
    pub alpha: Homomorphism,
    pub beta: Homomorphism,
}

/// First retraction found: coretractions in lexicographic order, then the
/// first matching retraction for it.
pub fn find_retraction(g: &RelationalStructure, h: &RelationalStructure) -> Option<Retraction> {
    let mut found = None;
    let opts = SearchOptions {
        injective: true,
        ..SearchOptions::default()
    };
    for_each_hom(h, g, &opts, |beta| {
        if let Some(alpha) = retraction_for(g, h, beta) {
            found = Some(Retraction {
                alpha,
                beta: Homomorphism::from_verified(beta.to_vec()),
            });
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    found
}

/// A retraction `g -> h` inverting the given map `beta: h -> g`, provided
/// `beta` is itself a homomorphism.
pub fn retraction_for(g: &RelationalStructure, h: &RelationalStructure, beta: &[usize]) -> Option<Homomorphism> {
    if !is_homomorphism(h, g, beta) {
        return None;
    }
    let mut pinned = BTreeMap::new();
    for (b, &x) in beta.iter().enumerate() {
        if pinned.insert(x, b).is_some() {
            return None;
        }
    }
    let opts = SearchOptions {
        limit: 1,
        pinned,
        ..SearchOptions::default()
    };
    find_homs(g, h, &opts).into_iter().next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{power, RelationalStructure as RS};

    fn s() -> RS {
        RS::semilattice_s()
    }

    fn maps(v: Vec<Homomorphism>) -> Vec<Vec<usize>> {
        v.into_iter().map(Homomorphism::into_map).collect()
    }

    #[test]
    fn homs_s_to_s() {
        let all = maps(find_homs(&s(), &s(), &SearchOptions::all()));
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        let nc = maps(find_homs(&s(), &s(), &SearchOptions::nonconstant()));
        assert_eq!(nc, vec![vec![0, 1]]);
        assert_eq!(find_homs(&RS::singleton_i(), &s(), &SearchOptions::all()).len(), 2);
    }

    #[test]
    fn limit_and_pinning() {
        let opts = SearchOptions {
            limit: 1,
            ..SearchOptions::default()
        };
        assert_eq!(maps(find_homs(&s(), &s(), &opts)), vec![vec![0, 0]]);
        let mut pinned = BTreeMap::new();
        pinned.insert(1, 1);
        let opts = SearchOptions {
            pinned,
            ..SearchOptions::default()
        };
        assert_eq!(maps(find_homs(&s(), &s(), &opts)), vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(count_homs(&s(), &s(), &SearchOptions::all()), 3);
    }

    #[test]
    fn parallel_matches_sequential() {
        let p = power(&s(), 3).unwrap();
        let seq = find_homs(&p, &s(), &SearchOptions::all());
        let par = find_homs(
            &p,
            &s(),
            &SearchOptions {
                deterministic_order: false,
                ..SearchOptions::default()
            },
        );
        assert_eq!(seq, par);
    }

    #[test]
    fn polymorphism_counts() {
        let counts: Vec<usize> = (1..=3).map(|n| polymorphisms(&s(), n).unwrap().len()).collect();
        assert_eq!(counts, vec![3, 5, 9]);
        let binary = polymorphisms(&s(), 2).unwrap();
        let values: Vec<Vec<usize>> = binary.into_iter().map(|t| t.values).collect();
        assert_eq!(
            values,
            vec![
                vec![0, 0, 0, 0],
                vec![0, 0, 0, 1],
                vec![0, 0, 1, 1],
                vec![0, 1, 0, 1],
                vec![1, 1, 1, 1]
            ]
        );
    }

    #[test]
    fn retractions() {
        let i = RS::singleton_i();
        let r = find_retraction(&s(), &i).unwrap();
        assert_eq!(r.alpha.map(), &[0, 0]);
        assert_eq!(r.beta.map(), &[0]);

        let s2 = power(&s(), 2).unwrap();
        let r = find_retraction(&s2, &s()).unwrap();
        assert_eq!(r.beta.then(&r.alpha).map(), &[0, 1]);
        // the diagonal works as a coretraction too, with the first projection
        let alpha = retraction_for(&s2, &s(), &[0, 3]).unwrap();
        assert_eq!(alpha.map()[0], 0);
        assert_eq!(alpha.map()[3], 1);

        assert!(find_retraction(&i, &s()).is_none());
    }

    #[test]
    fn homomorphism_check() {
        assert!(is_homomorphism(&s(), &s(), &[0, 1]));
        assert_eq!(
            check_homomorphism(&s(), &s(), &[1, 0]),
            Err(HomFailure::Missing {
                symbol: "R".into(),
                tuple: vec![0, 1, 0],
                image: vec![1, 0, 1]
            })
        );
        let s3 = power(&s(), 3).unwrap();
        assert!(is_homomorphism(&s3, &s3, &[5; 8]));
        assert!(matches!(
            check_homomorphism(&s(), &s(), &[0]),
            Err(HomFailure::WrongLength { .. })
        ));
    }

    #[test]
    fn table_validation() {
        assert!(OperationTable::new(2, 2, vec![0, 0, 0, 1]).is_ok());
        assert!(OperationTable::new(2, 2, vec![0, 0, 0]).is_err());
        assert!(OperationTable::new(1, 2, vec![0, 2]).is_err());
        let min = OperationTable::from_fn(2, 2, |a| a[0].min(a[1])).unwrap();
        assert_eq!(min.values, vec![0, 0, 0, 1]);
        assert!(min.is_idempotent());
    }
}
