//! The transform `D ↦ D₂` on homomorphisms `S → D`, driven by the
//! four-element semilattice `Y`, and the component bookkeeping around it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::homsearch::{find_homs, is_homomorphism, SearchOptions};
use crate::structures::{connected_components, find_isomorphism, power, RelationalStructure};

pub const Y_LABELS: [&str; 4] = ["d", "a", "b", "c"];

/// The full meet semilattice on `{d, a, b, c}` with `d < c < a` and
/// `d < c < b`: all sixteen triples `(u, v, u∧v)`.
pub fn y_structure() -> RelationalStructure {
    const D: usize = 0;
    const C: usize = 3;
    // a and b are the maximal elements
    let meet = |u: usize, v: usize| match (u, v) {
        _ if u == v => u,
        (D, _) | (_, D) => D,
        _ => C,
    };
    let mut triples = Vec::new();
    for u in 0..4 {
        for v in 0..4 {
            triples.push([u, v, meet(u, v)]);
        }
    }
    RelationalStructure::ternary(Y_LABELS.iter().map(|s| s.to_string()).collect(), &triples).expect("valid triples")
}

/// The structure `gadget_transform(S)` must produce.
pub fn e0_structure() -> RelationalStructure {
    RelationalStructure::ternary(
        vec!["(0,0)".into(), "(0,1)".into(), "(1,1)".into()],
        &[[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 1], [2, 2, 2]],
    )
    .expect("valid triples")
}

/// Checks that `Y` reproduces the known transform of `S`.
pub fn verify_y_structure() -> Result<()> {
    let e0 = gadget_transform(&RelationalStructure::semilattice_s())?;
    if e0 != e0_structure() {
        return Err(Error::Verification(format!("transform of S is\n{e0}")));
    }
    Ok(())
}

/// Universe: the homomorphisms `f: S → D`, keyed by `(f(0), f(1))` in
/// lexicographic order. `(f, g, h)` is a triple iff `f(0) = g(0) = h(0)` and
/// `d ↦ f(0), a ↦ f(1), b ↦ g(1), c ↦ h(1)` is a homomorphism `Y → D`.
pub fn gadget_transform(d: &RelationalStructure) -> Result<RelationalStructure> {
    d.single_ternary()
        .map_err(|_| Error::SignatureMismatch("the transform needs a single ternary relation".into()))?;
    if d.relation("R").is_none() {
        return Err(Error::SignatureMismatch("the ternary relation must be named R".into()));
    }
    let s = RelationalStructure::semilattice_s();
    let y = y_structure();
    let homs = find_homs(&s, d, &SearchOptions::all());
    let labels = homs
        .iter()
        .map(|f| format!("({},{})", d.label(f.apply(0)), d.label(f.apply(1))))
        .collect();
    let mut by_base: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, f) in homs.iter().enumerate() {
        by_base.entry(f.apply(0)).or_default().push(i);
    }
    let mut triples = Vec::new();
    for group in by_base.values() {
        for &f in group {
            for &g in group {
                for &h in group {
                    let map = [homs[f].apply(0), homs[f].apply(1), homs[g].apply(1), homs[h].apply(1)];
                    if is_homomorphism(&y, d, &map) {
                        triples.push([f, g, h]);
                    }
                }
            }
        }
    }
    RelationalStructure::ternary(labels, &triples)
}

/// `n` elements with only the constant triples.
pub fn diagonal_structure(n: usize) -> Result<RelationalStructure> {
    if n == 0 {
        return Err(Error::InvalidArgument("diagonal structure needs n >= 1".into()));
    }
    let triples: Vec<[usize; 3]> = (0..n).map(|a| [a, a, a]).collect();
    RelationalStructure::ternary(crate::structures::default_labels(n), &triples)
}

/// One connected component and the power of `S` it is isomorphic to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMatch {
    pub block: Vec<usize>,
    pub power: Option<usize>,
}

/// The `k` with `c ≅ S^k` (`S^0` being a point), if any.
pub fn match_power(c: &RelationalStructure) -> Option<usize> {
    let n = c.len();
    if n == 0 || !n.is_power_of_two() {
        return None;
    }
    let k = n.trailing_zeros() as usize;
    let s = RelationalStructure::semilattice_s();
    let target = if k == 0 {
        RelationalStructure::point(&s.signature())
    } else {
        power(&s, k).ok()?
    };
    find_isomorphism(c, &target).map(|_| k)
}

/// Components of `s`, each matched against powers of `S`.
pub fn component_powers(s: &RelationalStructure) -> Vec<ComponentMatch> {
    let comps = connected_components(s);
    comps
        .partition
        .into_iter()
        .zip(&comps.induced)
        .map(|(block, c)| ComponentMatch {
            power: match_power(c),
            block,
        })
        .collect()
}

/// Multiplicity of each matched power; `None` counts unmatched components.
pub fn multiplicities(matches: &[ComponentMatch]) -> BTreeMap<Option<usize>, usize> {
    let mut out = BTreeMap::new();
    for m in matches {
        *out.entry(m.power).or_insert(0) += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetAnalysis {
    /// Powers of `S` making up the input.
    pub input: Vec<usize>,
    pub transformed: RelationalStructure,
    pub components: Vec<ComponentMatch>,
}

impl GadgetAnalysis {
    pub fn multiplicities(&self) -> BTreeMap<Option<usize>, usize> {
        multiplicities(&self.components)
    }
}

/// Transforms a disjoint union of powers of `S` and matches the components
/// of the result against powers of `S`.
pub fn analyze_gadget_components(d: &RelationalStructure) -> Result<GadgetAnalysis> {
    let input = component_powers(d)
        .into_iter()
        .map(|m| {
            m.power.ok_or_else(|| {
                Error::InvalidArgument(format!("component {:?} is not isomorphic to a power of S", m.block))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let transformed = gadget_transform(d)?;
    let components = component_powers(&transformed);
    Ok(GadgetAnalysis {
        input,
        transformed,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semilat::{is_partial_semilattice, largest_element};
    use crate::structures::{disjoint_union, is_reflexive, product};

    fn s() -> RelationalStructure {
        RelationalStructure::semilattice_s()
    }

    fn counts(pairs: &[(usize, usize)]) -> BTreeMap<Option<usize>, usize> {
        pairs.iter().map(|&(k, m)| (Some(k), m)).collect()
    }

    #[test]
    fn y_is_a_full_semilattice_without_top() {
        let y = y_structure();
        assert_eq!(y.tuple_count(), 16);
        assert!(is_reflexive(&y));
        assert!(is_partial_semilattice(&y).unwrap().is_accepted());
        assert_eq!(largest_element(&y).unwrap(), None);
        verify_y_structure().unwrap();
    }

    #[test]
    fn transform_of_s_and_i() {
        let e0 = gadget_transform(&s()).unwrap();
        assert_eq!(e0, e0_structure());
        let i = RelationalStructure::singleton_i();
        assert!(find_isomorphism(&gadget_transform(&i).unwrap(), &i).is_some());
        let si = disjoint_union(&[&s(), &i]).unwrap();
        assert!(find_isomorphism(&e0, &si).is_some());
        let e0i = disjoint_union(&[&e0, &i]).unwrap();
        assert!(find_isomorphism(&gadget_transform(&si).unwrap(), &e0i).is_some());
    }

    #[test]
    fn component_laws() {
        let a = analyze_gadget_components(&s()).unwrap();
        assert_eq!(a.multiplicities(), counts(&[(0, 1), (1, 1)]));
        let a = analyze_gadget_components(&power(&s(), 2).unwrap()).unwrap();
        assert_eq!(a.multiplicities(), counts(&[(0, 1), (1, 2), (2, 1)]));
        let ss = disjoint_union(&[&s(), &s()]).unwrap();
        let a = analyze_gadget_components(&ss).unwrap();
        assert_eq!(a.multiplicities(), counts(&[(0, 2), (1, 2)]));
        assert!(analyze_gadget_components(&y_structure()).is_err());
    }

    #[test]
    fn diagonal_step() {
        assert!(find_isomorphism(&diagonal_structure(1).unwrap(), &RelationalStructure::singleton_i()).is_some());
        assert_eq!(connected_components(&diagonal_structure(2).unwrap()).len(), 2);
        assert!(diagonal_structure(0).is_err());
        let e0 = gadget_transform(&s()).unwrap();
        let p = product(&[&e0, &diagonal_structure(2).unwrap()]).unwrap();
        assert_eq!(multiplicities(&component_powers(&p)), counts(&[(0, 2), (1, 2)]));
    }

    #[test]
    fn rejects_other_signatures() {
        let binary = RelationalStructure::with_size(2, vec![("E".into(), 2, vec![vec![0, 1]])]).unwrap();
        assert!(matches!(gadget_transform(&binary), Err(Error::SignatureMismatch(_))));
    }
}
