//! Free algebras of finite algebras, the relational structure generated by
//! the two-element semilattice inside them, and its collapse onto powers of
//! that semilattice.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::homsearch::{find_homs, OperationTable, SearchOptions};
use crate::identlang::Term;
use crate::structures::{
    advance, default_labels, disjoint_union, image_structure, induced_substructure, kernel, power_with, Homomorphism,
    Limits, ProductIndex, RelationalStructure, Substructure,
};

mod evidence;
mod verify;

pub use evidence::{hm_evidence, replay, HmEvidence, HmVerdict, LogEntry};
pub use verify::{verify_claims, verify_lemma21, verify_lemma22, ItemReport, Report, Verdict};

/// A finite algebra on `0..size` with named basic operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    labels: Vec<String>,
    operations: BTreeMap<String, OperationTable>,
}

impl FiniteAlgebra {
    pub fn new(size: usize, operations: BTreeMap<String, OperationTable>) -> Result<Self> {
        Self::with_labels(default_labels(size), operations)
    }

    pub fn with_labels(labels: Vec<String>, operations: BTreeMap<String, OperationTable>) -> Result<Self> {
        for (name, t) in &operations {
            t.validate()?;
            if t.size != labels.len() {
                return Err(Error::InvalidTable(format!(
                    "operation `{name}` is over {} elements, the universe has {}",
                    t.size,
                    labels.len()
                )));
            }
        }
        Ok(FiniteAlgebra { labels, operations })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operations(&self) -> &BTreeMap<String, OperationTable> {
        &self.operations
    }

    pub fn operation(&self, name: &str) -> Option<&OperationTable> {
        self.operations.get(name)
    }

    pub fn arities(&self) -> BTreeMap<String, usize> {
        self.operations.iter().map(|(s, t)| (s.clone(), t.arity)).collect()
    }

    /// First operation that is not idempotent.
    pub fn non_idempotent(&self) -> Option<&str> {
        self.operations
            .iter()
            .find(|(_, t)| !t.is_idempotent())
            .map(|(s, _)| s.as_str())
    }

    /// `({0,1}, meet)`.
    pub fn semilattice() -> Self {
        let meet = OperationTable::new(2, 2, vec![0, 0, 0, 1]).expect("valid");
        Self::new(2, [("meet".to_string(), meet)].into()).expect("valid")
    }

    /// `({0,1}, meet, join)`.
    pub fn lattice() -> Self {
        let meet = OperationTable::new(2, 2, vec![0, 0, 0, 1]).expect("valid");
        let join = OperationTable::new(2, 2, vec![0, 1, 1, 1]).expect("valid");
        Self::new(2, [("join".to_string(), join), ("meet".to_string(), meet)].into()).expect("valid")
    }

    /// `({0,1}, majority)`.
    pub fn majority() -> Self {
        let maj = OperationTable::from_fn(3, 2, |a| usize::from(a.iter().sum::<usize>() >= 2)).expect("valid");
        Self::new(2, [("maj".to_string(), maj)].into()).expect("valid")
    }

    /// A set with no operations.
    pub fn set(size: usize) -> Self {
        Self::new(size, BTreeMap::new()).expect("valid")
    }
}

/// How a closure element was first obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    Generator(usize),
    Apply { op: String, args: Vec<usize> },
}

/// Subuniverse of a power generated by some tuples, in order of discovery.
#[derive(Debug, Clone, Default)]
pub(crate) struct Closure {
    pub elements: Vec<Vec<usize>>,
    pub derivations: Vec<Derivation>,
    /// Element id of each generator; coinciding generators share an id.
    pub generator_ids: Vec<usize>,
    index: HashMap<Vec<usize>, usize>,
}

impl Closure {
    /// Breadth-first: generators first, then rounds in which each operation
    /// (by name) is applied coordinatewise to the argument tuples (in
    /// lexicographic order) that involve an element found in the previous
    /// round.
    pub fn generate(
        generators: &[Vec<usize>],
        ops: &BTreeMap<String, OperationTable>,
        limits: &Limits,
        what: &str,
    ) -> Result<Self> {
        let mut c = Closure::default();
        for (i, g) in generators.iter().enumerate() {
            let id = match c.index.get(g) {
                Some(&id) => id,
                None => c.push(g.clone(), Derivation::Generator(i), limits, what)?,
            };
            c.generator_ids.push(id);
        }
        let width = generators.first().map_or(0, Vec::len);
        let mut frontier = 0;
        let mut value = vec![0; width];
        let mut point = Vec::new();
        while frontier < c.elements.len() {
            let end = c.elements.len();
            for (name, table) in ops {
                let mut args = vec![0; table.arity];
                loop {
                    if args.iter().any(|&a| a >= frontier) {
                        for (k, slot) in value.iter_mut().enumerate() {
                            point.clear();
                            point.extend(args.iter().map(|&a| c.elements[a][k]));
                            *slot = table.apply(&point);
                        }
                        if !c.index.contains_key(&value) {
                            let d = Derivation::Apply {
                                op: name.clone(),
                                args: args.clone(),
                            };
                            c.push(value.clone(), d, limits, what)?;
                        }
                    }
                    if !advance(&mut args, |_| end) {
                        break;
                    }
                }
            }
            frontier = end;
        }
        Ok(c)
    }

    fn push(&mut self, e: Vec<usize>, d: Derivation, limits: &Limits, what: &str) -> Result<usize> {
        let id = self.elements.len();
        limits.check(what, Some(id + 1))?;
        self.index.insert(e.clone(), id);
        self.elements.push(e);
        self.derivations.push(d);
        Ok(id)
    }

    pub fn lookup(&self, e: &[usize]) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Operation tables of the closure itself.
    pub fn tables(&self, ops: &BTreeMap<String, OperationTable>) -> BTreeMap<String, OperationTable> {
        let n = self.elements.len();
        let width = self.elements.first().map_or(0, Vec::len);
        ops.iter()
            .map(|(name, table)| {
                let t = OperationTable::from_fn(table.arity, n, |args| {
                    let v: Vec<usize> = (0..width)
                        .map(|k| {
                            let p: Vec<usize> = args.iter().map(|&a| self.elements[a][k]).collect();
                            table.apply(&p)
                        })
                        .collect();
                    self.index[&v]
                })
                .expect("closed under operations");
                (name.clone(), t)
            })
            .collect()
    }

    /// Term for an element, reading generators as the given variables.
    pub fn term(&self, id: usize, vars: &[String]) -> Term {
        match &self.derivations[id] {
            Derivation::Generator(i) => Term::Var(vars[*i].clone()),
            Derivation::Apply { op, args } => Term::App(op.clone(), args.iter().map(|&a| self.term(a, vars)).collect()),
        }
    }
}

/// Names of the free generators: `x, y, z`, or `x1..xk` beyond three.
pub fn variable_names(k: usize) -> Vec<String> {
    if k <= 3 {
        ["x", "y", "z"][..k].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=k).map(|i| format!("x{i}")).collect()
    }
}

/// The free algebra on `rank` generators in the variety of `A`, realized as
/// the `rank`-ary term operations of `A`.
#[derive(Debug, Clone)]
pub struct FreeAlgebra {
    pub algebra: FiniteAlgebra,
    pub rank: usize,
    /// Ids of the projections.
    pub generators: Vec<usize>,
    closure: Closure,
    vars: Vec<String>,
}

impl FreeAlgebra {
    /// Value table of an element: `t(a_1..a_k)` at the lexicographic rank of
    /// `(a_1..a_k)`.
    pub fn element(&self, id: usize) -> &[usize] {
        &self.closure.elements[id]
    }

    pub fn len(&self) -> usize {
        self.closure.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closure.elements.is_empty()
    }

    pub fn lookup(&self, tuple: &[usize]) -> Option<usize> {
        self.closure.lookup(tuple)
    }

    pub fn derivation(&self, id: usize) -> &Derivation {
        &self.closure.derivations[id]
    }

    pub fn term(&self, id: usize) -> Term {
        self.closure.term(id, &self.vars)
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }
}

pub fn free_algebra(a: &FiniteAlgebra, k: usize) -> Result<FreeAlgebra> {
    free_algebra_with(a, k, &Limits::default())
}

pub fn free_algebra_with(a: &FiniteAlgebra, k: usize, limits: &Limits) -> Result<FreeAlgebra> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "free algebra needs at least one generator".into(),
        ));
    }
    if a.size() == 0 {
        return Err(Error::InvalidArgument("free algebra of an empty algebra".into()));
    }
    let coords = ProductIndex::new(vec![a.size(); k]);
    let width = limits.check("coordinates of the free algebra", coords.as_ref().map(|c| c.size()))?;
    let coords = coords.expect("checked");
    let generators: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..width).map(|c| coords.decode(c)[i]).collect())
        .collect();
    let closure = Closure::generate(&generators, a.operations(), limits, "free algebra elements")?;
    let vars = variable_names(k);
    let labels = (0..closure.elements.len())
        .map(|id| closure.term(id, &vars).to_string())
        .collect();
    let algebra = FiniteAlgebra::with_labels(labels, closure.tables(a.operations()))?;
    Ok(FreeAlgebra {
        algebra,
        rank: k,
        generators: closure.generator_ids.clone(),
        closure,
        vars,
    })
}

/// The free algebra on `x, y` with the ternary relation generated by
/// `(x,x,x), (x,y,x), (y,x,x), (y,y,y)`, split by the unary term `t(x,x)`.
#[derive(Debug, Clone)]
pub struct FreeStructure {
    pub base: FiniteAlgebra,
    pub free: FreeAlgebra,
    pub fstruct: RelationalStructure,
    /// Unary term operations of the base algebra; index 0 is the identity.
    pub unary: Vec<Vec<usize>>,
    pub unary_terms: Vec<Term>,
    /// Unary term `t(x,x)` of every element.
    pub component_of: Vec<usize>,
    /// Elements with the given unary term, ascending.
    pub components: Vec<Vec<usize>>,
    /// Induced substructures on the components.
    pub parts: Vec<Substructure>,
    /// Element `u(x)` for each unary term `u`.
    pub ux: Vec<usize>,
    /// Element `u(y)` for each unary term `u`.
    pub uy: Vec<usize>,
}

/// Index of the identity among the unary terms.
pub const IDENTITY: usize = 0;

impl FreeStructure {
    pub fn build(a: &FiniteAlgebra, limits: &Limits) -> Result<Self> {
        let free = free_algebra_with(a, 2, limits)?;
        let (x, y) = (free.generators[0], free.generators[1]);
        let seeds = [[x, x, x], [x, y, x], [y, x, x], [y, y, y]].map(|t| t.to_vec());
        let rel = Closure::generate(&seeds, free.algebra.operations(), limits, "free relation tuples")?;
        let triples: Vec<[usize; 3]> = rel.elements.iter().map(|t| [t[0], t[1], t[2]]).collect();
        let fstruct = RelationalStructure::ternary(free.algebra.labels().to_vec(), &triples)?;

        let n = a.size();
        let identity: Vec<usize> = (0..n).collect();
        let uc = Closure::generate(&[identity], a.operations(), limits, "unary term operations")?;
        let xvar = variable_names(1);
        let unary_terms = (0..uc.elements.len()).map(|i| uc.term(i, &xvar)).collect();

        let mut component_of = Vec::with_capacity(free.len());
        for t in 0..free.len() {
            let e = free.element(t);
            let diag: Vec<usize> = (0..n).map(|b| e[b * n + b]).collect();
            let u = uc
                .lookup(&diag)
                .ok_or_else(|| Error::Verification(format!("t(x,x) of `{}` is not a unary term", free.term(t))))?;
            component_of.push(u);
        }
        let mut components = vec![Vec::new(); uc.elements.len()];
        for (t, &u) in component_of.iter().enumerate() {
            components[u].push(t);
        }
        let parts = components
            .iter()
            .map(|c| induced_substructure(&fstruct, c))
            .collect::<Result<Vec<_>>>()?;

        let find = |f: &dyn Fn(usize, usize) -> usize, what: &str| -> Result<Vec<usize>> {
            uc.elements
                .iter()
                .map(|u| {
                    let tuple: Vec<usize> = (0..n * n).map(|c| u[f(c / n, c % n)]).collect();
                    free.lookup(&tuple)
                        .ok_or_else(|| Error::Verification(format!("{what} is missing from the free algebra")))
                })
                .collect()
        };
        let ux = find(&|a, _| a, "u(x)")?;
        let uy = find(&|_, b| b, "u(y)")?;

        Ok(FreeStructure {
            base: a.clone(),
            free,
            fstruct,
            unary: uc.elements.clone(),
            unary_terms,
            component_of,
            components,
            parts,
            ux,
            uy,
        })
    }

    pub fn x(&self) -> usize {
        self.free.generators[0]
    }

    pub fn y(&self) -> usize {
        self.free.generators[1]
    }
}

/// Non-constant homomorphisms from each component to the two-element
/// semilattice, one list per unary term.
pub fn compute_h(fs: &FreeStructure) -> Vec<Vec<Homomorphism>> {
    let s = RelationalStructure::semilattice_s();
    fs.parts
        .par_iter()
        .map(|p| find_homs(&p.structure, &s, &SearchOptions::nonconstant()))
        .collect()
}

/// The map `t ↦ [t]` onto a disjoint union of powers of the two-element
/// semilattice, its image and the induced quotient algebra.
#[derive(Debug, Clone)]
pub struct Collapse {
    /// Disjoint union of the powers, one part per unary term.
    pub g: RelationalStructure,
    pub offsets: Vec<usize>,
    pub psi: Homomorphism,
    pub k: Substructure,
    pub kalg: FiniteAlgebra,
    /// Element of `K` for each element of the free algebra.
    pub k_of_f: Vec<usize>,
    /// Unary term of each element of `K`.
    pub k_component: Vec<usize>,
    /// `[t]` for each element of `K`.
    pub k_bits: Vec<Vec<usize>>,
    /// Elements of `K` per unary term, ascending.
    pub k_blocks: Vec<Vec<usize>>,
    pub k_parts: Vec<Substructure>,
    pub kernel: Vec<Vec<usize>>,
}

impl Collapse {
    pub fn build(fs: &FreeStructure, h: &[Vec<Homomorphism>], limits: &Limits) -> Result<Self> {
        let s = RelationalStructure::semilattice_s();
        let parts: Vec<RelationalStructure> = h
            .iter()
            .map(|hu| {
                if hu.is_empty() {
                    Ok(RelationalStructure::point(&s.signature()))
                } else {
                    power_with(&s, hu.len(), limits)
                }
            })
            .collect::<Result<_>>()?;
        let mut offsets = Vec::with_capacity(parts.len());
        let mut total = 0;
        for p in &parts {
            offsets.push(total);
            total += p.len();
        }
        let g = disjoint_union(&parts.iter().collect::<Vec<_>>())?;

        let psi_map: Vec<usize> = (0..fs.free.len())
            .map(|t| {
                let u = fs.component_of[t];
                let local = fs.parts[u].local_id(t).expect("in its component");
                offsets[u] + h[u].iter().fold(0, |r, phi| 2 * r + phi.apply(local))
            })
            .collect();
        let psi = Homomorphism::new(&fs.fstruct, &g, psi_map)
            .map_err(|e| Error::Verification(format!("t ↦ [t] is not a homomorphism: {e}")))?;
        let k = image_structure(&fs.fstruct, &g, &psi);
        let k_of_f: Vec<usize> = psi.map().iter().map(|&p| k.local_id(p).expect("in image")).collect();

        let mut k_component = Vec::with_capacity(k.parent_ids.len());
        let mut k_bits = Vec::with_capacity(k.parent_ids.len());
        let mut k_blocks = vec![Vec::new(); h.len()];
        for (kid, &p) in k.parent_ids.iter().enumerate() {
            let u = offsets.partition_point(|&o| o <= p) - 1;
            let width = h[u].len();
            let rank = p - offsets[u];
            k_component.push(u);
            k_bits.push((0..width).map(|i| (rank >> (width - 1 - i)) & 1).collect());
            k_blocks[u].push(kid);
        }
        let labels: Vec<String> = k_component
            .iter()
            .zip(&k_bits)
            .map(|(u, bits): (&usize, &Vec<usize>)| {
                let b: Vec<String> = bits.iter().map(usize::to_string).collect();
                format!("{u}:[{}]", b.join(""))
            })
            .collect();
        let k = Substructure {
            structure: k.structure.with_labels(labels.clone())?,
            parent_ids: k.parent_ids,
        };
        let k_parts = k_blocks
            .iter()
            .map(|b| induced_substructure(&k.structure, b))
            .collect::<Result<Vec<_>>>()?;

        let kn = k.parent_ids.len();
        let mut ops = BTreeMap::new();
        for (name, table) in fs.free.algebra.operations() {
            let mut values: Vec<Option<usize>> = vec![None; kn.pow(table.arity as u32)];
            let mut args = vec![0; table.arity];
            let mut kargs = vec![0; table.arity];
            loop {
                for (ka, &a) in kargs.iter_mut().zip(&args) {
                    *ka = k_of_f[a];
                }
                let slot = kargs.iter().fold(0, |acc, &a| acc * kn + a);
                let v = k_of_f[table.apply(&args)];
                match values[slot] {
                    Some(w) if w != v => {
                        return Err(Error::IllDefined {
                            op: name.clone(),
                            args: kargs,
                            left: w,
                            right: v,
                        })
                    }
                    _ => values[slot] = Some(v),
                }
                if !advance(&mut args, |_| fs.free.len()) {
                    break;
                }
            }
            let values = values
                .into_iter()
                .map(|v| v.ok_or_else(|| Error::Verification(format!("`{name}` undefined on K"))))
                .collect::<Result<Vec<_>>>()?;
            ops.insert(name.clone(), OperationTable::new(table.arity, kn, values)?);
        }
        let kalg = FiniteAlgebra::with_labels(labels, ops)?;
        let kernel = kernel(psi.map());
        Ok(Collapse {
            g,
            offsets,
            psi,
            k,
            kalg,
            k_of_f,
            k_component,
            k_bits,
            k_blocks,
            k_parts,
            kernel,
        })
    }

    pub fn k(&self) -> &RelationalStructure {
        &self.k.structure
    }

    /// Component and bit vector of an element of the disjoint union.
    pub fn decode_g(&self, p: usize, h: &[Vec<Homomorphism>]) -> (usize, Vec<usize>) {
        let u = self.offsets.partition_point(|&o| o <= p) - 1;
        let width = h[u].len();
        let rank = p - self.offsets[u];
        (u, (0..width).map(|i| (rank >> (width - 1 - i)) & 1).collect())
    }

    pub fn encode_g(&self, u: usize, bits: &[usize]) -> usize {
        self.offsets[u] + bits.iter().fold(0, |r, &b| 2 * r + b)
    }
}

/// The whole pipeline for one algebra.
#[derive(Debug, Clone)]
pub struct FreeBundle {
    pub structure: FreeStructure,
    pub h: Vec<Vec<Homomorphism>>,
    pub collapse: Collapse,
}

impl FreeBundle {
    pub fn build(a: &FiniteAlgebra, limits: &Limits) -> Result<Self> {
        let structure = FreeStructure::build(a, limits)?;
        let h = compute_h(&structure);
        let collapse = Collapse::build(&structure, &h, limits)?;
        Ok(FreeBundle { structure, h, collapse })
    }

    pub fn k(&self) -> &RelationalStructure {
        self.collapse.k()
    }

    /// `[t]` as an element of `K`.
    pub fn class_of(&self, t: usize) -> usize {
        self.collapse.k_of_f[t]
    }

    /// Kernel classes of `t ↦ [t]` written as terms.
    pub fn kernel_terms(&self) -> Vec<Vec<String>> {
        self.collapse
            .kernel
            .iter()
            .map(|c| c.iter().map(|&t| self.structure.free.term(t).to_string()).collect())
            .collect()
    }
}
