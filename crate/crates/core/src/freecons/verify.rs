//! Mechanical checks of the properties of the free structure and its collapse.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::Result;
use crate::homsearch::{find_homs, polymorphisms_with, preserves, retraction_for, OperationTable, SearchOptions};
use crate::semilat::{decompose_product_hom, is_partial_semilattice_with, largest_element, Decomposition, PslVerdict};
use crate::structures::{
    advance, connected_components, find_isomorphism, induced_substructure, is_reflexive, product_with, Limits,
    ProductIndex, RelationalStructure,
};

use super::evidence::first_surviving_labeling;
use super::{FreeBundle, IDENTITY};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
    /// The item presupposes a hypothesis that does not hold for this input.
    HypothesisAbsent(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail(why) => write!(f, "fail: {why}"),
            Verdict::HypothesisAbsent(why) => write!(f, "hypothesis absent: {why}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemReport {
    pub name: String,
    pub verdict: Verdict,
    pub hypothesis_dependent: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub items: Vec<ItemReport>,
}

impl Report {
    /// No item failed.
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| !matches!(i.verdict, Verdict::Fail(_)))
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.items.iter().find(|i| i.name == name).map(|i| &i.verdict)
    }

    fn push(&mut self, name: &str, outcome: Result<String, String>, hypothesis_dependent: bool) {
        let (verdict, detail) = match outcome {
            Ok(detail) => (Verdict::Pass, detail),
            Err(why) => (Verdict::Fail(why), String::new()),
        };
        self.items.push(ItemReport {
            name: name.to_string(),
            verdict,
            hypothesis_dependent,
            detail,
        });
    }

    fn absent(&mut self, name: &str, why: String) {
        self.items.push(ItemReport {
            name: name.to_string(),
            verdict: Verdict::HypothesisAbsent(why),
            hypothesis_dependent: true,
            detail: String::new(),
        });
    }
}

fn blocks_as_sets(blocks: &[Vec<usize>]) -> BTreeSet<BTreeSet<usize>> {
    blocks.iter().map(|b| b.iter().copied().collect()).collect()
}

/// Components of the free structure are the sets `F_u`, and (when some
/// semilattice labeling survives the two-variable identities) the
/// two-element semilattice is a retract of `F_id` via `x, y`.
pub fn verify_lemma21(b: &FreeBundle, limits: &Limits) -> Result<Report> {
    let fs = &b.structure;
    let mut r = Report::default();
    let comps = connected_components(&fs.fstruct);
    r.push(
        "item 1",
        if blocks_as_sets(&comps.partition) == blocks_as_sets(&fs.components) {
            Ok(format!("{} components", comps.len()))
        } else {
            Err(format!(
                "components {:?} differ from {:?}",
                comps.partition, fs.components
            ))
        },
        false,
    );
    match first_surviving_labeling(&fs.base, 2, limits)? {
        Err(_) => r.absent("item 2", "every labeling is refuted by a two-variable identity".into()),
        Ok(sigma) => {
            let part = &fs.parts[IDENTITY];
            let beta = [fs.x(), fs.y()].map(|t| part.local_id(t).expect("generators in F_id"));
            let s = RelationalStructure::semilattice_s();
            r.push(
                "item 2",
                match retraction_for(&part.structure, &s, &beta) {
                    Some(alpha) => Ok(format!("labeling {sigma}; retraction {:?}", alpha.map())),
                    None => Err(format!("no retraction although {sigma} survives")),
                },
                true,
            );
        }
    }
    Ok(r)
}

pub fn verify_lemma22(b: &FreeBundle, limits: &Limits) -> Result<Report> {
    let fs = &b.structure;
    let c = &b.collapse;
    let k = c.k();
    let s = RelationalStructure::semilattice_s();
    let mut r = Report::default();

    r.push(
        "item 1",
        if !is_reflexive(k) {
            Err("K is not reflexive".into())
        } else if let Some(u) = c.k_parts.iter().position(|p| !is_reflexive(&p.structure)) {
            Err(format!("K_{u} is not reflexive"))
        } else {
            Ok(format!("|K| = {}", k.len()))
        },
        false,
    );

    let item2 = (|| {
        let comps = connected_components(k);
        let images: Vec<Vec<usize>> = fs
            .components
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|&t| c.k_of_f[t])
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            })
            .collect();
        if blocks_as_sets(&comps.partition) != blocks_as_sets(&images) {
            return Err(format!(
                "components {:?} differ from images {:?}",
                comps.partition, images
            ));
        }
        for (u, part) in fs.parts.iter().enumerate() {
            let img: BTreeSet<Vec<usize>> = part
                .structure
                .single_ternary()
                .map_err(|e| e.to_string())?
                .tuples()
                .map(|t| t.iter().map(|&x| c.k_of_f[part.parent_ids[x]]).collect())
                .collect();
            let induced: BTreeSet<Vec<usize>> = c.k_parts[u]
                .structure
                .single_ternary()
                .map_err(|e| e.to_string())?
                .tuples()
                .map(|t| t.iter().map(|&x| c.k_parts[u].parent_ids[x]).collect())
                .collect();
            if img != induced {
                return Err(format!("relation of K_{u} is not the image of F_{u}"));
            }
        }
        Ok(format!("{} components", comps.len()))
    })();
    r.push("item 2", item2, false);

    if b.h[IDENTITY].is_empty() {
        r.absent("item 3", "H_id is empty".into());
    } else {
        let part = &c.k_parts[IDENTITY];
        let beta = [fs.x(), fs.y()].map(|t| part.local_id(c.k_of_f[t]).expect("in K_id"));
        r.push(
            "item 3",
            match retraction_for(&part.structure, &s, &beta) {
                Some(alpha) => Ok(format!("retraction {:?}", alpha.map())),
                None => Err("no retraction of K_id onto {[x],[y]}".into()),
            },
            true,
        );
    }

    let item4 = (|| {
        let mut checked = 0;
        for (u, part) in c.k_parts.iter().enumerate() {
            for f in find_homs(&part.structure, &s, &SearchOptions::all()) {
                checked += 1;
                if f.is_constant() {
                    continue;
                }
                let coords: Vec<usize> = (0..b.h[u].len())
                    .filter(|&phi| {
                        part.parent_ids
                            .iter()
                            .enumerate()
                            .all(|(x, &kid)| c.k_bits[kid][phi] == f.apply(x))
                    })
                    .collect();
                if coords.len() != 1 {
                    return Err(format!(
                        "map {:?} on K_{u} is a projection onto {} coordinates",
                        f.map(),
                        coords.len()
                    ));
                }
            }
        }
        Ok(format!("{checked} homomorphisms"))
    })();
    r.push("item 4", item4, false);

    let item5 = (|| {
        let mut rep = vec![0; fs.free.len()];
        for class in &c.kernel {
            for &t in class {
                rep[t] = class[0];
            }
        }
        let nf = fs.free.len();
        let mut translations = 0usize;
        for (name, table) in fs.free.algebra.operations() {
            let n = table.arity;
            for pos in 0..n {
                let mut params = vec![0; n - 1];
                loop {
                    translations += 1;
                    let apply = |a: usize| {
                        let mut args = params.clone();
                        args.insert(pos, a);
                        c.k_of_f[table.apply(&args)]
                    };
                    if let Some(a) = (0..nf).find(|&a| apply(a) != apply(rep[a])) {
                        return Err(format!(
                            "`{name}` at position {} separates {} from {}",
                            pos + 1,
                            fs.free.term(a),
                            fs.free.term(rep[a])
                        ));
                    }
                    if !advance(&mut params, |_| nf) {
                        break;
                    }
                }
            }
        }
        Ok(format!("{translations} basic translations"))
    })();
    r.push("item 5", item5, false);

    let item6 = (|| {
        let nf = fs.free.len();
        for (name, table) in fs.free.algebra.operations() {
            let kt = &c.kalg.operations()[name];
            let mut args = vec![0; table.arity];
            loop {
                let kargs: Vec<usize> = args.iter().map(|&a| c.k_of_f[a]).collect();
                if kt.apply(&kargs) != c.k_of_f[table.apply(&args)] {
                    return Err(format!("quotient map does not preserve `{name}` at {args:?}"));
                }
                if !advance(&mut args, |_| nf) {
                    break;
                }
            }
            if !preserves(k, kt, limits).map_err(|e| e.to_string())? {
                return Err(format!("`{name}` of K is not a polymorphism of K"));
            }
        }
        Ok(format!("{} operations", c.kalg.operations().len()))
    })();
    r.push("item 6", item6, false);
    Ok(r)
}

/// Normal form of a coordinate map `f_s` on a product of components: a
/// constant, or the meet of `y_l(φ)` over the listed `(l, φ)` pairs (`l`
/// strictly increasing, 0-based).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Form {
    Constant(usize),
    Meet(Vec<(usize, usize)>),
}

impl Form {
    fn eval(&self, bit: impl Fn(usize, usize) -> usize) -> usize {
        match self {
            Form::Constant(v) => *v,
            Form::Meet(pairs) => pairs.iter().map(|&(l, phi)| bit(l, phi)).min().expect("non-empty"),
        }
    }

    fn coords(&self) -> BTreeSet<usize> {
        match self {
            Form::Constant(_) => BTreeSet::new(),
            Form::Meet(p) => p.iter().map(|&(l, _)| l).collect(),
        }
    }
}

/// Every form of a coordinate map over components with the given numbers of
/// coordinates: both constants, then one optional coordinate per factor.
fn all_forms(widths: &[usize]) -> Vec<Form> {
    let mut out = vec![Form::Constant(0), Form::Constant(1)];
    let mut pick = vec![0; widths.len()];
    while advance(&mut pick, |l| widths[l] + 1) {
        out.push(Form::Meet(
            pick.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(l, &p)| (l, p - 1))
                .collect(),
        ));
    }
    out
}

/// Behaviour of a polymorphism on one component of `K^n`.
enum Restriction {
    Constant(usize),
    Into { target: usize, forms: Vec<Form> },
}

pub fn verify_claims(b: &FreeBundle, n: usize, limits: &Limits) -> Result<Report> {
    let fs = &b.structure;
    let c = &b.collapse;
    let k = c.k();
    let s = RelationalStructure::semilattice_s();
    let units = fs.unary.len();
    let mut r = Report::default();

    let claim1 = (|| {
        for (u, part) in c.k_parts.iter().enumerate() {
            let rel = part.structure.single_ternary().map_err(|e| e.to_string())?;
            for t in rel.tuples() {
                let bits = |i: usize| &c.k_bits[part.parent_ids[t[i]]];
                let meet: Vec<usize> = bits(0).iter().zip(bits(1)).map(|(a, b)| a & b).collect();
                if &meet != bits(2) {
                    return Err(format!("triple {t:?} of K_{u} is not a coordinatewise meet"));
                }
            }
            if !is_reflexive(&part.structure) {
                return Err(format!("K_{u} is not reflexive"));
            }
            if part.structure.len() <= limits.max_psl_universe {
                if let PslVerdict::Refused(why) =
                    is_partial_semilattice_with(&part.structure, limits).map_err(|e| e.to_string())?
                {
                    return Err(format!("K_{u} refused: {why}"));
                }
            }
            let top = part.local_id(c.k_of_f[fs.uy[u]]).expect("u(y) in K_u");
            let found = largest_element(&part.structure).map_err(|e| e.to_string())?;
            if found != Some(top) {
                return Err(format!("largest element of K_{u} is {found:?}, not [u(y)] = {top}"));
            }
        }
        Ok(format!("{units} components"))
    })();
    r.push("claim 1", claim1, false);

    let claim2 = (|| {
        for u in 0..units {
            let (kx, ky) = (c.k_of_f[fs.ux[u]], c.k_of_f[fs.uy[u]]);
            let single = c.k_parts[u].structure.len() == 1;
            if single != (kx == ky) {
                return Err(format!("|K_{u}| = 1 is {single} but [u(x)] = [u(y)] is {}", kx == ky));
            }
            if c.k_bits[kx].iter().any(|&v| v != 0) || c.k_bits[ky].iter().any(|&v| v != 1) {
                return Err(format!("[u(x)] or [u(y)] of component {u} is not constant 0 / 1"));
            }
            if !single {
                let pair = induced_substructure(k, &[kx.min(ky), kx.max(ky)]).map_err(|e| e.to_string())?;
                if find_isomorphism(&pair.structure, &s).is_none() {
                    return Err(format!("{{[u(x)], [u(y)]}} in K_{u} is not a copy of S"));
                }
            }
        }
        Ok(format!("{units} components"))
    })();
    r.push("claim 2", claim2, false);

    let polys = polymorphisms_with(k, n, limits)?;
    let widths: Vec<usize> = b.h.iter().map(Vec::len).collect();

    // Claim 3: restrictions of every polymorphism to every component of K^n.
    let mut restrictions: Vec<BTreeMap<Vec<usize>, Restriction>> = Vec::new();
    let claim3 = (|| {
        let mut maps = 0;
        for f in &polys {
            let mut per_component = BTreeMap::new();
            let mut us = vec![0; n];
            loop {
                let res = restrict(b, f, &us, limits)?;
                if let Restriction::Into { forms, .. } = &res {
                    maps += forms.len();
                }
                per_component.insert(us.clone(), res);
                if !advance(&mut us, |_| units) {
                    break;
                }
            }
            restrictions.push(per_component);
        }
        Ok(format!("{} polymorphisms, {maps} coordinate maps", polys.len()))
    })();
    r.push("claim 3", claim3.clone(), false);

    let claim4 = (|| {
        claim3.as_ref().map_err(|_| "depends on claim 3".to_string())?;
        let g = &c.g;
        let gn = ProductIndex::new(vec![g.len(); n]).ok_or("table too large")?;
        limits
            .check("extension table", Some(gn.size()))
            .map_err(|e| e.to_string())?;
        let mut checked_pol = 0;
        for (f, per_component) in polys.iter().zip(&restrictions) {
            let ext = OperationTable::from_fn(n, g.len(), |z| {
                let decoded: Vec<(usize, Vec<usize>)> = z.iter().map(|&p| c.decode_g(p, &b.h)).collect();
                let us: Vec<usize> = decoded.iter().map(|(u, _)| *u).collect();
                match &per_component[&us] {
                    Restriction::Constant(kid) => c.k.parent_ids[*kid],
                    Restriction::Into { target, forms } => {
                        let bits: Vec<usize> = forms.iter().map(|form| form.eval(|l, phi| decoded[l].1[phi])).collect();
                        c.encode_g(*target, &bits)
                    }
                }
            })
            .map_err(|e| e.to_string())?;
            let kn = ProductIndex::new(vec![k.len(); n]).expect("polymorphisms computed");
            for d in kn.iter() {
                let z: Vec<usize> = d.iter().map(|&kid| c.k.parent_ids[kid]).collect();
                if ext.apply(&z) != c.k.parent_ids[f.apply(&d)] {
                    return Err(format!("extension disagrees with f at {d:?}"));
                }
            }
            match preserves(g, &ext, limits) {
                Ok(true) => checked_pol += 1,
                Ok(false) => return Err("extension is not a polymorphism of G".into()),
                Err(_) => {}
            }
            for (us, res) in per_component {
                unique_extension(b, f, us, res, &widths)?;
            }
        }
        Ok(format!(
            "{} polymorphisms extended, {checked_pol} checked on G",
            polys.len()
        ))
    })();
    r.push("claim 4", claim4, false);
    Ok(r)
}

/// Splits `f` on the component `∏ K_{u_l}` into coordinate maps and brings
/// each to normal form.
fn restrict(b: &FreeBundle, f: &OperationTable, us: &[usize], limits: &Limits) -> Result<Restriction, String> {
    let c = &b.collapse;
    let fs = &b.structure;
    let factors: Vec<&RelationalStructure> = us.iter().map(|&u| &c.k_parts[u].structure).collect();
    let index = ProductIndex::new(factors.iter().map(|p| p.len()).collect()).ok_or("product too large")?;
    let values: Vec<usize> = index
        .iter()
        .map(|d| {
            let kids: Vec<usize> = d.iter().zip(us).map(|(&x, &u)| c.k_parts[u].parent_ids[x]).collect();
            f.apply(&kids)
        })
        .collect();
    if values.windows(2).all(|w| w[0] == w[1]) {
        return Ok(Restriction::Constant(values[0]));
    }
    let target = c.k_component[values[0]];
    if values.iter().any(|&v| c.k_component[v] != target) {
        return Err(format!("f maps the component {us:?} into several components"));
    }
    let tops: Vec<usize> = us
        .iter()
        .map(|&u| c.k_parts[u].local_id(c.k_of_f[fs.uy[u]]).expect("u(y) in K_u"))
        .collect();
    // only needed to size-check the product before decomposing
    product_with(&factors, limits).map_err(|e| e.to_string())?;
    let mut forms = Vec::new();
    for sidx in 0..b.h[target].len() {
        let fsv: Vec<usize> = values.iter().map(|&v| c.k_bits[v][sidx]).collect();
        let form = match decompose_product_hom(&factors, &RelationalStructure::semilattice_s(), &fsv, &tops)
            .map_err(|e| format!("f_{sidx} on {us:?}: {e}"))?
        {
            Decomposition::Constant(v) => Form::Constant(v),
            Decomposition::Meet(unary) => {
                let mut pairs = Vec::new();
                for (l, fl) in unary.iter().enumerate() {
                    if fl.is_constant() {
                        if fl.apply(0) != 1 {
                            return Err(format!("f_{sidx} on {us:?} has a constant-0 meetand"));
                        }
                        continue;
                    }
                    let part = &c.k_parts[us[l]];
                    let phis: Vec<usize> = (0..b.h[us[l]].len())
                        .filter(|&phi| {
                            part.parent_ids
                                .iter()
                                .enumerate()
                                .all(|(x, &kid)| c.k_bits[kid][phi] == fl.apply(x))
                        })
                        .collect();
                    match phis.as_slice() {
                        [phi] => pairs.push((l, *phi)),
                        _ => {
                            return Err(format!(
                                "meetand {l} of f_{sidx} on {us:?} projects onto {} coordinates",
                                phis.len()
                            ))
                        }
                    }
                }
                if pairs.is_empty() {
                    return Err(format!("f_{sidx} on {us:?} is a meet of constants"));
                }
                Form::Meet(pairs)
            }
        };
        for (d, &v) in index.iter().zip(&fsv) {
            let kids: Vec<usize> = d.iter().zip(us).map(|(&x, &u)| c.k_parts[u].parent_ids[x]).collect();
            if form.eval(|l, phi| c.k_bits[kids[l]][phi]) != v {
                return Err(format!("normal form of f_{sidx} on {us:?} is wrong at {d:?}"));
            }
        }
        forms.push(form);
    }
    Ok(Restriction::Into { target, forms })
}

/// Among all forms on `∏ S^{H_{u_l}}`, exactly one agrees with each
/// coordinate map on the component of `K^n`, and all forms agreeing on the
/// product of the pairs `{[u_l(x)], [u_l(y)]}` use the same coordinates.
fn unique_extension(
    b: &FreeBundle,
    f: &OperationTable,
    us: &[usize],
    res: &Restriction,
    widths: &[usize],
) -> Result<(), String> {
    let c = &b.collapse;
    let fs = &b.structure;
    let local_widths: Vec<usize> = us.iter().map(|&u| widths[u]).collect();
    let candidates = all_forms(&local_widths);
    let d_points: Vec<Vec<usize>> = {
        let index = ProductIndex::new(us.iter().map(|&u| c.k_blocks[u].len()).collect()).ok_or("too large")?;
        index
            .iter()
            .map(|d| d.iter().zip(us).map(|(&x, &u)| c.k_blocks[u][x]).collect())
            .collect()
    };
    let p_points: Vec<Vec<usize>> = {
        let pairs: Vec<Vec<usize>> = us
            .iter()
            .map(|&u| {
                let set: BTreeSet<usize> = [c.k_of_f[fs.ux[u]], c.k_of_f[fs.uy[u]]].into();
                set.into_iter().collect()
            })
            .collect();
        let index = ProductIndex::new(pairs.iter().map(Vec::len).collect()).ok_or("too large")?;
        index
            .iter()
            .map(|d| d.iter().enumerate().map(|(l, &x)| pairs[l][x]).collect())
            .collect()
    };
    let target = match res {
        Restriction::Constant(kid) => c.k_component[*kid],
        Restriction::Into { target, .. } => *target,
    };
    for sidx in 0..widths[target] {
        let truth = |kids: &[usize]| c.k_bits[f.apply(kids)][sidx];
        let agrees = |form: &Form, points: &[Vec<usize>]| {
            points
                .iter()
                .all(|kids| form.eval(|l, phi| c.k_bits[kids[l]][phi]) == truth(kids))
        };
        let on_d: Vec<&Form> = candidates.iter().filter(|form| agrees(form, &d_points)).collect();
        if on_d.len() != 1 {
            return Err(format!("{} forms agree with f_{sidx} on {us:?}", on_d.len()));
        }
        if let Restriction::Into { forms, .. } = res {
            if on_d[0] != &forms[sidx] {
                return Err(format!("normal form of f_{sidx} on {us:?} is not the unique extension"));
            }
        }
        let coords: BTreeSet<BTreeSet<usize>> = candidates
            .iter()
            .filter(|form| agrees(form, &p_points))
            .map(Form::coords)
            .collect();
        if coords.len() != 1 {
            return Err(format!(
                "forms agreeing with f_{sidx} on the two-point product of {us:?} use different coordinates"
            ));
        }
    }
    Ok(())
}
