//! Thin adapters from subcommands to library calls.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hmkit_core::freecons::{
    hm_evidence, replay, verify_claims, verify_lemma21, verify_lemma22, HmVerdict, Report, Verdict,
};
use hmkit_core::gadget::{analyze_gadget_components, gadget_transform};
use hmkit_core::homsearch::{check_homomorphism, count_homs, find_homs, find_retraction, polymorphisms_with};
use hmkit_core::identlang::{
    hm_term_check, is_linear, linear_two_variable_fragment, parse, saturate, sl_interp_search, HmCheck, SlVerdict,
    TermSystem,
};
use hmkit_core::io::{
    read_algebra, read_structure, read_text, structure_from_json, structure_to_json, write_bundle, write_structure,
};
use hmkit_core::semilat::{
    classify_meet_operation, decompose_product_hom, is_partial_semilattice_with, iterated_meet, largest_element,
    run_decomposition_suite, Decomposition, MeetVerdict, PslVerdict,
};
use hmkit_core::structures::{
    connected_components, disjoint_union, find_isomorphism, induced_substructure, power_with, product_with,
    DEFAULT_MAX_TUPLES,
};
use hmkit_core::{Error, FiniteAlgebra, FreeBundle, Limits, RelationalStructure, SearchOptions};
use serde_json::{json, Value};

use crate::report::{Check, Outcome};
use crate::{
    AlgCmd, Command, FreeCmd, GadgetCmd, Global, HomArgs, HomCmd, IdentCmd, PolCmd, PslCmd, StructureCmd, WriteTo,
};

pub const DEFAULT_SUITE_SEED: u64 = 0;

pub fn run(cmd: &Command, g: &Global) -> Result<Outcome> {
    let limits = Limits {
        max_tuples: g.max_tuples.unwrap_or(DEFAULT_MAX_TUPLES),
        ..Limits::default()
    };
    match cmd {
        Command::Structure(c) => structure(c, &limits),
        Command::Hom(c) => hom(c, g),
        Command::Pol(c) => pol(c, g, &limits),
        Command::Psl(c) => psl(c, g, &limits),
        Command::Free(c) => free(c, &limits),
        Command::Gadget(c) => gadget(c),
        Command::Ident(c) => ident(c),
        Command::Alg(c) => alg(c, &limits),
    }
}

fn load(path: &Path) -> Result<RelationalStructure> {
    Ok(read_structure(path)?)
}

fn load_algebra(path: &Path) -> Result<FiniteAlgebra> {
    Ok(read_algebra(path)?)
}

fn load_system(path: &Path) -> Result<TermSystem> {
    let text = read_text(path)?;
    parse(&text).with_context(|| path.display().to_string())
}

/// Writes the structure if asked, otherwise returns its JSON as the text.
fn emit(s: &RelationalStructure, write: &WriteTo) -> Result<Outcome> {
    match &write.write {
        Some(path) => {
            write_structure(path, s)?;
            Ok(Outcome::text(format!(
                "wrote {} ({} elements, {} tuples)",
                path.display(),
                s.len(),
                s.tuple_count()
            )))
        }
        None => Ok(Outcome::text(structure_to_json(s))),
    }
}

fn structure(cmd: &StructureCmd, limits: &Limits) -> Result<Outcome> {
    match cmd {
        StructureCmd::Validate { input } => {
            let text = read_text(input)?;
            match structure_from_json(&text) {
                Ok(s) => Ok(
                    Outcome::text(format!("{} elements, {} tuples", s.len(), s.tuple_count())).with(Check::new(
                        "valid",
                        true,
                        Value::Null,
                    )),
                ),
                Err(e @ Error::Format(_)) => Err(e.into()),
                Err(e) => Ok(Outcome::text(e.to_string()).with(Check::new("valid", false, json!(e.to_string())))),
            }
        }
        StructureCmd::Components { input } => {
            let s = load(input)?;
            let c = connected_components(&s);
            let mut text = format!("{} components\n", c.len());
            for block in &c.partition {
                let labels: Vec<&str> = block.iter().map(|&x| s.label(x)).collect();
                writeln!(text, "{}", labels.join(" "))?;
            }
            Ok(Outcome::text(text).with(Check::new("components", true, json!(c.partition)).informational()))
        }
        StructureCmd::Product { inputs, write } => {
            let parts = inputs.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&RelationalStructure> = parts.iter().collect();
            emit(&product_with(&refs, limits)?, write)
        }
        StructureCmd::Power { input, n, write } => emit(&power_with(&load(input)?, *n, limits)?, write),
        StructureCmd::Union { inputs, write } => {
            let parts = inputs.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&RelationalStructure> = parts.iter().collect();
            emit(&disjoint_union(&refs)?, write)
        }
        StructureCmd::Induced { input, subset, write } => {
            emit(&induced_substructure(&load(input)?, subset)?.structure, write)
        }
        StructureCmd::Iso { left, right } => {
            let found = find_isomorphism(&load(left)?, &load(right)?);
            let text = match &found {
                Some(f) => format!("isomorphic: {:?}", f.map()),
                None => "not isomorphic".to_string(),
            };
            Ok(Outcome::text(text).with(Check::new(
                "isomorphic",
                found.is_some(),
                json!(found.map(|f| f.into_map())),
            )))
        }
    }
}

fn options(a: &HomArgs, g: &Global) -> SearchOptions {
    SearchOptions {
        limit: g.limit,
        nonconstant_only: a.nonconstant,
        pinned: a.pins.iter().copied().collect(),
        deterministic_order: !a.parallel,
        injective: a.injective,
    }
}

fn hom(cmd: &HomCmd, g: &Global) -> Result<Outcome> {
    match cmd {
        HomCmd::Find(a) => {
            let (src, dst) = (load(&a.from)?, load(&a.to)?);
            let homs: Vec<Vec<usize>> = find_homs(&src, &dst, &options(a, g))
                .into_iter()
                .map(|f| f.into_map())
                .collect();
            let mut text = format!("{} homomorphisms\n", homs.len());
            for m in &homs {
                writeln!(text, "{m:?}")?;
            }
            Ok(Outcome::text(text).with(Check::new("homomorphisms", true, json!(homs)).informational()))
        }
        HomCmd::Count(a) => {
            let n = count_homs(&load(&a.from)?, &load(&a.to)?, &options(a, g));
            Ok(Outcome::text(n.to_string()).with(Check::new("count", true, json!(n)).informational()))
        }
        HomCmd::Retract { from, to } => match find_retraction(&load(from)?, &load(to)?) {
            Some(r) => Ok(Outcome::text(format!(
                "retraction {:?}\ncoretraction {:?}",
                r.alpha.map(),
                r.beta.map()
            ))
            .with(Check::new(
                "retraction",
                true,
                json!({"alpha": r.alpha.map(), "beta": r.beta.map()}),
            ))),
            None => Ok(Outcome::text("no retraction").with(Check::new("retraction", false, Value::Null))),
        },
        HomCmd::Check { from, to, map } => match check_homomorphism(&load(from)?, &load(to)?, map) {
            Ok(()) => Ok(Outcome::text("homomorphism").with(Check::new("homomorphism", true, Value::Null))),
            Err(e) => Ok(Outcome::text(format!("not a homomorphism: {e}")).with(Check::new(
                "homomorphism",
                false,
                json!(e.to_string()),
            ))),
        },
    }
}

fn pol(cmd: &PolCmd, g: &Global, limits: &Limits) -> Result<Outcome> {
    let PolCmd::Enumerate { input, arity, classify } = cmd;
    let s = load(input)?;
    let mut tables = polymorphisms_with(&s, *arity, limits)?;
    if g.limit > 0 {
        tables.truncate(g.limit);
    }
    let mut out = Outcome::default();
    writeln!(out.text, "{} polymorphisms of arity {arity}", tables.len())?;
    let mut refused = 0;
    for t in &tables {
        if *classify {
            match classify_meet_operation(t)? {
                MeetVerdict::Classified(c) => writeln!(out.text, "{:?} {c}", t.values)?,
                MeetVerdict::Refused { witness } => {
                    refused += 1;
                    writeln!(out.text, "{:?} refused", t.values)?;
                    out.checks.push(Check::refused(
                        format!("classify {:?}", t.values),
                        json!(witness.map(|w| w.to_string())),
                    ));
                }
            }
        } else {
            writeln!(out.text, "{:?}", t.values)?;
        }
    }
    let values: Vec<&Vec<usize>> = tables.iter().map(|t| &t.values).collect();
    out.checks
        .insert(0, Check::new("enumerate", true, json!(values)).informational());
    if *classify {
        out.checks
            .push(Check::new("all classified", refused == 0, json!(refused)));
    }
    Ok(out)
}

fn psl(cmd: &PslCmd, g: &Global, limits: &Limits) -> Result<Outcome> {
    match cmd {
        PslCmd::Check { input } => match is_partial_semilattice_with(&load(input)?, limits)? {
            PslVerdict::Accepted(w) => Ok(Outcome::text(format!(
                "partial semilattice; ambient semilattice of {} elements, embedding {:?}",
                w.ambient_size(),
                w.embedding
            ))
            .with(Check::new(
                "partial semilattice",
                true,
                json!({"ambient": w.ambient_size(), "embedding": w.embedding}),
            ))),
            PslVerdict::Refused(r) => Ok(Outcome::text(format!("refused: {r}"))
                .with(Check::refused("partial semilattice", json!(r.to_string())))),
        },
        PslCmd::Largest { input } => {
            let s = load(input)?;
            match largest_element(&s)? {
                Some(t) => Ok(
                    Outcome::text(format!("largest element {t} ({})", s.label(t))).with(Check::new(
                        "largest element",
                        true,
                        json!(t),
                    )),
                ),
                None => Ok(Outcome::text("no largest element").with(Check::new("largest element", false, Value::Null))),
            }
        }
        PslCmd::Meet { input, elements } => match iterated_meet(&load(input)?, elements)? {
            Some(m) => Ok(Outcome::text(m.to_string()).with(Check::new("meet defined", true, json!(m)))),
            None => Ok(Outcome::text("undefined").with(Check::new("meet defined", false, Value::Null))),
        },
        PslCmd::Decompose { factors, target, map } => {
            let parts = factors.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
            let mut tops = Vec::new();
            for (p, path) in parts.iter().zip(factors) {
                match largest_element(p)? {
                    Some(t) => tops.push(t),
                    None => bail!("{} has no largest element", path.display()),
                }
            }
            let target = match target {
                Some(p) => load(p)?,
                None => RelationalStructure::semilattice_s(),
            };
            let refs: Vec<&RelationalStructure> = parts.iter().collect();
            match decompose_product_hom(&refs, &target, map, &tops) {
                Ok(Decomposition::Constant(v)) => Ok(Outcome::text(format!("constant {v}")).with(Check::new(
                    "decomposition",
                    true,
                    json!({"constant": v}),
                ))),
                Ok(Decomposition::Meet(fs)) => {
                    let maps: Vec<&[usize]> = fs.iter().map(|f| f.map()).collect();
                    let mut text = String::from("meet of\n");
                    for (i, m) in maps.iter().enumerate() {
                        writeln!(text, "f_{} = {m:?}", i + 1)?;
                    }
                    Ok(Outcome::text(text).with(Check::new("decomposition", true, json!({"meet": maps}))))
                }
                Err(e @ Error::Verification(_)) => {
                    Ok(Outcome::text(e.to_string()).with(Check::new("decomposition", false, json!(e.to_string()))))
                }
                Err(e) => Err(e.into()),
            }
        }
        PslCmd::LemmaSuite { instances } => {
            let seed = g.seed.unwrap_or(DEFAULT_SUITE_SEED);
            let r = run_decomposition_suite(seed, *instances);
            let mut text = format!(
                "seed {seed}: {} instances, {} homomorphisms, {} failures\n",
                r.instances,
                r.homomorphisms,
                r.failures.len()
            );
            for f in &r.failures {
                writeln!(text, "{f}")?;
            }
            let mut out = Outcome::text(text);
            out.seed = Some(seed);
            Ok(out.with(Check::new(
                "decomposition suite",
                r.failures.is_empty(),
                json!({"seed": seed, "instances": r.instances, "homomorphisms": r.homomorphisms, "failures": r.failures}),
            )))
        }
    }
}

fn add_report(out: &mut Outcome, prefix: &str, r: &Report) {
    for item in &r.items {
        let name = format!("{prefix} {}", item.name);
        let check = match &item.verdict {
            Verdict::Pass => Check::new(name, true, json!(item.detail)),
            Verdict::Fail(why) => Check::new(name, false, json!(why)),
            Verdict::HypothesisAbsent(why) => Check::refused(name, json!(why)).informational(),
        };
        out.checks.push(check);
    }
}

fn free(cmd: &FreeCmd, limits: &Limits) -> Result<Outcome> {
    let FreeCmd::Build {
        algebra,
        verify_lemma22: l22,
        verify_claims: claims,
        verify_lemma21: l21,
        export,
    } = cmd;
    let b = FreeBundle::build(&load_algebra(algebra)?, limits)?;
    let fs = &b.structure;
    let mut out = Outcome::default();
    writeln!(out.text, "|F| = {}", fs.free.len())?;
    writeln!(out.text, "|R| = {}", fs.fstruct.tuple_count())?;
    writeln!(out.text, "|U| = {}", fs.unary.len())?;
    for (u, term) in fs.unary_terms.iter().enumerate() {
        writeln!(
            out.text,
            "  {term}: |F_u| = {}, |H_u| = {}",
            fs.components[u].len(),
            b.h[u].len()
        )?;
    }
    writeln!(out.text, "|K| = {}", b.k().len())?;
    writeln!(out.text, "kernel: {:?}", b.kernel_terms())?;
    if *l21 {
        add_report(&mut out, "lemma21", &verify_lemma21(&b, limits)?);
    }
    if *l22 {
        add_report(&mut out, "lemma22", &verify_lemma22(&b, limits)?);
    }
    if let Some(n) = claims {
        add_report(&mut out, "claims", &verify_claims(&b, *n, limits)?);
    }
    if let Some(dir) = export {
        write_bundle(dir, &b)?;
        writeln!(out.text, "exported to {}", dir.display())?;
    }
    Ok(out)
}

fn gadget(cmd: &GadgetCmd) -> Result<Outcome> {
    match cmd {
        GadgetCmd::Apply { input, write } => emit(&gadget_transform(&load(input)?)?, write),
        GadgetCmd::Analyze { input } => {
            let a = analyze_gadget_components(&load(input)?)?;
            let mut text = format!("input powers {:?}\n", a.input);
            let counts: Vec<(Option<usize>, usize)> = a.multiplicities().into_iter().collect();
            for (k, m) in &counts {
                match k {
                    Some(k) => writeln!(text, "S^{k}: {m}")?,
                    None => writeln!(text, "unmatched: {m}")?,
                }
            }
            let unmatched = counts.iter().any(|(k, _)| k.is_none());
            Ok(Outcome::text(text).with(Check::new("components are powers of S", !unmatched, json!(counts))))
        }
    }
}

fn ident(cmd: &IdentCmd) -> Result<Outcome> {
    match cmd {
        IdentCmd::Parse { system } => Ok(Outcome::text(load_system(system)?.to_string())),
        IdentCmd::Linear { system } => {
            let sys = load_system(system)?;
            let mut text = String::new();
            for i in &sys.identities {
                writeln!(text, "{} {i}", if is_linear(i) { "linear    " } else { "non-linear" })?;
            }
            let all = sys.identities.iter().all(is_linear);
            Ok(Outcome::text(text).with(Check::new("linear", all, Value::Null).informational()))
        }
        IdentCmd::Saturate { system } => {
            let sat = saturate(&linear_two_variable_fragment(&load_system(system)?))?;
            Ok(Outcome::text(sat.to_string()))
        }
        IdentCmd::HmCheck { system, term } => {
            let sys = linear_two_variable_fragment(&load_system(system)?);
            match hm_term_check(&sys, term)? {
                HmCheck::Pass(w) => {
                    let mut text = String::from("pass\n");
                    let mut witness = serde_json::Map::new();
                    for (set, id) in &w {
                        let key = format!("{set:?}");
                        writeln!(text, "{key}: {id}")?;
                        witness.insert(key, json!(id.to_string()));
                    }
                    Ok(Outcome::text(text).with(Check::new("subset condition", true, Value::Object(witness))))
                }
                HmCheck::Fail { missing } => Ok(Outcome::text(format!("fail: no witness for {missing:?}"))
                    .with(Check::new("subset condition", false, json!(missing)))),
            }
        }
        IdentCmd::SlInterp { system } => match sl_interp_search(&load_system(system)?)? {
            SlVerdict::Labeling(l) => Ok(Outcome::text(format!("labeling {l}")).with(Check::new(
                "semilattice interpretation",
                true,
                json!(l.to_string()),
            ))),
            SlVerdict::Unsat(refs) => {
                let mut text = format!("UNSAT ({} refutations)\n", refs.len());
                let mut witness = Vec::new();
                for r in &refs {
                    writeln!(text, "{} refuted by `{}`", r.labeling, r.identity)?;
                    witness.push(json!({"labeling": r.labeling.to_string(), "identity": r.identity.to_string()}));
                }
                Ok(Outcome::text(text).with(Check::refused("semilattice interpretation", json!(witness))))
            }
        },
    }
}

fn alg(cmd: &AlgCmd, limits: &Limits) -> Result<Outcome> {
    let AlgCmd::HmEvidence { algebra, max_arity } = cmd;
    let a = load_algebra(algebra)?;
    let ev = hm_evidence(&a, *max_arity, limits)?;
    let replayed = replay(&a, &ev);
    let mut out = Outcome::default();
    match &ev.verdict {
        HmVerdict::CertifiedHm { log } => {
            writeln!(
                out.text,
                "CertifiedHM at m = {} ({} labelings refuted)",
                ev.m,
                log.len()
            )?;
            let mut entries = Vec::new();
            for e in log {
                writeln!(
                    out.text,
                    "{} refuted in F({}) by `{}`",
                    e.labeling, e.generators, e.identity
                )?;
                entries.push(json!({
                    "labeling": e.labeling.to_string(),
                    "generators": e.generators,
                    "identity": e.identity.to_string(),
                }));
            }
            out.checks.push(Check::new(
                "evidence",
                true,
                json!({"verdict": "certified-hm", "m": ev.m, "log": entries}),
            ));
        }
        HmVerdict::ConsistentLabelingFound { labeling } => {
            writeln!(out.text, "ConsistentLabelingFound at m = {}: {labeling}", ev.m)?;
            out.checks.push(Check::new(
                "evidence",
                true,
                json!({"verdict": "consistent-labeling", "m": ev.m, "labeling": labeling.to_string()}),
            ));
        }
    }
    out.checks.push(Check::new(
        "replay",
        replayed.is_ok(),
        json!(replayed.err().map(|e| e.to_string())),
    ));
    Ok(out)
}
