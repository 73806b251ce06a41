//! Bounded search for an interpretation of an idempotent algebra's
//! operations by semilattice terms.
//!
//! A labeling `σ` reads each basic operation `f` as `⋀_{i ∈ σ(f)} x_i`. Any
//! two derivations of the same element of a free algebra give an identity of
//! the algebra, and the labeling survives only if both derivations have the
//! same variable set. Refuting every labeling certifies that no clone
//! homomorphism into semilattices exists; a survivor is only evidence.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::identlang::{counterexample, labelings, satisfies, Identity, SlLabeling, Term};
use crate::structures::{advance, Limits};

use super::{free_algebra_with, Derivation, FiniteAlgebra, FreeAlgebra};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub labeling: SlLabeling,
    /// Number of variables of the free algebra the identity was read from.
    pub generators: usize,
    pub identity: Identity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HmVerdict {
    /// Every labeling is refuted; one entry per labeling, in order.
    CertifiedHm { log: Vec<LogEntry> },
    /// The first labeling that no identity in at most `m` variables refutes.
    ConsistentLabelingFound { labeling: SlLabeling },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HmEvidence {
    pub verdict: HmVerdict,
    pub m: usize,
}

/// Variable-set bit masks of every element under `sigma`, read off the
/// derivations.
fn varsets(free: &FreeAlgebra, sigma: &SlLabeling) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(free.len());
    for id in 0..free.len() {
        let v = match free.derivation(id) {
            Derivation::Generator(i) => 1 << i,
            Derivation::Apply { op, args } => sigma.sigma[op].iter().fold(0, |m, &i| m | out[args[i - 1]]),
        };
        out.push(v);
    }
    out
}

/// First identity realized in `free` that `sigma` violates: coinciding
/// generators first, then operations by name with argument tuples in
/// lexicographic order.
fn refute(free: &FreeAlgebra, sigma: &SlLabeling) -> Option<Identity> {
    let vs = varsets(free, sigma);
    for (i, &g) in free.generators.iter().enumerate() {
        if vs[g] != 1 << i {
            return Some(Identity::new(Term::Var(free.variables()[i].clone()), free.term(g)));
        }
    }
    for (name, table) in free.algebra.operations() {
        let coords = &sigma.sigma[name];
        let mut args = vec![0; table.arity];
        loop {
            let expected = coords.iter().fold(0, |m, &i| m | vs[args[i - 1]]);
            let result = table.apply(&args);
            if expected != vs[result] {
                let lhs = Term::App(name.clone(), args.iter().map(|&a| free.term(a)).collect());
                return Some(Identity::new(lhs, free.term(result)));
            }
            if !advance(&mut args, |_| free.len()) {
                break;
            }
        }
    }
    None
}

/// The first labeling that survives all identities in at most `m` variables,
/// or the refutation of every labeling.
pub(crate) fn first_surviving_labeling(
    a: &FiniteAlgebra,
    m: usize,
    limits: &Limits,
) -> Result<Result<SlLabeling, Vec<LogEntry>>> {
    if m > 63 {
        return Err(Error::InvalidArgument(format!("arity bound {m} exceeds 63")));
    }
    let frees = (1..=m)
        .map(|j| free_algebra_with(a, j, limits))
        .collect::<Result<Vec<_>>>()?;
    let mut log = Vec::new();
    for labeling in labelings(&a.arities())? {
        let found = frees
            .iter()
            .find_map(|free| refute(free, &labeling).map(|identity| (free.rank, identity)));
        match found {
            None => return Ok(Ok(labeling)),
            Some((generators, identity)) => log.push(LogEntry {
                labeling,
                generators,
                identity,
            }),
        }
    }
    Ok(Err(log))
}

/// Searches all labelings of an idempotent algebra against its identities in
/// at most `m` variables (default: the larger of 2 and the largest arity).
pub fn hm_evidence(a: &FiniteAlgebra, m: Option<usize>, limits: &Limits) -> Result<HmEvidence> {
    if let Some(op) = a.non_idempotent() {
        return Err(Error::NotIdempotent(op.to_string()));
    }
    let largest = a.operations().values().map(|t| t.arity).max().unwrap_or(0);
    let m = m.unwrap_or(largest.max(2));
    if m == 0 {
        return Err(Error::InvalidArgument("arity bound must be positive".into()));
    }
    let verdict = match first_surviving_labeling(a, m, limits)? {
        Ok(labeling) => HmVerdict::ConsistentLabelingFound { labeling },
        Err(log) => HmVerdict::CertifiedHm { log },
    };
    Ok(HmEvidence { verdict, m })
}

/// Re-checks evidence independently of the search: every logged identity
/// holds in the algebra, uses at most the recorded number of variables and
/// is violated by its labeling, and the log covers all labelings in order.
pub fn replay(a: &FiniteAlgebra, ev: &HmEvidence) -> Result<()> {
    let decls = a.arities();
    match &ev.verdict {
        HmVerdict::ConsistentLabelingFound { labeling } => {
            labeling.validate(&decls)?;
            if labeling.sigma.len() != decls.len() {
                return Err(Error::Verification("labeling does not cover every operation".into()));
            }
            Ok(())
        }
        HmVerdict::CertifiedHm { log } => {
            let all = labelings(&decls)?;
            if all.len() != log.len() {
                return Err(Error::Verification(format!(
                    "{} log entries for {} labelings",
                    log.len(),
                    all.len()
                )));
            }
            let interp: BTreeMap<_, _> = a.operations().clone();
            for (expected, entry) in all.iter().zip(log) {
                if &entry.labeling != expected {
                    return Err(Error::Verification(format!(
                        "log entry for {} where {expected} was due",
                        entry.labeling
                    )));
                }
                if entry.generators > ev.m || entry.identity.variables().len() > entry.generators {
                    return Err(Error::Verification(format!(
                        "identity `{}` exceeds the arity bound",
                        entry.identity
                    )));
                }
                if let Some(values) = counterexample(a, &entry.identity, &interp)? {
                    return Err(Error::Verification(format!(
                        "`{}` fails in the algebra at {values:?}",
                        entry.identity
                    )));
                }
                if satisfies(&entry.labeling, &entry.identity) {
                    return Err(Error::Verification(format!(
                        "`{}` does not refute {}",
                        entry.identity, entry.labeling
                    )));
                }
            }
            Ok(())
        }
    }
}
