//! JSON file formats for structures, algebras and exported bundles.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freecons::{FiniteAlgebra, FreeBundle};
use crate::homsearch::OperationTable;
use crate::structures::RelationalStructure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationFile {
    pub arity: usize,
    pub tuples: Vec<Vec<usize>>,
}

/// `{"universe": [...], "relations": {"R": {"arity": 3, "tuples": [...]}}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub universe: Vec<String>,
    pub relations: BTreeMap<String, RelationFile>,
}

/// `{"universe": [...], "operations": {"meet": {"arity": 2, "size": 2, "values": [...]}}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub universe: Vec<String>,
    pub operations: BTreeMap<String, OperationTable>,
}

impl From<&RelationalStructure> for StructureFile {
    fn from(s: &RelationalStructure) -> Self {
        StructureFile {
            universe: s.labels().to_vec(),
            relations: s
                .relations()
                .map(|(sym, r)| {
                    (
                        sym.to_string(),
                        RelationFile {
                            arity: r.arity(),
                            tuples: r.tuples().cloned().collect(),
                        },
                    )
                })
                .collect(),
        }
    }
}

impl TryFrom<StructureFile> for RelationalStructure {
    type Error = Error;

    fn try_from(f: StructureFile) -> Result<Self> {
        let raw = f
            .relations
            .into_iter()
            .map(|(sym, r)| (sym, r.arity, r.tuples))
            .collect();
        RelationalStructure::new(f.universe, raw)
    }
}

impl From<&FiniteAlgebra> for AlgebraFile {
    fn from(a: &FiniteAlgebra) -> Self {
        AlgebraFile {
            universe: a.labels().to_vec(),
            operations: a.operations().clone(),
        }
    }
}

impl TryFrom<AlgebraFile> for FiniteAlgebra {
    type Error = Error;

    fn try_from(f: AlgebraFile) -> Result<Self> {
        FiniteAlgebra::with_labels(f.universe, f.operations)
    }
}

fn format_err(e: serde_json::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn structure_from_json(text: &str) -> Result<RelationalStructure> {
    serde_json::from_str::<StructureFile>(text)
        .map_err(format_err)?
        .try_into()
}

pub fn structure_to_json(s: &RelationalStructure) -> String {
    serde_json::to_string_pretty(&StructureFile::from(s)).expect("serializable")
}

pub fn algebra_from_json(text: &str) -> Result<FiniteAlgebra> {
    serde_json::from_str::<AlgebraFile>(text)
        .map_err(format_err)?
        .try_into()
}

pub fn algebra_to_json(a: &FiniteAlgebra) -> String {
    serde_json::to_string_pretty(&AlgebraFile::from(a)).expect("serializable")
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn read_structure(path: &Path) -> Result<RelationalStructure> {
    structure_from_json(&read_text(path)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn read_algebra(path: &Path) -> Result<FiniteAlgebra> {
    algebra_from_json(&read_text(path)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_structure(path: &Path, s: &RelationalStructure) -> Result<()> {
    write_text(path, &structure_to_json(s))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnaryEntry {
    pub term: String,
    pub values: Vec<usize>,
    pub component_size: usize,
    pub homomorphisms: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub free_size: usize,
    pub k_size: usize,
    pub unary: Vec<UnaryEntry>,
    pub kernel: Vec<Vec<String>>,
}

pub fn manifest(b: &FreeBundle) -> Manifest {
    let fs = &b.structure;
    Manifest {
        free_size: fs.free.len(),
        k_size: b.k().len(),
        unary: fs
            .unary
            .iter()
            .enumerate()
            .map(|(u, values)| UnaryEntry {
                term: fs.unary_terms[u].to_string(),
                values: values.clone(),
                component_size: fs.components[u].len(),
                homomorphisms: b.h[u].len(),
            })
            .collect(),
        kernel: b.kernel_terms(),
    }
}

/// Writes `Fstruct.json`, `K.json` and `manifest.json` into `dir`.
pub fn write_bundle(dir: &Path, b: &FreeBundle) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Format(format!("{}: {e}", dir.display())))?;
    write_structure(&dir.join("Fstruct.json"), &b.structure.fstruct)?;
    write_structure(&dir.join("K.json"), b.k())?;
    let m = serde_json::to_string_pretty(&manifest(b)).expect("serializable");
    write_text(&dir.join("manifest.json"), &m)
}
