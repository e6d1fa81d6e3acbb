//! Turn command-line references into loaded objects. A group reference is a
//! builtin name (S3, Z4, Z2xZ2, D4, Q8, products with x) or a path to a
//! group.json file; a gerbe reference is a catalog entry name resolved over
//! the chosen group, or a path to a gerbe.json file. Setting GERBECAT_CATALOG
//! to a directory replaces the built-in catalog with its *.json gerbes.

use std::path::Path;
use std::sync::Arc;

use gerbecat_core::catalog::{catalog_entry, group_by_name, standard_catalog, CatalogEntry};
use gerbecat_core::cochain::{cochain_from_json, Cochain};
use gerbecat_core::gerbe::{gerbe_from_json, Gerbe};
use gerbecat_core::grp::{build_group_from_json, FiniteGroup};
use gerbecat_core::gspace::{build_gset, build_gset_from_json, GSet, GSetSpec};

/// Malformed input: bad reference, unreadable file, schema violation, or a
/// violated operation precondition. Mapped to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn fail<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError(msg.into()))
}

fn read_file(path: &str) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {path}: {e}")))
}

fn looks_like_path(r: &str) -> bool {
    r.contains('/') || r.contains('\\') || r.ends_with(".json")
}

pub fn load_group(r: &str) -> Result<Arc<FiniteGroup>, InputError> {
    if !looks_like_path(r) {
        if let Ok(g) = group_by_name(r) {
            return Ok(Arc::new(g));
        }
    }
    if Path::new(r).is_file() {
        return Ok(Arc::new(
            build_group_from_json(&read_file(r)?).map_err(|e| InputError(format!("{r}: {e}")))?,
        ));
    }
    fail(format!("{r:?} is neither a known group name nor a readable file"))
}

fn catalog_override() -> Option<String> {
    std::env::var("GERBECAT_CATALOG").ok().filter(|s| !s.is_empty())
}

fn load_gerbe_file(path: &Path) -> Result<Arc<Gerbe>, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    Ok(Arc::new(
        gerbe_from_json(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?,
    ))
}

/// Catalog entries for one group: the built-in battery, or the override
/// directory's gerbes named by file stem.
pub fn catalog_entries(
    group: &Arc<FiniteGroup>,
    seed: u64,
) -> Result<Vec<CatalogEntry>, InputError> {
    let Some(dir) = catalog_override() else {
        return standard_catalog(group, seed).map_err(|e| InputError(e.to_string()));
    };
    let mut paths: Vec<std::path::PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| InputError(format!("GERBECAT_CATALOG {dir:?}: {e}")))?
        .filter_map(|r| r.ok().map(|d| d.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let gerbe = load_gerbe_file(&path)?;
        if gerbe.group().mult != group.mult {
            return fail(format!("{}: gerbe group differs from --group", path.display()));
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push(CatalogEntry { name, gerbe });
    }
    if out.is_empty() {
        return fail(format!("GERBECAT_CATALOG {dir:?} holds no .json gerbes"));
    }
    Ok(out)
}

pub fn load_gerbe(
    r: &str,
    group: Option<&Arc<FiniteGroup>>,
    seed: u64,
) -> Result<Arc<Gerbe>, InputError> {
    if !looks_like_path(r) {
        if let Some(group) = group {
            if let Some(dir) = catalog_override() {
                let path = Path::new(&dir).join(format!("{r}.json"));
                if path.is_file() {
                    let gerbe = load_gerbe_file(&path)?;
                    if gerbe.group().mult != group.mult {
                        return fail(format!(
                            "{}: gerbe group differs from --group",
                            path.display()
                        ));
                    }
                    return Ok(gerbe);
                }
            } else if let Ok(g) = catalog_entry(group, r, seed) {
                return Ok(g);
            }
        }
    }
    if Path::new(r).is_file() {
        return load_gerbe_file(Path::new(r));
    }
    fail(format!("{r:?} is neither a catalog gerbe name nor a readable file"))
}

/// Builtin G-set forms need a group; files carry their own.
pub fn load_gset(
    r: &str,
    group: Option<&Arc<FiniteGroup>>,
) -> Result<Arc<GSet>, InputError> {
    if !looks_like_path(r) {
        let spec = match r {
            "point" => Some(GSetSpec::Point),
            "regular" => Some(GSetSpec::Regular),
            _ => r.strip_prefix("coset:").map(|list| {
                GSetSpec::Coset(
                    list.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
                )
            }),
        };
        if let Some(spec) = spec {
            let Some(group) = group else {
                return fail(format!("builtin G-set {r:?} needs --group"));
            };
            return Ok(Arc::new(
                build_gset(group.clone(), &spec).map_err(|e| InputError(e.to_string()))?,
            ));
        }
    }
    if Path::new(r).is_file() {
        return Ok(Arc::new(
            build_gset_from_json(&read_file(r)?)
                .map_err(|e| InputError(format!("{r}: {e}")))?,
        ));
    }
    fail(format!(
        "{r:?} is neither a builtin G-set form (point, regular, coset:...) nor a readable file"
    ))
}

pub fn load_cochain(path: &str) -> Result<Cochain, InputError> {
    cochain_from_json(&read_file(path)?).map_err(|e| InputError(format!("{path}: {e}")))
}
