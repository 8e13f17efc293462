//! Problem bundles: loading, serialization and synthetic generation.
//!
//! The canonical on-disk form is JSON:
//!
//! ```text
//! taxonomy:   {"concepts": [{"id": "c1", "parent": "c0"}, ...]}
//! repository: {"services": [{"id": "s1", "inputs": [...], "outputs": [...]}, ...]}
//! request:    {"provided": [...], "wanted": [...]}
//! ```
//!
//! A bundle file combines the three under `taxonomy`, `repository` and
//! `request` keys plus a `metadata` object. WSC-2008 style XML is accepted
//! through [`wsc08`].

mod generate;
pub mod wsc08;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Repository, Request, Service};
use crate::ontology::{load_taxonomy, ConceptSet, Taxonomy, TaxonomyDoc};

pub use generate::{generate, GenParams};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceDoc {
    pub id: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepositoryDoc {
    pub services: Vec<ServiceDoc>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestDoc {
    #[serde(default)]
    pub provided: Vec<String>,
    pub wanted: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Service ids of a known feasible composition, when one was planted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Vec<String>>,
}

/// Combined single-file form of a problem.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleDoc {
    #[serde(default)]
    pub metadata: Metadata,
    pub taxonomy: TaxonomyDoc,
    pub repository: RepositoryDoc,
    pub request: RequestDoc,
}

/// A fully resolved problem instance.
#[derive(Clone, Debug)]
pub struct ProblemBundle {
    pub metadata: Metadata,
    pub taxonomy: Taxonomy,
    pub repository: Repository,
    pub request: Request,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Wsc08,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "wsc08" => Ok(Format::Wsc08),
            other => Err(format!("unknown format `{other}` (expected json or wsc08)")),
        }
    }
}

/// Where a bundle comes from.
#[derive(Clone, Debug)]
pub enum BundleSource {
    /// JSON: one combined bundle file. WSC-08: a directory holding
    /// `taxonomy.xml`, `services.xml` and `problem.xml` (or `challenge.xml`).
    Single(PathBuf),
    Split {
        taxonomy: PathBuf,
        repository: PathBuf,
        request: PathBuf,
    },
}

/// Anything that maps a concept name to the concept used for matching.
pub(crate) trait Resolver {
    fn lookup(&self, name: &str) -> Option<crate::ontology::ConceptId>;
}

impl Resolver for Taxonomy {
    fn lookup(&self, name: &str) -> Option<crate::ontology::ConceptId> {
        self.try_id(name)
    }
}

pub(crate) fn resolve_problem<R: Resolver>(
    taxonomy: Taxonomy,
    resolver: &R,
    repo: &RepositoryDoc,
    req: &RequestDoc,
    metadata: Metadata,
) -> Result<ProblemBundle> {
    let mut unresolved = Vec::new();
    let mut set = |owner: &str, names: &[String]| -> ConceptSet {
        names
            .iter()
            .filter_map(|n| {
                let c = resolver.lookup(n);
                if c.is_none() {
                    unresolved.push(format!("{owner}: `{n}`"));
                }
                c
            })
            .collect()
    };

    let services: Vec<Service> = repo
        .services
        .iter()
        .map(|s| {
            let owner = format!("service `{}`", s.id);
            Service::new(s.id.clone(), set(&owner, &s.inputs), set(&owner, &s.outputs))
        })
        .collect();
    let provided = set("request provided", &req.provided);
    let wanted = set("request wanted", &req.wanted);
    if !unresolved.is_empty() {
        return Err(Error::UnresolvedReferences(unresolved));
    }

    Ok(ProblemBundle {
        metadata,
        taxonomy,
        repository: Repository::new(services)?,
        request: Request::new(provided, wanted)?,
    })
}

impl BundleDoc {
    pub fn resolve(&self) -> Result<ProblemBundle> {
        let taxonomy = load_taxonomy(&self.taxonomy)?;
        let t = taxonomy.clone();
        resolve_problem(taxonomy, &t, &self.repository, &self.request, self.metadata.clone())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }
}

impl ProblemBundle {
    pub fn to_doc(&self) -> BundleDoc {
        let t = &self.taxonomy;
        BundleDoc {
            metadata: self.metadata.clone(),
            taxonomy: t.to_doc(),
            repository: RepositoryDoc {
                services: self
                    .repository
                    .services()
                    .iter()
                    .map(|s| ServiceDoc {
                        id: s.id.clone(),
                        inputs: t.names_of(s.inputs.iter()),
                        outputs: t.names_of(s.outputs.iter()),
                    })
                    .collect(),
            },
            request: RequestDoc {
                provided: t.names_of(self.request.provided.iter()),
                wanted: t.names_of(self.request.wanted.iter()),
            },
        }
    }
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str, file: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        file: Some(file.display().to_string()),
        line: Some(e.line()),
        message: e.to_string(),
    })
}

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse {
        file: Some(path.display().to_string()),
        line: None,
        message: e.to_string(),
    })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Load and resolve a problem in the given format.
pub fn load_bundle(source: &BundleSource, format: Format) -> Result<ProblemBundle> {
    match (format, source) {
        (Format::Json, BundleSource::Single(path)) => {
            let doc: BundleDoc = parse_json(&read(path)?, path)?;
            let mut bundle = doc.resolve()?;
            if bundle.metadata.name.is_empty() {
                bundle.metadata.name = file_name(path);
            }
            if bundle.metadata.source.is_empty() {
                bundle.metadata.source = path.display().to_string();
            }
            Ok(bundle)
        }
        (Format::Json, BundleSource::Split { taxonomy, repository, request }) => {
            let doc = BundleDoc {
                metadata: Metadata {
                    name: file_name(repository),
                    source: repository.display().to_string(),
                    ..Metadata::default()
                },
                taxonomy: parse_json(&read(taxonomy)?, taxonomy)?,
                repository: parse_json(&read(repository)?, repository)?,
                request: parse_json(&read(request)?, request)?,
            };
            doc.resolve()
        }
        (Format::Wsc08, BundleSource::Single(dir)) => {
            let problem = ["problem.xml", "challenge.xml"]
                .iter()
                .map(|f| dir.join(f))
                .find(|p| p.exists())
                .unwrap_or_else(|| dir.join("problem.xml"));
            wsc08::load(&dir.join("taxonomy.xml"), &dir.join("services.xml"), &problem, file_name(dir))
        }
        (Format::Wsc08, BundleSource::Split { taxonomy, repository, request }) => {
            wsc08::load(taxonomy, repository, request, file_name(repository))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> BundleDoc {
        serde_json::from_str(
            r#"{
              "taxonomy": {"concepts": [{"id": "a"}, {"id": "b", "parent": "a"}]},
              "repository": {"services": [{"id": "s", "inputs": ["a"], "outputs": ["b", "zz"]}]},
              "request": {"provided": ["a", "qq"], "wanted": ["b"]}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn unresolved_references_are_listed_exhaustively() {
        match doc().resolve() {
            Err(Error::UnresolvedReferences(list)) => {
                assert_eq!(list, vec!["service `s`: `zz`", "request provided: `qq`"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bundle_round_trips_through_doc() {
        let mut d = doc();
        d.repository.services[0].outputs.pop();
        d.request.provided.pop();
        let bundle = d.resolve().unwrap();
        assert_eq!(bundle.to_doc(), d);
    }

    #[test]
    fn parse_error_carries_line() {
        let e = parse_json::<BundleDoc>("{\n\n  nope", Path::new("x.json")).unwrap_err();
        match e {
            Error::Parse { file, line, .. } => {
                assert_eq!(file.as_deref(), Some("x.json"));
                assert_eq!(line, Some(3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
