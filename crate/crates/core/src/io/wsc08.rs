//! Best-effort reader for WSC-2008 style XML files.
//!
//! The mapping is non-normative; mirrors of the challenge data differ in
//! details. Tags and attributes are matched by local name, case-insensitively.
//!
//! | file          | element                         | meaning                                        |
//! |---------------|---------------------------------|------------------------------------------------|
//! | taxonomy.xml  | `concept` / `class`             | a concept; `name` (or `id`) attribute          |
//! |               | nesting, `superclass`/`parent`  | parent concept (attribute wins over nesting)    |
//! |               | `instance`                      | an instance of the enclosing concept (or of the `concept`/`class` attribute) |
//! | services.xml  | `service`                       | a service; `name` (or `id`) attribute          |
//! |               | `inputs` / `outputs` children   | `instance` or `concept` elements, by `name`    |
//! | problem.xml   | `provided` / `wanted` children  | `instance` or `concept` elements, by `name`    |
//!
//! Service and request references may name either a concept or an instance;
//! an instance resolves to the concept it belongs to, so matching happens at
//! concept level.

use std::collections::HashMap;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{read, resolve_problem, Metadata, RepositoryDoc, RequestDoc, Resolver, ServiceDoc};
use crate::error::{Error, Result};
use crate::ontology::{load_taxonomy, ConceptDoc, ConceptId, Taxonomy, TaxonomyDoc};
use crate::io::ProblemBundle;

/// Parsed taxonomy file: the concepts plus the instance → concept map.
#[derive(Clone, Debug, Default)]
pub struct TaxonomyXml {
    pub doc: TaxonomyDoc,
    pub instances: HashMap<String, String>,
}

struct InstanceResolver<'a> {
    taxonomy: &'a Taxonomy,
    instances: &'a HashMap<String, String>,
}

impl Resolver for InstanceResolver<'_> {
    fn lookup(&self, name: &str) -> Option<ConceptId> {
        self.taxonomy
            .try_id(name)
            .or_else(|| self.instances.get(name).and_then(|c| self.taxonomy.try_id(c)))
    }
}

fn line_at(text: &str, pos: u64) -> usize {
    let pos = (pos as usize).min(text.len());
    text.as_bytes()[..pos].iter().filter(|&&b| b == b'\n').count() + 1
}

fn xml_error(text: &str, reader: &Reader<&[u8]>, file: &Path, message: String) -> Error {
    Error::Parse {
        file: Some(file.display().to_string()),
        line: Some(line_at(text, reader.buffer_position())),
        message,
    }
}

fn tag(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.local_name().as_ref()).to_ascii_lowercase()
}

fn attr(e: &BytesStart<'_>, keys: &[&str]) -> std::result::Result<Option<String>, String> {
    for a in e.attributes() {
        let a = a.map_err(|err| err.to_string())?;
        let key = String::from_utf8_lossy(a.key.local_name().as_ref()).to_ascii_lowercase();
        if keys.contains(&key.as_str()) {
            let value = a.unescape_value().map_err(|err| err.to_string())?;
            return Ok(Some(value.trim().to_string()));
        }
    }
    Ok(None)
}

/// Walk every start/empty/end element, passing `(tag, element, is_empty)` for
/// opening tags and `(tag, None, _)` for closing ones.
fn walk<F>(text: &str, file: &Path, mut f: F) -> Result<()>
where
    F: FnMut(&str, Option<&BytesStart<'_>>, bool) -> std::result::Result<(), String>,
{
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    loop {
        let ev = reader
            .read_event()
            .map_err(|e| xml_error(text, &reader, file, e.to_string()))?;
        let res = match &ev {
            Event::Start(e) => f(&tag(e), Some(e), false),
            Event::Empty(e) => f(&tag(e), Some(e), true),
            Event::End(e) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref()).to_ascii_lowercase();
                f(&name, None, false)
            }
            Event::Eof => break,
            _ => Ok(()),
        };
        res.map_err(|m| xml_error(text, &reader, file, m))?;
    }
    Ok(())
}

const NAME: &[&str] = &["name", "id"];

pub fn parse_taxonomy(text: &str, file: &Path) -> Result<TaxonomyXml> {
    let mut out = TaxonomyXml::default();
    // open concept elements; None for a concept without a usable name
    let mut stack: Vec<Option<String>> = Vec::new();
    let enclosing = |stack: &[Option<String>]| stack.iter().rev().find_map(|c| c.clone());

    walk(text, file, |name, el, empty| {
        let is_concept = name == "concept" || name == "class";
        match el {
            Some(e) if is_concept => {
                let id = attr(e, NAME)?.ok_or("concept element without a name")?;
                let parent = attr(e, &["superclass", "parent", "subclassof"])?.or_else(|| enclosing(&stack));
                out.doc.concepts.push(ConceptDoc { id: id.clone(), parent });
                if !empty {
                    stack.push(Some(id));
                }
            }
            Some(e) if name == "instance" => {
                let id = attr(e, NAME)?.ok_or("instance element without a name")?;
                let owner = attr(e, &["concept", "class", "type"])?
                    .or_else(|| enclosing(&stack))
                    .ok_or_else(|| format!("instance `{id}` belongs to no concept"))?;
                out.instances.insert(id, owner);
            }
            None if is_concept => {
                stack.pop();
            }
            _ => {}
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn parse_services(text: &str, file: &Path) -> Result<RepositoryDoc> {
    #[derive(PartialEq)]
    enum Side {
        None,
        In,
        Out,
    }
    let mut doc = RepositoryDoc::default();
    let mut current: Option<ServiceDoc> = None;
    let mut side = Side::None;

    walk(text, file, |name, el, empty| {
        match (name, el) {
            ("service", Some(e)) => {
                let id = attr(e, NAME)?.ok_or("service element without a name")?;
                let svc = ServiceDoc {
                    id,
                    inputs: Vec::new(),
                    outputs: Vec::new(),
                };
                if empty {
                    doc.services.push(svc);
                } else {
                    current = Some(svc);
                }
            }
            ("service", None) => {
                if let Some(s) = current.take() {
                    doc.services.push(s);
                }
            }
            ("inputs", Some(_)) if !empty => side = Side::In,
            ("outputs", Some(_)) if !empty => side = Side::Out,
            ("inputs" | "outputs", None) => side = Side::None,
            ("instance" | "concept", Some(e)) if side != Side::None => {
                let r = attr(e, NAME)?.ok_or("reference without a name")?;
                let s = current.as_mut().ok_or("input/output outside a service")?;
                match side {
                    Side::In => s.inputs.push(r),
                    Side::Out => s.outputs.push(r),
                    Side::None => unreachable!(),
                }
            }
            _ => {}
        }
        Ok(())
    })?;
    Ok(doc)
}

pub fn parse_request(text: &str, file: &Path) -> Result<RequestDoc> {
    let mut doc = RequestDoc::default();
    let mut side = 0u8;
    walk(text, file, |name, el, empty| {
        match (name, el) {
            ("provided", Some(_)) if !empty => side = 1,
            ("wanted", Some(_)) if !empty => side = 2,
            ("provided" | "wanted", None) => side = 0,
            ("instance" | "concept", Some(e)) if side != 0 => {
                let r = attr(e, NAME)?.ok_or("reference without a name")?;
                if side == 1 {
                    doc.provided.push(r);
                } else {
                    doc.wanted.push(r);
                }
            }
            _ => {}
        }
        Ok(())
    })?;
    Ok(doc)
}

pub fn load(taxonomy: &Path, services: &Path, request: &Path, name: String) -> Result<ProblemBundle> {
    let tx = parse_taxonomy(&read(taxonomy)?, taxonomy)?;
    let repo = parse_services(&read(services)?, services)?;
    let req = parse_request(&read(request)?, request)?;
    let t = load_taxonomy(&tx.doc)?;
    let resolver = InstanceResolver {
        taxonomy: &t,
        instances: &tx.instances,
    };
    let metadata = Metadata {
        name,
        source: services
            .parent()
            .map(|p| p.display().to_string())
            .unwrap_or_default(),
        ..Metadata::default()
    };
    resolve_problem(t.clone(), &resolver, &repo, &req, metadata)
}
