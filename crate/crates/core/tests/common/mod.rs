//! Test-side oracles. They work on the raw documents with plain string
//! sets and share no code with the library's matcher or solver.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use svc_knapsack::io::{load_bundle, BundleDoc, BundleSource, Format, GenParams, ProblemBundle};

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/worked_example.json")
}

pub fn fixture() -> ProblemBundle {
    load_bundle(&BundleSource::Single(fixture_path()), Format::Json).unwrap()
}

/// Two generator settings, both at most 12 services: the defaults and a
/// deeper, wider variant with a five-step planted chain.
pub fn suite_params() -> [GenParams; 2] {
    [
        GenParams::default(),
        GenParams {
            services: 12,
            depth: 5,
            concepts: 30,
            fan_out: (1, 4),
            planted: Some(5),
            ..GenParams::default()
        },
    ]
}

pub struct Naive {
    parent: HashMap<String, Option<String>>,
    services: Vec<(String, Vec<String>, Vec<String>)>,
    provided: Vec<String>,
    wanted: Vec<String>,
}

impl Naive {
    pub fn new(doc: &BundleDoc) -> Self {
        Naive {
            parent: doc
                .taxonomy
                .concepts
                .iter()
                .map(|c| (c.id.clone(), c.parent.clone()))
                .collect(),
            services: doc
                .repository
                .services
                .iter()
                .map(|s| (s.id.clone(), s.inputs.clone(), s.outputs.clone()))
                .collect(),
            provided: doc.request.provided.clone(),
            wanted: doc.request.wanted.clone(),
        }
    }

    fn add(&self, known: &mut BTreeSet<String>, c: &str) {
        let mut cur = Some(c.to_string());
        while let Some(name) = cur {
            cur = self.parent.get(&name).cloned().flatten();
            known.insert(name);
        }
    }

    /// Invoke services from `chosen` until nothing changes; true when the
    /// wanted concepts end up matched.
    pub fn replay<S: AsRef<str>>(&self, chosen: &[S]) -> bool {
        let mut known = BTreeSet::new();
        for c in &self.provided {
            self.add(&mut known, c);
        }
        let mut pending: Vec<_> = self
            .services
            .iter()
            .filter(|(id, ..)| chosen.iter().any(|c| c.as_ref() == id))
            .collect();
        loop {
            let before = pending.len();
            let mut rest = Vec::new();
            for s in pending {
                if s.1.iter().all(|i| known.contains(i)) {
                    for o in &s.2 {
                        self.add(&mut known, o);
                    }
                } else {
                    rest.push(s);
                }
            }
            pending = rest;
            if pending.len() == before {
                break;
            }
        }
        self.wanted.iter().all(|w| known.contains(w))
    }

    /// Smallest number of services whose replay reaches the wanted concepts.
    pub fn minimum(&self) -> Option<usize> {
        let n = self.services.len();
        assert!(n <= 16, "naive oracle is for small repositories");
        let mut masks: Vec<u32> = (0..1u32 << n).collect();
        masks.sort_by_key(|m| m.count_ones());
        masks.into_iter().find_map(|m| {
            let chosen: Vec<&str> = (0..n)
                .filter(|k| m >> k & 1 == 1)
                .map(|k| self.services[k].0.as_str())
                .collect();
            self.replay(&chosen).then_some(chosen.len())
        })
    }
}
