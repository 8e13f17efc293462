use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BundleDoc, Metadata, RepositoryDoc, RequestDoc, ServiceDoc};
use crate::error::{Error, Result};
use crate::ontology::{ConceptDoc, TaxonomyDoc};

/// Shape of a synthetic instance.
///
/// Concepts are split into `depth + 1` levels. A random service at level
/// `l` (1..=depth) consumes concepts from levels below `l` and produces
/// concepts of level `l`. Within a level, a concept gets a random earlier
/// concept of the same level as parent with probability `subsumption`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub services: usize,
    pub depth: usize,
    pub concepts: usize,
    pub fan_in: (usize, usize),
    pub fan_out: (usize, usize),
    /// Length of a planted feasible chain; guarantees solvability.
    pub planted: Option<usize>,
    pub wanted: usize,
    pub subsumption: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            services: 10,
            depth: 4,
            concepts: 30,
            fan_in: (1, 3),
            fan_out: (1, 3),
            planted: Some(4),
            wanted: 2,
            subsumption: 0.3,
        }
    }
}

impl GenParams {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.services == 0 {
            return bad("service count must be positive".into());
        }
        if self.depth == 0 {
            return bad("layer depth must be positive".into());
        }
        if self.fan_in.0 > self.fan_in.1 || self.fan_out.0 > self.fan_out.1 {
            return bad("fan range has min above max".into());
        }
        if self.fan_out.0 == 0 {
            return bad("services need at least one output".into());
        }
        if self.wanted == 0 {
            return bad("wanted concept count must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.subsumption) {
            return bad("subsumption probability outside [0, 1]".into());
        }
        let per_level = self.concepts / (self.depth + 1);
        if per_level < self.fan_out.1.max(self.fan_in.1).max(self.wanted).max(1) {
            return bad(format!(
                "{} concepts over {} levels leave {} per level, fewer than the fan/wanted sizes",
                self.concepts,
                self.depth + 1,
                per_level
            ));
        }
        if let Some(k) = self.planted {
            if k == 0 || k > self.services || k > self.depth {
                return bad(format!("planted chain of {k} needs 1..=min(services, depth)"));
            }
            if self.wanted > self.fan_out.1 {
                return bad("planted chain's last service cannot output every wanted concept".into());
            }
        }
        Ok(())
    }
}

fn pick<R: Rng>(rng: &mut R, pool: &[usize], range: (usize, usize)) -> Vec<usize> {
    let n = rng.random_range(range.0..=range.1).min(pool.len());
    let mut v: Vec<usize> = pool.choose_multiple(rng, n).copied().collect();
    v.sort_unstable();
    v
}

/// Generate a deterministic synthetic bundle for `seed`.
pub fn generate(seed: u64, params: &GenParams) -> Result<BundleDoc> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = params.depth + 1;
    let per_level = params.concepts / levels;
    let level: Vec<Vec<usize>> = (0..levels)
        .map(|l| (l * per_level..(l + 1) * per_level).collect())
        .collect();
    let total = levels * per_level;

    let mut parent = vec![None; total];
    for members in &level {
        for (k, &c) in members.iter().enumerate().skip(1) {
            if rng.random_bool(params.subsumption) {
                parent[c] = Some(members[rng.random_range(0..k)]);
            }
        }
    }

    let provided = pick(&mut rng, &level[0], (params.fan_out.0.max(1), params.fan_out.1));
    let below = |l: usize| -> Vec<usize> { (0..l * per_level).collect() };

    let mut specs: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(params.services);
    let mut wanted: Vec<usize> = Vec::new();
    let mut planted_count = 0;
    if let Some(k) = params.planted {
        let mut feed = provided.clone();
        for (j, members) in level.iter().enumerate().take(k + 1).skip(1) {
            // consume part of what the previous link produced, sometimes via
            // a super-concept so the match needs subsumption
            let mut inputs: Vec<usize> = pick(&mut rng, &feed, (1, params.fan_in.1.max(1)))
                .into_iter()
                .map(|c| match parent[c] {
                    Some(p) if rng.random_bool(0.5) => p,
                    _ => c,
                })
                .collect();
            inputs.sort_unstable();
            inputs.dedup();
            let mut outputs = pick(&mut rng, members, params.fan_out);
            if j == k {
                while outputs.len() < params.wanted {
                    let extra = *members.choose(&mut rng).expect("level is non-empty");
                    if !outputs.contains(&extra) {
                        outputs.push(extra);
                    }
                }
                outputs.sort_unstable();
                wanted = outputs.choose_multiple(&mut rng, params.wanted).copied().collect();
            }
            feed = outputs.clone();
            specs.push((inputs, outputs));
        }
        planted_count = k;
    }

    // random services consume what lower levels actually produce, so most
    // of them are invocable and compete with the planted chain
    let mut produced: Vec<Vec<usize>> = vec![Vec::new(); levels];
    produced[0] = provided.clone();
    for (ins, outs) in &specs {
        for &c in ins.iter().chain(outs) {
            produced[c / per_level].push(c);
        }
    }
    let mut random_levels: Vec<usize> = (specs.len()..params.services)
        .map(|_| rng.random_range(1..=params.depth))
        .collect();
    random_levels.sort_unstable();
    for l in random_levels {
        let mut pool: Vec<usize> = produced[..l].iter().flatten().copied().collect();
        pool.sort_unstable();
        pool.dedup();
        if pool.is_empty() {
            pool = below(l);
        }
        let mut inputs: Vec<usize> = pick(&mut rng, &pool, params.fan_in)
            .into_iter()
            .map(|c| match parent[c] {
                Some(p) if rng.random_bool(0.3) => p,
                _ => c,
            })
            .collect();
        inputs.sort_unstable();
        inputs.dedup();
        let outputs = pick(&mut rng, &level[l], params.fan_out);
        produced[l].extend(outputs.iter().copied());
        specs.push((inputs, outputs));
    }
    if wanted.is_empty() {
        wanted = level[params.depth]
            .choose_multiple(&mut rng, params.wanted)
            .copied()
            .collect();
    }
    wanted.sort_unstable();

    // hide the planted chain among the random services
    let mut order: Vec<usize> = (0..specs.len()).collect();
    order.shuffle(&mut rng);
    let width = specs.len().to_string().len().max(2);
    let id_of = |slot: usize| format!("svc{slot:0width$}");
    let mut ids = vec![String::new(); specs.len()];
    for (slot, &k) in order.iter().enumerate() {
        ids[k] = id_of(slot);
    }

    let cname = |c: usize| format!("c{c}");
    let names = |cs: &[usize]| cs.iter().map(|&c| cname(c)).collect::<Vec<_>>();
    let mut services: Vec<ServiceDoc> = specs
        .iter()
        .zip(&ids)
        .map(|((ins, outs), id)| ServiceDoc {
            id: id.clone(),
            inputs: names(ins),
            outputs: names(outs),
        })
        .collect();
    services.sort_by(|a, b| a.id.cmp(&b.id));

    let planted = params.planted.map(|_| {
        let mut p: Vec<String> = ids[..planted_count].to_vec();
        p.sort();
        p
    });

    Ok(BundleDoc {
        metadata: Metadata {
            name: format!("synthetic-{seed}"),
            source: "generator".into(),
            seed: Some(seed),
            planted,
        },
        taxonomy: TaxonomyDoc {
            concepts: (0..total)
                .map(|c| ConceptDoc {
                    id: cname(c),
                    parent: parent[c].map(cname),
                })
                .collect(),
        },
        repository: RepositoryDoc { services },
        request: RequestDoc {
            provided: names(&provided),
            wanted: names(&wanted),
        },
    })
}
