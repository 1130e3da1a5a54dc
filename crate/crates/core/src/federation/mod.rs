//! Simulated federations: configuration, the relevant-source oracle,
//! partitioning, workloads and the benchmark runner.

mod bench;
mod partition;
pub mod synth;
mod workload;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::parse_wkt;
use crate::query::{Query, QueryError};
use crate::selector::{geospatial_source_select, Catalog, Mode, SelectorError, SourceAssignment, SourceEntry, ThematicOptions};
use crate::store::{Evaluator, Solutions, SourceMask, Store, StoreError};
use crate::summaries::{describe, explicit_summary, extract_summary, parse_descriptor, DatasetDescriptor, Flavor, SummaryError};
use crate::{GeomError, Rectangle};

pub use bench::{run_benchmark, BenchReport, QueryRow, TemplateRow, Variant};
pub use partition::{partition_dataset, Boundary, PartitionOptions};
pub use workload::{generate_workload, Template, WorkloadQuery, ADM, CROP, DATA, SNOW};

#[derive(Debug, Error)]
pub enum FederationError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid federation config {path}: {message}")]
    Config { path: String, message: String },
    #[error("duplicate source id '{0}'")]
    DuplicateSource(String),
    #[error("{0} sources exceed the limit of 64")]
    TooManySources(usize),
    #[error("boundary '{0}' is not a convex polygon")]
    NonConvexBoundary(String),
    #[error("shape {0} is not covered by any boundary")]
    UncoveredShape(String),
    #[error("template {0} cannot be instantiated: {1}")]
    TemplateUnsatisfiable(String, String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
    #[error(transparent)]
    Selector(#[from] SelectorError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

pub(crate) fn read_file(path: &Path) -> Result<String, FederationError> {
    std::fs::read_to_string(path).map_err(|e| FederationError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// JSON federation file. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationConfig {
    pub sources: Vec<SourceConfig>,
    #[serde(default)]
    pub selector: SelectorConfig,
    #[serde(default = "default_true")]
    pub colocation: bool,
    #[serde(default)]
    pub ask: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub id: String,
    pub dump: PathBuf,
    /// Descriptor file; when absent it is derived from the dump with the selector flavor.
    #[serde(default)]
    pub descriptor: Option<PathBuf>,
    /// WKT file used when the flavor is `explicit`.
    #[serde(default)]
    pub boundary: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorConfig {
    pub mode: Mode,
    #[serde(default)]
    pub flavor: Option<String>,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig { mode: Mode::Geo, flavor: None }
    }
}

/// Endpoint IRI recorded for a simulated source.
pub fn endpoint_for(id: &str) -> String {
    format!("http://localhost:8080/{id}/sparql")
}

/// Descriptor of a store: bounding summary of the given flavor (explicit needs a boundary).
pub fn scrape(store: &Store, flavor: Flavor, boundary: Option<&str>) -> Result<DatasetDescriptor, FederationError> {
    let bounding = match (flavor, boundary) {
        (Flavor::Explicit, Some(wkt)) => explicit_summary(parse_wkt(wkt.trim())?)?,
        (Flavor::Explicit, None) => return Err(SummaryError::InvalidFlavor("explicit needs a boundary file".into()).into()),
        (f, _) => extract_summary(store, f)?,
    };
    Ok(describe(store, &endpoint_for(store.id()), Some(bounding)))
}

#[derive(Debug, Clone)]
pub struct Source {
    pub id: String,
    pub store: Arc<Store>,
    pub descriptor: Option<DatasetDescriptor>,
}

impl Source {
    pub fn new(store: Store, descriptor: Option<DatasetDescriptor>) -> Self {
        Source { id: store.id().to_string(), store: Arc::new(store), descriptor }
    }
}

/// A loaded federation: stores in a fixed order, their descriptors and selector settings.
#[derive(Debug, Clone)]
pub struct Federation {
    sources: Vec<Source>,
    pub mode: Mode,
    pub options: ThematicOptions,
    merged: Arc<Store>,
    catalog: Catalog,
}

impl Federation {
    pub fn new(sources: Vec<Source>, mode: Mode, options: ThematicOptions) -> Result<Self, FederationError> {
        if sources.len() > 64 {
            return Err(FederationError::TooManySources(sources.len()));
        }
        let mut seen = HashSet::new();
        for s in &sources {
            if !seen.insert(s.id.as_str()) {
                return Err(FederationError::DuplicateSource(s.id.clone()));
            }
        }
        let refs: Vec<&Store> = sources.iter().map(|s| &*s.store).collect();
        let merged = Arc::new(Store::merge(&refs));
        let catalog = catalog_of(&sources);
        Ok(Federation { sources, mode, options, merged, catalog })
    }

    /// Each store described with a summary of `flavor` (`None` for thematic-only descriptors).
    pub fn from_stores(stores: Vec<Store>, flavor: Option<Flavor>, mode: Mode) -> Result<Self, FederationError> {
        let sources = stores
            .into_iter()
            .map(|s| {
                let d = match flavor {
                    Some(f) => scrape(&s, f, None)?,
                    None => describe(&s, &endpoint_for(s.id()), None),
                };
                Ok(Source::new(s, Some(d)))
            })
            .collect::<Result<Vec<_>, FederationError>>()?;
        Federation::new(sources, mode, ThematicOptions::default())
    }

    /// Same stores with other descriptors and mode; the merged store is shared.
    pub fn variant(&self, descriptors: Vec<Option<DatasetDescriptor>>, mode: Mode) -> Federation {
        assert_eq!(descriptors.len(), self.sources.len());
        let sources: Vec<Source> = self
            .sources
            .iter()
            .zip(descriptors)
            .map(|(s, descriptor)| Source { descriptor, ..s.clone() })
            .collect();
        let catalog = catalog_of(&sources);
        Federation { sources, mode, options: self.options, merged: self.merged.clone(), catalog }
    }

    pub fn with_options(mut self, options: ThematicOptions) -> Self {
        self.options = options;
        self
    }

    pub fn load(path: &Path) -> Result<Self, FederationError> {
        let text = read_file(path)?;
        let config: FederationConfig = serde_json::from_str(&text)
            .map_err(|e| FederationError::Config { path: path.display().to_string(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let flavor: Option<Flavor> = config.selector.flavor.as_deref().map(str::parse).transpose()?;
        let mut sources = Vec::new();
        for sc in &config.sources {
            let store = Store::load_file(&base.join(&sc.dump))?.with_id(sc.id.clone());
            let descriptor = match (&sc.descriptor, flavor) {
                (Some(p), _) => {
                    let mut d = parse_descriptor(&read_file(&base.join(p))?)?;
                    d.source_id = sc.id.clone();
                    Some(d)
                }
                (None, Some(f)) => {
                    let boundary = sc.boundary.as_ref().map(|p| read_file(&base.join(p))).transpose()?;
                    Some(scrape(&store, f, boundary.as_deref())?)
                }
                (None, None) => None,
            };
            sources.push(Source::new(store, descriptor));
        }
        let options = ThematicOptions { ask: config.ask, colocation: config.colocation };
        Federation::new(sources, config.selector.mode, options)
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn ids(&self) -> Vec<String> {
        self.sources.iter().map(|s| s.id.clone()).collect()
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    /// All sources merged, with per-triple source masks by position.
    pub fn merged(&self) -> &Store {
        &self.merged
    }

    /// Box around every stored shape of every source.
    pub fn overall_mbb(&self) -> Option<Rectangle> {
        self.merged.geometries().iter().map(|g| g.bbox()).reduce(|a, b| a.union(b))
    }

    pub fn select(&self, q: &Query) -> Result<SourceAssignment, SelectorError> {
        geospatial_source_select(q, &self.catalog, self.mode, self.options)
    }

    fn masks(&self, sigma: &SourceAssignment) -> Vec<SourceMask> {
        let pos: HashMap<&str, usize> = self.sources.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
        sigma
            .sets()
            .iter()
            .map(|set| set.iter().filter_map(|id| pos.get(id.as_str())).fold(0, |m, &i| m | (1 << i)))
            .collect()
    }

    /// Answers `q`, each pattern restricted to its assigned sources when `sigma` is given.
    pub fn evaluate(&self, q: &Query, sigma: Option<&SourceAssignment>) -> Result<Solutions, StoreError> {
        let mut ev = Evaluator::new(&self.merged, &q.bgp, &q.filters)?;
        if let Some(sigma) = sigma {
            ev = ev.with_assignment(self.masks(sigma));
        }
        ev.solutions(&q.projected_vars())
    }

    /// For each pattern, the sources whose removal from that pattern alone
    /// changes the answer. Computed from the sources of every derivation:
    /// a projected row is lost exactly when all its derivations draw the
    /// pattern's triple from that one source.
    pub fn relevant_sources(&self, q: &Query) -> Result<SourceAssignment, StoreError> {
        self.relevant_with(&Evaluator::new(&self.merged, &q.bgp, &q.filters)?, q)
    }

    fn relevant_with(&self, ev: &Evaluator, q: &Query) -> Result<SourceAssignment, StoreError> {
        let cols: Vec<usize> = q
            .projected_vars()
            .iter()
            .filter_map(|p| ev.vars().iter().position(|v| v == p))
            .collect();
        let mut support: HashMap<Vec<crate::store::Term>, Vec<SourceMask>> = HashMap::new();
        ev.for_each(|row, prov| {
            let key = cols.iter().map(|&i| row[i].clone()).collect();
            let acc = support.entry(key).or_insert_with(|| vec![0; prov.len()]);
            for (a, m) in acc.iter_mut().zip(prov) {
                *a |= m;
            }
            true
        })?;
        let mut sets = vec![BTreeSet::new(); q.bgp.len()];
        for masks in support.values() {
            for (t, m) in masks.iter().enumerate() {
                if m.count_ones() == 1 {
                    sets[t].insert(self.sources[m.trailing_zeros() as usize].id.clone());
                }
            }
        }
        Ok(SourceAssignment::from_sets(sets))
    }

    /// The same oracle by brute force: re-evaluate once per (pattern, source) omission.
    pub fn relevant_by_removal(&self, q: &Query) -> Result<SourceAssignment, StoreError> {
        let full = self.evaluate(q, None)?;
        let all = SourceAssignment::all(q.bgp.len(), self.ids());
        let mut sets = vec![BTreeSet::new(); q.bgp.len()];
        for (t, set) in sets.iter_mut().enumerate() {
            for id in self.ids() {
                let mut sigma = all.clone();
                sigma.remove(t, &id);
                if self.evaluate(q, Some(&sigma))? != full {
                    set.insert(id);
                }
            }
        }
        Ok(SourceAssignment::from_sets(sets))
    }

    /// Compares a selection against the full federation.
    pub fn verdict(&self, q: &Query, sigma: &SourceAssignment) -> Result<Verdict, StoreError> {
        let mut ev = Evaluator::new(&self.merged, &q.bgp, &q.filters)?;
        let relevant = self.relevant_with(&ev, q)?;
        let vars = q.projected_vars();
        let full = ev.solutions(&vars)?;
        ev.restrict(self.masks(sigma));
        let complete = ev.solutions(&vars)? == full;
        Ok(Verdict { complete, covers_relevant: relevant.is_subset_of(sigma), relevant })
    }

    /// Whether each selection answers `q` like the whole federation. The full
    /// answer is computed once; a selection keeping every source for every
    /// pattern is complete without evaluation.
    pub fn completeness(&self, q: &Query, sigmas: &[SourceAssignment]) -> Result<Vec<bool>, StoreError> {
        let mut ev = Evaluator::new(&self.merged, &q.bgp, &q.filters)?;
        let vars = q.projected_vars();
        let all = self.masks(&SourceAssignment::all(q.bgp.len(), self.ids()));
        let mut full = None;
        sigmas
            .iter()
            .map(|sigma| {
                let masks = self.masks(sigma);
                if masks == all {
                    return Ok(true);
                }
                if full.is_none() {
                    ev.unrestricted();
                    full = Some(ev.solutions(&vars)?);
                }
                ev.restrict(masks);
                Ok(ev.solutions(&vars)? == *full.as_ref().unwrap())
            })
            .collect()
    }
}

fn catalog_of(sources: &[Source]) -> Catalog {
    Catalog {
        sources: sources
            .iter()
            .map(|s| SourceEntry::new(s.id.clone(), s.descriptor.clone(), Some(s.store.clone())))
            .collect(),
    }
}

/// Outcome of checking one selection.
#[derive(Debug, Clone)]
pub struct Verdict {
    /// The answer over the selected sources equals the answer over all sources.
    pub complete: bool,
    /// Every relevant (pattern, source) pair was selected.
    pub covers_relevant: bool,
    pub relevant: SourceAssignment,
}

impl Verdict {
    pub fn sound(&self) -> bool {
        self.complete && self.covers_relevant
    }
}
