use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::{SourceMask, Store, StoreError, Term};
use crate::geom::distance;
use crate::query::{FilterArg, GeoFilter, Query, TriplePattern};
use crate::PreparedGeometry;

pub type Binding = BTreeMap<Arc<str>, Term>;
pub type Solutions = BTreeSet<Binding>;

#[derive(Debug, Clone)]
enum Slot {
    Const(Term),
    Var(usize),
}

/// Index-driven nested-loop evaluation of a basic graph pattern with filters.
///
/// Each pattern may be restricted to the triples of a subset of sources.
pub struct Evaluator<'a> {
    store: &'a Store,
    patterns: Vec<[Slot; 3]>,
    filters: Vec<(&'a GeoFilter, Vec<usize>)>,
    ground_filters: Vec<&'a GeoFilter>,
    vars: Vec<Arc<str>>,
    allowed: Vec<SourceMask>,
    /// Filter outcomes by (filter, lhs geometry, rhs geometry) address.
    memo: RefCell<HashMap<(usize, usize, usize), bool>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(store: &'a Store, bgp: &[TriplePattern], filters: &'a [GeoFilter]) -> Result<Self, StoreError> {
        let mut vars: Vec<Arc<str>> = Vec::new();
        let var_id = |name: &str, vars: &mut Vec<Arc<str>>| match vars.iter().position(|v| &**v == name) {
            Some(i) => i,
            None => {
                vars.push(name.into());
                vars.len() - 1
            }
        };
        let patterns = bgp
            .iter()
            .map(|t| {
                t.terms().map(|x| match x {
                    Term::Variable(v) => Slot::Var(var_id(v, &mut vars)),
                    c => Slot::Const(c.clone()),
                })
            })
            .collect();
        let mut with_vars = Vec::new();
        let mut ground_filters = Vec::new();
        for f in filters {
            let ids: Option<Vec<usize>> = f
                .vars()
                .into_iter()
                .map(|v| vars.iter().position(|x| &**x == v))
                .collect();
            match ids {
                None => {
                    return Err(StoreError::TypeMismatch(format!("filter {f} uses a variable absent from the pattern")))
                }
                Some(ids) if ids.is_empty() => ground_filters.push(f),
                Some(ids) => with_vars.push((f, ids)),
            }
        }
        Ok(Evaluator {
            store,
            allowed: vec![SourceMask::MAX; bgp.len()],
            patterns,
            filters: with_vars,
            ground_filters,
            vars,
            memo: RefCell::default(),
        })
    }

    /// Restricts pattern `i` to triples held by the sources in `masks[i]`.
    pub fn with_assignment(mut self, masks: Vec<SourceMask>) -> Self {
        self.restrict(masks);
        self
    }

    /// In-place form of [`Evaluator::with_assignment`]; filter outcomes
    /// computed so far are kept.
    pub fn restrict(&mut self, masks: Vec<SourceMask>) {
        assert_eq!(masks.len(), self.patterns.len());
        self.allowed = masks;
    }

    /// Lifts any restriction.
    pub fn unrestricted(&mut self) {
        self.allowed = vec![SourceMask::MAX; self.patterns.len()];
    }

    /// Variables in the order used by rows passed to [`Evaluator::for_each`].
    pub fn vars(&self) -> &[Arc<str>] {
        &self.vars
    }

    /// Visits every solution with the source mask of the triple matched by each pattern.
    /// The visitor returns `false` to stop early.
    pub fn for_each(&self, mut visit: impl FnMut(&[Term], &[SourceMask]) -> bool) -> Result<(), StoreError> {
        for f in &self.ground_filters {
            if !eval_filter_with(f, |_| None)? {
                return Ok(());
            }
        }
        let n = self.patterns.len();
        let mut state = State {
            vals: vec![None; self.vars.len()],
            done: vec![false; n],
            prov: vec![0; n],
        };
        self.search(&mut state, n, &mut visit)?;
        Ok(())
    }

    pub fn solutions(&self, projection: &[Arc<str>]) -> Result<Solutions, StoreError> {
        let cols: Vec<(Arc<str>, usize)> = projection
            .iter()
            .filter_map(|p| self.vars.iter().position(|v| v == p).map(|i| (p.clone(), i)))
            .collect();
        let mut out = Solutions::new();
        self.for_each(|row, _| {
            out.insert(cols.iter().map(|(name, i)| (name.clone(), row[*i].clone())).collect());
            true
        })?;
        Ok(out)
    }

    pub fn exists(&self) -> Result<bool, StoreError> {
        let mut found = false;
        self.for_each(|_, _| {
            found = true;
            false
        })?;
        Ok(found)
    }

    fn candidates(&self, p: usize, vals: &[Option<Term>]) -> Option<&'a [u32]> {
        let store: &'a Store = self.store;
        let mut best: Option<&'a [u32]> = None;
        for (pos, slot) in self.patterns[p].iter().enumerate() {
            let known = match slot {
                Slot::Const(c) => Some(c),
                Slot::Var(v) => vals[*v].as_ref(),
            };
            if let Some(term) = known {
                let ix = store.index(pos, term);
                if best.is_none_or(|b| ix.len() < b.len()) {
                    best = Some(ix);
                }
            }
        }
        best
    }

    fn search(
        &self,
        st: &mut State,
        remaining: usize,
        visit: &mut impl FnMut(&[Term], &[SourceMask]) -> bool,
    ) -> Result<bool, StoreError> {
        if remaining == 0 {
            let row: Vec<Term> = st.vals.iter().map(|v| v.clone().expect("all variables bound")).collect();
            return Ok(visit(&row, &st.prov));
        }
        let (p, cands) = (0..self.patterns.len())
            .filter(|&p| !st.done[p])
            .map(|p| (p, self.candidates(p, &st.vals)))
            .min_by_key(|(_, c)| c.map_or(self.store.len(), |c| c.len()))
            .expect("a pattern remains");
        let all: Vec<u32>;
        let cands = match cands {
            Some(c) => c,
            None => {
                all = (0..self.store.len() as u32).collect();
                &all
            }
        };
        let mut newly = Vec::with_capacity(3);
        for &idx in cands {
            let mask = self.store.masks[idx as usize];
            if mask & self.allowed[p] == 0 {
                continue;
            }
            let t = &self.store.triples[idx as usize];
            newly.clear();
            let ok = self.patterns[p]
                .iter()
                .zip([&t.subject, &t.predicate, &t.object])
                .all(|(slot, term)| match slot {
                    Slot::Const(c) => c == term,
                    Slot::Var(v) => match &st.vals[*v] {
                        Some(x) => x == term,
                        None => {
                            st.vals[*v] = Some(term.clone());
                            newly.push(*v);
                            true
                        }
                    },
                });
            let ok = ok && self.filters_hold(&st.vals, &newly)?;
            if ok {
                st.done[p] = true;
                st.prov[p] = mask;
                let go_on = self.search(st, remaining - 1, visit)?;
                st.done[p] = false;
                if !go_on {
                    for &v in &newly {
                        st.vals[v] = None;
                    }
                    return Ok(false);
                }
            }
            for &v in &newly {
                st.vals[v] = None;
            }
        }
        Ok(true)
    }

    fn filters_hold(&self, vals: &[Option<Term>], newly: &[usize]) -> Result<bool, StoreError> {
        for (k, (f, ids)) in self.filters.iter().enumerate() {
            if ids.iter().any(|i| newly.contains(i)) && ids.iter().all(|&i| vals[i].is_some()) {
                let lookup = |name: &str| {
                    let i = self.vars.iter().position(|v| &**v == name)?;
                    vals[i].as_ref()
                };
                let (a, b) = f.args();
                let (a, b) = (geometry_of(a, &lookup)?, geometry_of(b, &lookup)?);
                // Geometries live in the store's literals, so addresses are stable.
                let key = (k, a as *const PreparedGeometry as usize, b as *const PreparedGeometry as usize);
                let hit = self.memo.borrow().get(&key).copied();
                let holds = match hit {
                    Some(h) => h,
                    None => {
                        let h = eval_on(f, a, b)?;
                        self.memo.borrow_mut().insert(key, h);
                        h
                    }
                };
                if !holds {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

struct State {
    vals: Vec<Option<Term>>,
    done: Vec<bool>,
    prov: Vec<SourceMask>,
}

fn geometry_of<'t>(arg: &'t FilterArg, lookup: &impl Fn(&str) -> Option<&'t Term>) -> Result<&'t PreparedGeometry, StoreError> {
    match arg {
        FilterArg::Wkt(l) => Ok(l.geometry().expect("WKT filter arguments are parsed")),
        FilterArg::Var(v) => {
            let term = lookup(v).ok_or_else(|| StoreError::TypeMismatch(format!("?{v} is unbound")))?;
            term.as_literal()
                .and_then(|l| l.geometry())
                .map(|g| &**g)
                .ok_or_else(|| StoreError::TypeMismatch(format!("?{v} is bound to {term}, not a WKT literal")))
        }
    }
}

fn eval_filter_with<'t>(f: &'t GeoFilter, lookup: impl Fn(&str) -> Option<&'t Term>) -> Result<bool, StoreError> {
    let (a, b) = f.args();
    eval_on(f, geometry_of(a, &lookup)?, geometry_of(b, &lookup)?)
}

fn eval_on(f: &GeoFilter, a: &PreparedGeometry, b: &PreparedGeometry) -> Result<bool, StoreError> {
    Ok(match f {
        GeoFilter::Relation { relation, .. } => a.relate(*relation, b)?,
        GeoFilter::Distance { unit, op, threshold, .. } => op.holds(distance(a, b, unit)?, *threshold),
    })
}

/// Truth of `f` under `b`; every filter variable must be bound to a WKT literal.
pub fn eval_filter(f: &GeoFilter, b: &Binding) -> Result<bool, StoreError> {
    eval_filter_with(f, |v| b.get(v))
}

/// All bindings of the pattern variables, with set semantics.
pub fn match_bgp(store: &Store, patterns: &[TriplePattern]) -> Solutions {
    let ev = Evaluator::new(store, patterns, &[]).expect("no filters");
    let vars = ev.vars().to_vec();
    ev.solutions(&vars).expect("no filters to fail")
}

pub fn ask(store: &Store, pattern: &TriplePattern) -> bool {
    Evaluator::new(store, std::slice::from_ref(pattern), &[])
        .expect("no filters")
        .exists()
        .expect("no filters to fail")
}

/// Answers `q` over the union of `stores`.
pub fn evaluate_query(stores: &[&Store], q: &Query) -> Result<Solutions, StoreError> {
    let merged = Store::merge(stores);
    Evaluator::new(&merged, &q.bgp, &q.filters)?.solutions(&q.projected_vars())
}
