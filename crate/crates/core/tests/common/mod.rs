#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use sitecalc::corpus::{categories, enumerate_categories, functors, presheaves};
use sitecalc::fincat::{FinCategory, FunctorMap};
use sitecalc::presheaf::Presheaf;
use sitecalc::site::{all_sieves, all_topologies, saturate, Coverage, Sieve, Site};

pub struct Pool {
    pub categories: Vec<Arc<FinCategory>>,
    /// Presheaves with fibers of at most two elements, per category.
    pub presheaves: Vec<Vec<Presheaf>>,
    pub sites: Vec<Vec<Site>>,
    /// `(source, target, functor)` for every functor between pool
    /// categories.
    pub functors: Vec<(usize, usize, FunctorMap)>,
}

/// Categories with at most two objects and three arrows, then the
/// fixtures with three objects.
pub fn pool() -> &'static Pool {
    static POOL: OnceLock<Pool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut cats: Vec<Arc<FinCategory>> = enumerate_categories(2, 3).into_iter().map(Arc::new).collect();
        cats.extend(categories().into_iter().map(|p| p.1).filter(|c| c.n_objects() > 2));
        let presheaves = cats.iter().map(|c| presheaves(c, 2)).collect();
        let sites = cats.iter().map(all_topologies).collect();
        let mut fs = Vec::new();
        for (i, c) in cats.iter().enumerate() {
            for (j, d) in cats.iter().enumerate() {
                fs.extend(functors(c, d).into_iter().map(|f| (i, j, f)));
            }
        }
        Pool {
            categories: cats,
            presheaves,
            sites,
            functors: fs,
        }
    })
}

/// Index of a functor in the pool.
pub fn functor_index() -> impl Strategy<Value = usize> {
    0..pool().functors.len()
}

/// Functors leaving category `j`.
pub fn functors_from(j: usize) -> Vec<&'static FunctorMap> {
    pool().functors.iter().filter(|t| t.0 == j).map(|t| &t.2).collect()
}

/// Position of `f` in the pool together with its source and target
/// category indices.
pub fn functor(k: usize) -> (usize, usize, &'static FunctorMap) {
    let (i, j, f) = &pool().functors[k];
    (*i, *j, f)
}

pub fn presheaf_on(i: usize, pick: prop::sample::Index) -> &'static Presheaf {
    pick.get(&pool().presheaves[i])
}

pub fn site_on(i: usize, pick: prop::sample::Index) -> &'static Site {
    pick.get(&pool().sites[i])
}

/// Coverages with at most one generating sieve per object that satisfy the
/// coverage condition.
pub fn generating_coverages(cat: &Arc<FinCategory>) -> Vec<Coverage> {
    let per: Vec<Vec<Option<Sieve>>> = cat
        .objects()
        .map(|c| std::iter::once(None).chain(all_sieves(cat, c).into_iter().map(Some)).collect())
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; per.len()];
    loop {
        let gens: Vec<BTreeSet<Sieve>> = idx
            .iter()
            .enumerate()
            .map(|(c, &i)| per[c][i].iter().cloned().collect())
            .collect();
        let cov = Coverage::from_sieves(cat.clone(), gens);
        if saturate(&cov).is_ok() {
            out.push(cov);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < per[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
