use std::sync::Arc;

use super::{Arr, FinCategory, Ob};
use crate::{Error, Result};

/// A functor between finite categories, as an object map and an arrow map.
#[derive(Debug, Clone)]
pub struct FunctorMap {
    domain: Arc<FinCategory>,
    codomain: Arc<FinCategory>,
    objects: Vec<Ob>,
    arrows: Vec<Arr>,
}

impl PartialEq for FunctorMap {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects
            && self.arrows == other.arrows
            && same_category(&self.domain, &other.domain)
            && same_category(&self.codomain, &other.codomain)
    }
}

impl Eq for FunctorMap {}

pub(crate) fn same_category(a: &Arc<FinCategory>, b: &Arc<FinCategory>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl FunctorMap {
    /// Checks that the maps preserve endpoints, identities and every table
    /// entry.
    pub fn new(
        domain: Arc<FinCategory>,
        codomain: Arc<FinCategory>,
        objects: Vec<Ob>,
        arrows: Vec<Arr>,
    ) -> Result<Self> {
        if objects.len() != domain.n_objects() || arrows.len() != domain.n_arrows() {
            return Err(Error::NotAFunctor("map sizes do not match the domain".into()));
        }
        if objects.iter().any(|&y| y >= codomain.n_objects())
            || arrows.iter().any(|&b| b >= codomain.n_arrows())
        {
            return Err(Error::NotAFunctor("image out of range".into()));
        }
        let f = FunctorMap {
            domain,
            codomain,
            objects,
            arrows,
        };
        if let Some(msg) = f.first_defect() {
            return Err(Error::NotAFunctor(msg));
        }
        Ok(f)
    }

    fn first_defect(&self) -> Option<String> {
        let (c, d) = (&*self.domain, &*self.codomain);
        for a in c.arrows() {
            let b = self.arrows[a];
            if d.source(b) != self.objects[c.source(a)] || d.target(b) != self.objects[c.target(a)] {
                return Some(format!("arrow {} lands on the wrong endpoints", c.arrow_name(a)));
            }
        }
        for x in c.objects() {
            if self.arrows[c.identity(x)] != d.identity(self.objects[x]) {
                return Some(format!("identity of {} is not preserved", c.object_name(x)));
            }
        }
        for g in c.arrows() {
            for &f in c.arrows_into(c.source(g)) {
                let gf = c.comp(g, f);
                if d.compose(self.arrows[g], self.arrows[f]) != Some(self.arrows[gf]) {
                    return Some(format!(
                        "composite {}∘{} is not preserved",
                        c.arrow_name(g),
                        c.arrow_name(f)
                    ));
                }
            }
        }
        None
    }

    pub fn identity(c: Arc<FinCategory>) -> Self {
        FunctorMap {
            objects: c.objects().collect(),
            arrows: c.arrows().collect(),
            domain: c.clone(),
            codomain: c,
        }
    }

    /// The functor constant at `y`.
    pub fn constant(domain: Arc<FinCategory>, codomain: Arc<FinCategory>, y: Ob) -> Self {
        let id = codomain.identity(y);
        FunctorMap {
            objects: vec![y; domain.n_objects()],
            arrows: vec![id; domain.n_arrows()],
            domain,
            codomain,
        }
    }

    /// The unique functor into a one-object, one-arrow category.
    pub fn to_terminal(domain: Arc<FinCategory>, terminal: Arc<FinCategory>) -> Self {
        FunctorMap::constant(domain, terminal, 0)
    }

    pub fn domain(&self) -> &Arc<FinCategory> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FinCategory> {
        &self.codomain
    }

    pub fn object(&self, x: Ob) -> Ob {
        self.objects[x]
    }

    pub fn arrow(&self, a: Arr) -> Arr {
        self.arrows[a]
    }

    pub fn object_map(&self) -> &[Ob] {
        &self.objects
    }

    pub fn arrow_map(&self) -> &[Arr] {
        &self.arrows
    }

    /// `self∘first`.
    pub fn after(&self, first: &FunctorMap) -> Result<FunctorMap> {
        if !same_category(&first.codomain, &self.domain) {
            return Err(Error::Mismatch("functors do not compose".into()));
        }
        Ok(FunctorMap {
            domain: first.domain.clone(),
            codomain: self.codomain.clone(),
            objects: first.objects.iter().map(|&x| self.objects[x]).collect(),
            arrows: first.arrows.iter().map(|&a| self.arrows[a]).collect(),
        })
    }
}

/// A natural transformation between parallel functors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatTransMap {
    source: FunctorMap,
    target: FunctorMap,
    components: Vec<Arr>,
}

impl NatTransMap {
    pub fn new(source: FunctorMap, target: FunctorMap, components: Vec<Arr>) -> Result<Self> {
        if !same_category(&source.domain, &target.domain)
            || !same_category(&source.codomain, &target.codomain)
        {
            return Err(Error::NotNatural("functors are not parallel".into()));
        }
        let (c, d) = (&*source.domain, &*source.codomain);
        if components.len() != c.n_objects() {
            return Err(Error::NotNatural("wrong number of components".into()));
        }
        for x in c.objects() {
            let t = components[x];
            if t >= d.n_arrows() || d.source(t) != source.object(x) || d.target(t) != target.object(x) {
                return Err(Error::NotNatural(format!(
                    "component at {} has the wrong endpoints",
                    c.object_name(x)
                )));
            }
        }
        for a in c.arrows() {
            let (x, y) = (c.source(a), c.target(a));
            let left = d.comp(components[y], source.arrow(a));
            let right = d.comp(target.arrow(a), components[x]);
            if left != right {
                return Err(Error::NotNatural(format!(
                    "square at {} does not commute",
                    c.arrow_name(a)
                )));
            }
        }
        Ok(NatTransMap {
            source,
            target,
            components,
        })
    }

    pub fn identity(f: &FunctorMap) -> Self {
        let d = &f.codomain;
        NatTransMap {
            components: f.objects.iter().map(|&y| d.identity(y)).collect(),
            source: f.clone(),
            target: f.clone(),
        }
    }

    pub fn source(&self) -> &FunctorMap {
        &self.source
    }

    pub fn target(&self) -> &FunctorMap {
        &self.target
    }

    pub fn component(&self, x: Ob) -> Arr {
        self.components[x]
    }

    pub fn components(&self) -> &[Arr] {
        &self.components
    }

    /// Vertical composite `next • self`.
    pub fn then(&self, next: &NatTransMap) -> Result<NatTransMap> {
        if self.target != next.source {
            return Err(Error::Mismatch("transformations do not compose".into()));
        }
        let d = &self.source.codomain;
        Ok(NatTransMap {
            source: self.source.clone(),
            target: next.target.clone(),
            components: self
                .components
                .iter()
                .zip(&next.components)
                .map(|(&s, &t)| d.comp(t, s))
                .collect(),
        })
    }

    /// Whiskering by a functor on the domain side: components `self_{k(x)}`.
    pub fn precompose(&self, k: &FunctorMap) -> Result<NatTransMap> {
        Ok(NatTransMap {
            source: self.source.after(k)?,
            target: self.target.after(k)?,
            components: k.objects.iter().map(|&y| self.components[y]).collect(),
        })
    }

    /// Whiskering by a functor on the codomain side: components `h(self_x)`.
    pub fn postcompose(&self, h: &FunctorMap) -> Result<NatTransMap> {
        Ok(NatTransMap {
            source: h.after(&self.source)?,
            target: h.after(&self.target)?,
            components: self.components.iter().map(|&a| h.arrow(a)).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn functor_checks_reject_bad_maps() {
        let two = Arc::new(fixtures::two());
        let a = two.object_by_name("a").unwrap();
        let b = two.object_by_name("b").unwrap();
        let f = two.arrow_by_name("f").unwrap();
        // swap objects but keep f: endpoints wrong
        let bad = FunctorMap::new(two.clone(), two.clone(), vec![b, a], vec![1, 0, f]);
        assert!(bad.is_err());
        let id = FunctorMap::new(two.clone(), two.clone(), vec![a, b], two.arrows().collect()).unwrap();
        assert_eq!(id, FunctorMap::identity(two));
    }

    #[test]
    fn naturality_is_checked() {
        let two = Arc::new(fixtures::two());
        let a = two.object_by_name("a").unwrap();
        let b = two.object_by_name("b").unwrap();
        let f = two.arrow_by_name("f").unwrap();
        let at_a = FunctorMap::constant(two.clone(), two.clone(), a);
        let at_b = FunctorMap::constant(two.clone(), two.clone(), b);
        assert!(NatTransMap::new(at_a.clone(), at_b.clone(), vec![f, f]).is_ok());
        assert!(NatTransMap::new(at_b, at_a, vec![f, f]).is_err());
        let id = FunctorMap::identity(two.clone());
        let to_b = FunctorMap::constant(two.clone(), two.clone(), b);
        let unit = NatTransMap::new(id, to_b, vec![f, two.identity(b)]).unwrap();
        let comp = NatTransMap::identity(unit.source()).then(&unit).unwrap();
        assert_eq!(comp, unit);
    }
}
