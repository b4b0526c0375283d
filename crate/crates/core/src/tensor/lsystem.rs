use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{rank1, Tensor, TensorShape};
use crate::budget::DEFAULT_ENUMERATION_LIMIT;
use crate::gf2::{BitVector, Subspace};
use crate::{Error, Result};

/// How the subspaces below the root are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Children {
    /// `U_{u₁…u_{j−1}}` keyed by its prefix, for every admissible prefix.
    Explicit(BTreeMap<Vec<BitVector>, Subspace>),
    /// The same subspace of `F₂^{n_j}` for every prefix; entry `j−1` serves axis `j`.
    Uniform(Vec<Subspace>),
}

/// The multiset `{u₁⊗…⊗u_d : u₁∈U, u₂∈U_{u₁}, …}` with every subspace of
/// codimension at most `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LSystem {
    shape: TensorShape,
    root: Subspace,
    children: Children,
    bound: usize,
}

impl LSystem {
    pub fn new(shape: &TensorShape, root: Subspace, children: Children, bound: usize) -> Result<Self> {
        if shape.d() == 0 {
            return Err(Error::ShapeMismatch("an l-system needs at least one axis".into()));
        }
        let check = |axis: usize, s: &Subspace| -> Result<()> {
            let n = shape.dims()[axis];
            if s.ambient_dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.ambient_dim(),
                });
            }
            if s.codim() > bound {
                return Err(Error::Precondition(format!(
                    "subspace on axis {axis} has codimension {} > {bound}",
                    s.codim()
                )));
            }
            Ok(())
        };
        check(0, &root)?;
        match &children {
            Children::Uniform(levels) => {
                if levels.len() + 1 != shape.d() {
                    return Err(Error::ShapeMismatch(format!(
                        "{} uniform levels for {} axes",
                        levels.len(),
                        shape.d()
                    )));
                }
                for (j, s) in levels.iter().enumerate() {
                    check(j + 1, s)?;
                }
            }
            Children::Explicit(map) => {
                for (prefix, s) in map {
                    if prefix.is_empty() || prefix.len() >= shape.d() {
                        return Err(Error::ShapeMismatch(format!("prefix of length {}", prefix.len())));
                    }
                    check(prefix.len(), s)?;
                }
            }
        }
        let sys = LSystem {
            shape: shape.clone(),
            root,
            children,
            bound,
        };
        if let Children::Explicit(_) = sys.children {
            // every admissible prefix must have an entry
            for len in 1..shape.d() {
                for p in sys.prefixes(len)? {
                    sys.child(&p)?;
                }
            }
        }
        Ok(sys)
    }

    /// The system with every subspace full.
    pub fn full(shape: &TensorShape) -> Result<Self> {
        let levels = shape.dims()[1..].iter().map(|&n| Subspace::full(n)).collect();
        LSystem::new(shape, Subspace::full(shape.dims()[0]), Children::Uniform(levels), 0)
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn root(&self) -> &Subspace {
        &self.root
    }

    pub fn children(&self) -> &Children {
        &self.children
    }

    /// The declared `l`.
    pub fn bound(&self) -> usize {
        self.bound
    }

    /// `U_{prefix}`; the root for the empty prefix.
    pub fn child(&self, prefix: &[BitVector]) -> Result<Subspace> {
        if prefix.is_empty() {
            return Ok(self.root.clone());
        }
        match &self.children {
            Children::Uniform(levels) => levels
                .get(prefix.len() - 1)
                .cloned()
                .ok_or_else(|| Error::ShapeMismatch(format!("prefix of length {}", prefix.len()))),
            Children::Explicit(map) => map
                .get(prefix)
                .cloned()
                .ok_or_else(|| Error::Precondition(format!("no subspace stored for prefix {prefix:?}"))),
        }
    }

    /// All admissible prefixes `(u₁,…,u_len)`.
    pub fn prefixes(&self, len: usize) -> Result<Vec<Vec<BitVector>>> {
        let mut layer: Vec<Vec<BitVector>> = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::new();
            for p in &layer {
                let s = self.child(p)?;
                for u in s.enumerate_with_limit(DEFAULT_ENUMERATION_LIMIT)? {
                    let mut q = p.clone();
                    q.push(u);
                    next.push(q);
                    if next.len() as u64 > DEFAULT_ENUMERATION_LIMIT {
                        return Err(Error::budget(
                            "l-system prefixes",
                            next.len() as u128,
                            DEFAULT_ENUMERATION_LIMIT as u128,
                        ));
                    }
                }
            }
            layer = next;
        }
        Ok(layer)
    }

    /// The element multiset, one tensor per full tuple `(u₁,…,u_d)`.
    pub fn elements(&self) -> Result<Vec<Tensor>> {
        self.prefixes(self.shape.d())?
            .iter()
            .map(|t| rank1(&self.shape, t))
            .collect()
    }

    /// Number of tuples, i.e. the multiset size.
    pub fn size(&self) -> Result<u128> {
        let d = self.shape.d();
        let mut total = 0u128;
        for p in self.prefixes(d - 1)? {
            total += 1u128 << self.child(&p)?.dim();
        }
        Ok(total)
    }

    /// The largest codimension actually stored.
    pub fn max_codim(&self) -> Result<usize> {
        let mut m = self.root.codim();
        for len in 1..self.shape.d() {
            for p in self.prefixes(len)? {
                m = m.max(self.child(&p)?.codim());
            }
        }
        Ok(m)
    }

    /// The same system with every subspace stored explicitly.
    pub fn to_explicit(&self) -> Result<LSystem> {
        let mut map = BTreeMap::new();
        for len in 1..self.shape.d() {
            for p in self.prefixes(len)? {
                let s = self.child(&p)?;
                map.insert(p, s);
            }
        }
        Ok(LSystem {
            shape: self.shape.clone(),
            root: self.root.clone(),
            children: Children::Explicit(map),
            bound: self.bound,
        })
    }
}

/// `V = U∩U′` and `V_{v₁…v_{j−1}} = U_{v₁…} ∩ U′_{v₁…}` along every prefix of
/// the new system; the declared bound is `l + l′`.
pub fn lsystem_intersect(q: &LSystem, q2: &LSystem) -> Result<LSystem> {
    if q.shape != q2.shape {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            q.shape.dims(),
            q2.shape.dims()
        )));
    }
    let shape = q.shape.clone();
    let root = q.root.intersect(&q2.root)?;
    let mut map = BTreeMap::new();
    let mut layer: Vec<Vec<BitVector>> = vec![Vec::new()];
    let mut current: BTreeMap<Vec<BitVector>, Subspace> = BTreeMap::from([(Vec::new(), root.clone())]);
    for _ in 1..shape.d() {
        let mut next_layer = Vec::new();
        let mut next = BTreeMap::new();
        for p in &layer {
            for u in current[p].enumerate_with_limit(DEFAULT_ENUMERATION_LIMIT)? {
                let mut np = p.clone();
                np.push(u);
                let s = q.child(&np)?.intersect(&q2.child(&np)?)?;
                next.insert(np.clone(), s.clone());
                map.insert(np.clone(), s);
                next_layer.push(np);
            }
        }
        layer = next_layer;
        current = next;
    }
    LSystem::new(&shape, root, Children::Explicit(map), q.bound + q2.bound)
}

impl Serialize for LSystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Node<'a> {
            prefix: Vec<String>,
            rows: &'a Subspace,
        }
        let mut st = s.serialize_struct("LSystem", 4)?;
        st.serialize_field("shape", &self.shape)?;
        st.serialize_field("bound", &self.bound)?;
        st.serialize_field("root", &self.root)?;
        match &self.children {
            Children::Uniform(levels) => st.serialize_field("uniform", levels)?,
            Children::Explicit(map) => {
                let nodes: Vec<Node<'_>> = map
                    .iter()
                    .map(|(p, rows)| Node {
                        prefix: p.iter().map(BitVector::to_hex).collect(),
                        rows,
                    })
                    .collect();
                st.serialize_field("explicit", &nodes)?
            }
        }
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::rref;

    fn shape33() -> TensorShape {
        TensorShape::new(vec![3, 3]).unwrap()
    }

    #[test]
    fn full_system_is_all_rank_one_tuples() {
        let s = shape33();
        let q = LSystem::full(&s).unwrap();
        assert_eq!(q.size().unwrap(), 64);
        assert_eq!(q.elements().unwrap().len(), 64);
        let both = lsystem_intersect(&q, &q).unwrap();
        assert_eq!(both.size().unwrap(), 64);
        assert_eq!(both.max_codim().unwrap(), 0);
    }

    #[test]
    fn self_intersection_keeps_the_multiset() {
        let s = shape33();
        let root = rref(3, &[BitVector::from_binary_str("110").unwrap(), BitVector::from_binary_str("001").unwrap()]).unwrap();
        let mut map = BTreeMap::new();
        for u in root.enumerate().unwrap() {
            let child = if u.get(0) { Subspace::coordinate(3, [1, 2]) } else { Subspace::coordinate(3, [0, 2]) };
            map.insert(vec![u], child);
        }
        let q = LSystem::new(&s, root, Children::Explicit(map), 1).unwrap();
        let mut a = q.elements().unwrap();
        let mut b = lsystem_intersect(&q, &q).unwrap().elements().unwrap();
        a.sort_by_key(Tensor::to_index);
        b.sort_by_key(Tensor::to_index);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_codimension_over_the_bound() {
        let s = shape33();
        let levels = vec![Subspace::zero(3)];
        assert!(LSystem::new(&s, Subspace::full(3), Children::Uniform(levels), 2).is_err());
    }

    #[test]
    fn missing_prefix_is_an_error() {
        let s = shape33();
        let map = BTreeMap::from([(vec![BitVector::zeros(3)], Subspace::full(3))]);
        assert!(LSystem::new(&s, Subspace::coordinate(3, [0]), Children::Explicit(map), 2).is_err());
    }
}
