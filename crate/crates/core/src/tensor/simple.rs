use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{Tensor, TensorShape};
use crate::gf2::{rref, BitVector, Subspace};
use crate::{Error, Result};

/// A translate of `⋂_I (H_I ⊗ F₂^{I^c})` over nonempty axis sets `I`.
///
/// Axis sets missing from `spaces` carry the full space `H_I = F₂^I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleSet {
    shape: TensorShape,
    translate: Tensor,
    spaces: BTreeMap<Vec<usize>, Subspace>,
}

impl SimpleSet {
    pub fn new(shape: &TensorShape, translate: Tensor, spaces: BTreeMap<Vec<usize>, Subspace>) -> Result<Self> {
        if translate.shape() != shape {
            return Err(Error::ShapeMismatch("translate has a different shape".into()));
        }
        for (axes, h) in &spaces {
            if axes.is_empty() {
                return Err(Error::ShapeMismatch("empty axis set".into()));
            }
            let split = shape.split(axes)?;
            if h.ambient_dim() != split.inner_total() {
                return Err(Error::DimensionMismatch {
                    expected: split.inner_total(),
                    found: h.ambient_dim(),
                });
            }
        }
        Ok(SimpleSet {
            shape: shape.clone(),
            translate,
            spaces,
        })
    }

    /// The subspace form (zero translate).
    pub fn linear(shape: &TensorShape, spaces: BTreeMap<Vec<usize>, Subspace>) -> Result<Self> {
        Self::new(shape, Tensor::zeros(shape), spaces)
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn translate(&self) -> &Tensor {
        &self.translate
    }

    pub fn spaces(&self) -> &BTreeMap<Vec<usize>, Subspace> {
        &self.spaces
    }

    /// `H_I`, or the full space when no constraint is recorded.
    pub fn space(&self, axes: &[usize]) -> Subspace {
        self.spaces
            .get(axes)
            .cloned()
            .unwrap_or_else(|| Subspace::full(self.shape.axes_total(axes)))
    }

    /// The simplicity witness `max_I codim(H_I)`.
    pub fn k(&self) -> usize {
        self.spaces.values().map(Subspace::codim).max().unwrap_or(0)
    }

    pub fn shifted(&self, by: &Tensor) -> Result<SimpleSet> {
        SimpleSet::new(&self.shape, self.translate.add(by)?, self.spaces.clone())
    }

    /// Linear functionals cutting out the underlying subspace: `c ⊗ e_j` for
    /// each `c` in a basis of `H_I^⊥` and each coordinate `j` of `F₂^{I^c}`.
    pub fn constraints(&self) -> Result<Vec<BitVector>> {
        let mut out = Vec::new();
        for (axes, h) in &self.spaces {
            let split = self.shape.split(axes)?;
            let dual = h.orthogonal_complement();
            for c in dual.basis() {
                for j in 0..split.outer_total() {
                    out.push(Tensor::embed(&self.shape, &split, c, j).into_data());
                }
            }
        }
        Ok(out)
    }

    /// `⋂_I (H_I ⊗ F₂^{I^c})`.
    pub fn subspace(&self) -> Result<Subspace> {
        let cons = rref(self.shape.total(), &self.constraints()?)?;
        Ok(cons.orthogonal_complement())
    }

    /// Whether `x − translate` lies in every `H_I ⊗ F₂^{I^c}`: each slice along
    /// `I^c` must be orthogonal to `H_I^⊥`.
    pub fn member(&self, x: &Tensor) -> Result<bool> {
        let diff = x.add(&self.translate)?;
        for (axes, h) in &self.spaces {
            let split = self.shape.split(axes)?;
            let dual = h.orthogonal_complement();
            for j in 0..split.outer_total() {
                let slice = diff.slice(&split, j);
                if dual.basis().iter().any(|c| c.dot(&slice)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Exact cardinality `2^dim`.
    pub fn size(&self) -> Result<u128> {
        Ok(1u128 << self.subspace()?.dim())
    }
}

impl Serialize for SimpleSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            axes: &'a [usize],
            rows: &'a Subspace,
        }
        let entries: Vec<Entry<'_>> = self
            .spaces
            .iter()
            .map(|(axes, rows)| Entry { axes, rows })
            .collect();
        let mut st = s.serialize_struct("SimpleSet", 2)?;
        st.serialize_field("translate", &self.translate)?;
        st.serialize_field("spaces", &entries)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_spaces_contain_everything() {
        let s = TensorShape::new(vec![2, 2]).unwrap();
        let mut spaces = BTreeMap::new();
        for axes in s.nonempty_axis_subsets() {
            spaces.insert(axes.clone(), Subspace::full(s.axes_total(&axes)));
        }
        let c = SimpleSet::linear(&s, spaces).unwrap();
        assert_eq!(c.size().unwrap(), 16);
        for x in 0..16 {
            assert!(c.member(&Tensor::from_index(&s, x)).unwrap());
        }
        assert_eq!(c.k(), 0);
    }

    #[test]
    fn single_row_constraint() {
        // H_{0} = span{e_0}: every column of x lies in span{e_0}, so row 1 is zero.
        let s = TensorShape::new(vec![2, 2]).unwrap();
        let spaces = BTreeMap::from([(vec![0], Subspace::coordinate(2, [0]))]);
        let c = SimpleSet::linear(&s, spaces).unwrap();
        assert_eq!(c.size().unwrap(), 4);
        for x in 0..16u64 {
            let t = Tensor::from_index(&s, x);
            let second_row_zero = !t.get(&[1, 0]) && !t.get(&[1, 1]);
            assert_eq!(c.member(&t).unwrap(), second_row_zero);
        }
        assert_eq!(c.k(), 1);
    }

    #[test]
    fn rejects_bad_spaces() {
        let s = TensorShape::new(vec![2, 2]).unwrap();
        let spaces = BTreeMap::from([(vec![0], Subspace::full(3))]);
        assert!(SimpleSet::linear(&s, spaces).is_err());
        let spaces = BTreeMap::from([(vec![1, 0], Subspace::full(4))]);
        assert!(SimpleSet::linear(&s, spaces).is_err());
    }
}
