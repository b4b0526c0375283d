use serde::{Deserialize, Serialize};

use crate::budget::MAX_GROUP_EXPONENT;
use crate::{Error, Result};

/// Dimensions `(n₁,…,n_d)` of `F₂^{n₁}⊗…⊗F₂^{n_d}`.
///
/// Coordinates are flattened row-major: the last axis varies fastest. Axes are
/// numbered from 0. An empty shape is the scalar space F₂.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TensorShape {
    dims: Vec<usize>,
}

impl TryFrom<Vec<usize>> for TensorShape {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        TensorShape::new(dims)
    }
}

impl From<TensorShape> for Vec<usize> {
    fn from(s: TensorShape) -> Vec<usize> {
        s.dims
    }
}

impl TensorShape {
    /// Rejects zero dimensions and shapes with more than 24 coordinates.
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.contains(&0) {
            return Err(Error::ShapeMismatch(format!("zero dimension in {dims:?}")));
        }
        let total: usize = dims.iter().product();
        if total > MAX_GROUP_EXPONENT as usize {
            return Err(Error::budget("tensor coordinates", total as u128, MAX_GROUP_EXPONENT));
        }
        Ok(TensorShape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    /// Number of coordinates, `Π n_i`.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Sub-shape over the given (sorted) axes.
    pub fn restrict(&self, axes: &[usize]) -> TensorShape {
        TensorShape {
            dims: axes.iter().map(|&a| self.dims[a]).collect(),
        }
    }

    /// Shape of the trailing axes `from..d`.
    pub fn tail(&self, from: usize) -> TensorShape {
        TensorShape {
            dims: self.dims[from..].to_vec(),
        }
    }

    pub fn axes_total(&self, axes: &[usize]) -> usize {
        axes.iter().map(|&a| self.dims[a]).product()
    }

    pub fn flat(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.dims.len(), "index rank");
        index.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| {
            assert!(i < n, "index {i} out of range {n}");
            acc * n + i
        })
    }

    pub fn unflat(&self, mut f: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &n) in out.iter_mut().zip(&self.dims).rev() {
            *slot = f % n;
            f /= n;
        }
        out
    }

    /// All nonempty axis subsets, each sorted, ordered by size then lexicographically.
    pub fn nonempty_axis_subsets(&self) -> Vec<Vec<usize>> {
        axis_subsets(self.d())
    }

    /// Complement of a sorted axis subset.
    pub fn complement(&self, axes: &[usize]) -> Vec<usize> {
        (0..self.d()).filter(|a| !axes.contains(a)).collect()
    }

    /// The coordinate split `F₂^{total} = F₂^I ⊗ F₂^{I^c}`.
    pub fn split(&self, axes: &[usize]) -> Result<AxisSplit> {
        AxisSplit::new(self, axes)
    }
}

/// Nonempty subsets of `0..d`, ordered by size then lexicographically.
pub fn axis_subsets(d: usize) -> Vec<Vec<usize>> {
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << d))
        .map(|m| (0..d).filter(|&a| m >> a & 1 == 1).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subsets
}

/// Index bookkeeping for viewing a tensor as an element of `F₂^I ⊗ F₂^{I^c}`.
#[derive(Clone, Debug)]
pub struct AxisSplit {
    axes: Vec<usize>,
    inner_total: usize,
    outer_total: usize,
    /// `join[fi * outer_total + fc]` is the full flat index.
    join: Vec<usize>,
}

impl AxisSplit {
    fn new(shape: &TensorShape, axes: &[usize]) -> Result<Self> {
        if axes.windows(2).any(|w| w[0] >= w[1]) || axes.iter().any(|&a| a >= shape.d()) {
            return Err(Error::ShapeMismatch(format!(
                "axes {axes:?} are not a sorted subset of 0..{}",
                shape.d()
            )));
        }
        let rest = shape.complement(axes);
        let inner = shape.restrict(axes);
        let outer = shape.restrict(&rest);
        let inner_total = inner.total();
        let outer_total = outer.total();
        let mut join = vec![0; shape.total()];
        for f in 0..shape.total() {
            let idx = shape.unflat(f);
            let ii: Vec<usize> = axes.iter().map(|&a| idx[a]).collect();
            let ic: Vec<usize> = rest.iter().map(|&a| idx[a]).collect();
            join[inner.flat(&ii) * outer_total + outer.flat(&ic)] = f;
        }
        Ok(AxisSplit {
            axes: axes.to_vec(),
            inner_total,
            outer_total,
            join,
        })
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    /// `Π_{i∈I} n_i`.
    pub fn inner_total(&self) -> usize {
        self.inner_total
    }

    /// `Π_{i∉I} n_i`.
    pub fn outer_total(&self) -> usize {
        self.outer_total
    }

    #[inline]
    pub fn join(&self, inner: usize, outer: usize) -> usize {
        self.join[inner * self.outer_total + outer]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_unflat_are_inverse() {
        for dims in [vec![2, 3], vec![2, 2, 2], vec![4, 4], vec![1, 3, 2], vec![16], vec![2, 2, 2, 2]] {
            let s = TensorShape::new(dims).unwrap();
            for f in 0..s.total() {
                assert_eq!(s.flat(&s.unflat(f)), f);
            }
        }
    }

    #[test]
    fn last_axis_is_fastest() {
        let s = TensorShape::new(vec![2, 3]).unwrap();
        assert_eq!(s.flat(&[0, 1]), 1);
        assert_eq!(s.flat(&[1, 0]), 3);
    }

    #[test]
    fn rejects_oversized_and_degenerate_shapes() {
        assert!(TensorShape::new(vec![5, 5]).is_err());
        assert!(TensorShape::new(vec![3, 0]).is_err());
        assert_eq!(TensorShape::new(Vec::new()).unwrap().total(), 1);
    }

    #[test]
    fn split_is_a_bijection() {
        let s = TensorShape::new(vec![2, 3, 2]).unwrap();
        for axes in s.nonempty_axis_subsets() {
            let sp = s.split(&axes).unwrap();
            let mut seen = vec![false; s.total()];
            for i in 0..sp.inner_total() {
                for o in 0..sp.outer_total() {
                    let f = sp.join(i, o);
                    assert!(!seen[f]);
                    seen[f] = true;
                }
            }
            assert!(seen.into_iter().all(|b| b));
        }
        assert!(s.split(&[1, 0]).is_err());
    }
}
