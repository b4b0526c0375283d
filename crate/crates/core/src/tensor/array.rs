use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AxisSplit, TensorShape};
use crate::gf2::BitVector;
use crate::{Error, Result};

/// An element of `F₂^{n₁}⊗…⊗F₂^{n_d}`, stored as its flattened coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Tensor {
    shape: TensorShape,
    data: BitVector,
}

impl Tensor {
    pub fn zeros(shape: &TensorShape) -> Self {
        Tensor {
            shape: shape.clone(),
            data: BitVector::zeros(shape.total()),
        }
    }

    pub fn from_data(shape: &TensorShape, data: BitVector) -> Result<Self> {
        if data.len() != shape.total() {
            return Err(Error::DimensionMismatch {
                expected: shape.total(),
                found: data.len(),
            });
        }
        Ok(Tensor {
            shape: shape.clone(),
            data,
        })
    }

    /// Tensor whose flattened coordinates are the low bits of `index`.
    pub fn from_index(shape: &TensorShape, index: u64) -> Self {
        Tensor {
            shape: shape.clone(),
            data: BitVector::from_index(shape.total(), index),
        }
    }

    pub fn to_index(&self) -> u64 {
        self.data.to_index()
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn data(&self) -> &BitVector {
        &self.data
    }

    pub fn into_data(self) -> BitVector {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> bool {
        self.data.get(self.shape.flat(index))
    }

    pub fn set(&mut self, index: &[usize], value: bool) {
        let f = self.shape.flat(index);
        self.data.set(f, value);
    }

    pub fn is_zero(&self) -> bool {
        self.data.is_zero()
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        Ok(Tensor {
            shape: self.shape.clone(),
            data: &self.data ^ &other.data,
        })
    }

    /// Full contraction `r.q = Σ r_i q_i`.
    pub fn dot(&self, other: &Tensor) -> Result<bool> {
        self.check_same_shape(other)?;
        Ok(self.data.dot(&other.data))
    }

    /// The slice with the axes outside `split` fixed at `outer`, read as a
    /// vector of `F₂^I`.
    pub fn slice(&self, split: &AxisSplit, outer: usize) -> BitVector {
        let mut out = BitVector::zeros(split.inner_total());
        for i in 0..split.inner_total() {
            if self.data.get(split.join(i, outer)) {
                out.set(i, true);
            }
        }
        out
    }

    /// `h ⊗ e_outer` placed on the axes of `split` and their complement.
    pub fn embed(shape: &TensorShape, split: &AxisSplit, inner: &BitVector, outer: usize) -> Tensor {
        assert_eq!(inner.len(), split.inner_total());
        let mut t = Tensor::zeros(shape);
        for i in inner.ones_iter() {
            t.data.set(split.join(i, outer), true);
        }
        t
    }
}

/// Row-major outer product `v₁⊗…⊗v_k` as a flat vector.
pub fn outer_product(vectors: &[BitVector]) -> BitVector {
    let total: usize = vectors.iter().map(BitVector::len).product();
    let mut out = BitVector::zeros(total);
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    // depth-first over the support of each factor
    while let Some((depth, acc)) = stack.pop() {
        if depth == vectors.len() {
            out.set(acc, true);
            continue;
        }
        let n = vectors[depth].len();
        for i in vectors[depth].ones_iter() {
            stack.push((depth + 1, acc * n + i));
        }
    }
    out
}

/// The rank-1 tensor `u₁⊗…⊗u_d`.
pub fn rank1(shape: &TensorShape, factors: &[BitVector]) -> Result<Tensor> {
    if factors.len() != shape.d() {
        return Err(Error::ShapeMismatch(format!(
            "{} factors for a shape of order {}",
            factors.len(),
            shape.d()
        )));
    }
    for (u, &n) in factors.iter().zip(shape.dims()) {
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: u.len(),
            });
        }
    }
    Tensor::from_data(shape, outer_product(factors))
}

/// `(rs)_{i_{a+1}…} = Σ_{j₁…j_a} r_{j₁…j_a i_{a+1}…} s_{j₁…j_a}`: sums over the
/// leading axes of `r`, which must match the axes of `s`.
pub fn contract(r: &Tensor, s: &Tensor) -> Result<Tensor> {
    let a = s.shape().d();
    let rd = r.shape().dims();
    if a > rd.len() || rd[..a] != *s.shape().dims() {
        return Err(Error::ShapeMismatch(format!(
            "cannot contract {:?} by {:?}",
            rd,
            s.shape().dims()
        )));
    }
    let out_shape = r.shape().tail(a);
    let block = out_shape.total();
    let mut out = BitVector::zeros(block);
    for j in s.data().ones_iter() {
        for k in 0..block {
            if r.data().get(j * block + k) {
                out.flip(k);
            }
        }
    }
    Tensor::from_data(&out_shape, out)
}

impl Serialize for Tensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            shape: &'a TensorShape,
            data: String,
        }
        Repr {
            shape: &self.shape,
            data: self.data.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            shape: TensorShape,
            data: String,
        }
        let repr = Repr::deserialize(d)?;
        let data = BitVector::from_hex(&repr.data, repr.shape.total()).map_err(serde::de::Error::custom)?;
        Tensor::from_data(&repr.shape, data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        BitVector::from_binary_str(s).unwrap()
    }

    #[test]
    fn rank1_examples() {
        let s22 = TensorShape::new(vec![2, 2]).unwrap();
        let t = rank1(&s22, &[bv("10"), bv("01")]).unwrap();
        let ones: Vec<_> = t.data().ones_iter().map(|f| s22.unflat(f)).collect();
        assert_eq!(ones, vec![vec![0, 1]]);

        assert!(rank1(&s22, &[bv("11"), bv("00")]).unwrap().is_zero());

        let s222 = TensorShape::new(vec![2, 2, 2]).unwrap();
        let t = rank1(&s222, &[bv("11"), bv("10"), bv("11")]).unwrap();
        for f in 0..8 {
            let idx = s222.unflat(f);
            assert_eq!(t.data().get(f), idx[1] == 0, "{idx:?}");
        }
        assert!(rank1(&s22, &[bv("11")]).is_err());
        assert!(rank1(&s22, &[bv("11"), bv("101")]).is_err());
    }

    #[test]
    fn contract_examples() {
        let s = TensorShape::new(vec![3, 3]).unwrap();
        let v3 = TensorShape::new(vec![3]).unwrap();
        let (u, v) = (bv("110"), bv("101"));
        let r = rank1(&s, &[u.clone(), v.clone()]).unwrap();
        for w in 0..8u64 {
            let wt = Tensor::from_index(&v3, w);
            let out = contract(&r, &wt).unwrap();
            let expected = if u.dot(wt.data()) { v.clone() } else { BitVector::zeros(3) };
            assert_eq!(out.data(), &expected);
        }
        assert!(contract(&r, &Tensor::zeros(&v3)).unwrap().is_zero());
        let bad = TensorShape::new(vec![2]).unwrap();
        assert!(contract(&r, &Tensor::zeros(&bad)).is_err());
    }

    #[test]
    fn full_contraction_is_the_dot_product() {
        let s = TensorShape::new(vec![2, 3]).unwrap();
        for (x, y) in [(0b101101u64, 0b110011u64), (0b111111, 0b000001), (0, 5)] {
            let (a, b) = (Tensor::from_index(&s, x), Tensor::from_index(&s, y));
            let c = contract(&a, &b).unwrap();
            assert_eq!(c.shape().d(), 0);
            assert_eq!(c.data().get(0), a.dot(&b).unwrap());
        }
    }

    #[test]
    fn tensor_json_roundtrip() {
        let s = TensorShape::new(vec![2, 3]).unwrap();
        let t = Tensor::from_index(&s, 0b101001);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"shape":[2,3],"data":"92"}"#);
        let back: Tensor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
