use serde::{Deserialize, Serialize};

use crate::gf2::BitVector;
use crate::walsh::GroupSet;
use crate::{Error, Result};

/// `Row`: `{A : Ax = y}` with `x ∈ F₂ⁿ`, `y ∈ F₂ᵐ`.
/// `Column`: `{A : Aᵀx = y}` with `x ∈ F₂ᵐ`, `y ∈ F₂ⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasicKind {
    Row,
    Column,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicSpec {
    pub kind: BasicKind,
    pub x: BitVector,
    pub y: BitVector,
}

/// A set of `m×n` matrices, entry `(i,j)` at flat index `i·n + j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasicSet {
    pub m: usize,
    pub n: usize,
    pub set: GroupSet,
    /// Some condition had `x = 0`, which the usual definition excludes.
    pub zero_x: bool,
}

fn check_spec(spec: &BasicSpec, m: usize, n: usize) -> Result<()> {
    let (xl, yl) = match spec.kind {
        BasicKind::Row => (n, m),
        BasicKind::Column => (m, n),
    };
    if spec.x.len() != xl {
        return Err(Error::DimensionMismatch {
            expected: xl,
            found: spec.x.len(),
        });
    }
    if spec.y.len() != yl {
        return Err(Error::DimensionMismatch {
            expected: yl,
            found: spec.y.len(),
        });
    }
    Ok(())
}

fn satisfies(spec: &BasicSpec, a: u64, m: usize, n: usize) -> bool {
    let x = spec.x.to_index();
    let y = spec.y.to_index();
    match spec.kind {
        BasicKind::Row => (0..m).all(|i| {
            let row = (a >> (i * n)) & ((1u64 << n) - 1);
            ((row & x).count_ones() % 2 == 1) == (y >> i & 1 == 1)
        }),
        BasicKind::Column => (0..n).all(|j| {
            let bit = (0..m).filter(|&i| x >> i & 1 == 1 && a >> (i * n + j) & 1 == 1).count() % 2 == 1;
            bit == (y >> j & 1 == 1)
        }),
    }
}

pub fn basic_set(spec: &BasicSpec, m: usize, n: usize) -> Result<BasicSet> {
    basic_set_intersection(std::slice::from_ref(spec), m, n)
}

/// The matrices satisfying every condition; the whole space for no conditions.
pub fn basic_set_intersection(specs: &[BasicSpec], m: usize, n: usize) -> Result<BasicSet> {
    for s in specs {
        check_spec(s, m, n)?;
    }
    let set = GroupSet::from_predicate((m * n) as u32, |a| specs.iter().all(|s| satisfies(s, a, m, n)))?;
    Ok(BasicSet {
        m,
        n,
        set,
        zero_x: specs.iter().any(|s| s.x.is_zero()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{contract, Tensor, TensorShape};

    fn bv(s: &str) -> BitVector {
        BitVector::from_binary_str(s).unwrap()
    }

    #[test]
    fn sizes_and_flags() {
        let row = basic_set(&BasicSpec { kind: BasicKind::Row, x: bv("100"), y: bv("000") }, 3, 3).unwrap();
        assert_eq!(row.set.size(), 1 << 6);
        assert!(!row.zero_x);
        let all = basic_set(&BasicSpec { kind: BasicKind::Row, x: bv("000"), y: bv("000") }, 3, 3).unwrap();
        assert_eq!(all.set.size(), 1 << 9);
        assert!(all.zero_x);
        let none = basic_set(&BasicSpec { kind: BasicKind::Row, x: bv("000"), y: bv("010") }, 3, 3).unwrap();
        assert!(none.set.is_empty());
    }

    #[test]
    fn column_kind_is_the_contraction() {
        let (m, n) = (2, 3);
        let shape = TensorShape::new(vec![m, n]).unwrap();
        let x = bv("11");
        let y = bv("101");
        let c = basic_set(&BasicSpec { kind: BasicKind::Column, x: x.clone(), y: y.clone() }, m, n).unwrap();
        let xt = Tensor::from_data(&TensorShape::new(vec![m]).unwrap(), x).unwrap();
        for a in 0..(1u64 << (m * n)) {
            let at = Tensor::from_index(&shape, a);
            assert_eq!(c.set.contains(a), contract(&at, &xt).unwrap().data() == &y);
        }
    }
}
