use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{op_norm, CMatrix};

/// Blocks whose entries are all at most this size are dropped.
pub const ZERO_TOL: f64 = 1e-13;

/// `gamma e + sum_t a_t`: a scalar multiple of the identity plus finitely
/// many block matrices.
///
/// Under the tail convention the homomorphism `W_t` sends the element to
/// `gamma I + a_t` for a supported index and to `gamma I` everywhere else.
/// Zero blocks are never stored, so two elements are structurally equal iff
/// their stored data agree.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockElement {
    gamma: Complex64,
    blocks: BTreeMap<usize, CMatrix>,
}

impl BlockElement {
    pub fn new(gamma: Complex64, blocks: BTreeMap<usize, CMatrix>) -> Self {
        let blocks = blocks.into_iter().filter(|(_, m)| m.max_abs() > ZERO_TOL).collect();
        Self { gamma, blocks }
    }

    pub fn zero() -> Self {
        Self::scalar(Complex64::new(0.0, 0.0))
    }

    pub fn identity() -> Self {
        Self::scalar(Complex64::new(1.0, 0.0))
    }

    pub fn scalar(gamma: Complex64) -> Self {
        Self { gamma, blocks: BTreeMap::new() }
    }

    /// Element with zero scalar part and a single block.
    pub fn single(t: usize, block: CMatrix) -> Self {
        Self::new(Complex64::new(0.0, 0.0), BTreeMap::from([(t, block)]))
    }

    pub fn with_block(mut self, t: usize, block: CMatrix) -> Self {
        if block.max_abs() > ZERO_TOL {
            self.blocks.insert(t, block);
        } else {
            self.blocks.remove(&t);
        }
        self
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    pub fn blocks(&self) -> &BTreeMap<usize, CMatrix> {
        &self.blocks
    }

    pub fn block(&self, t: usize) -> Option<&CMatrix> {
        self.blocks.get(&t)
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.blocks.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.norm() <= ZERO_TOL && self.blocks.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.gamma.re.is_finite() && self.gamma.im.is_finite() && self.blocks.values().all(CMatrix::is_finite)
    }

    /// `max(|gamma|, max_t ||gamma I + a_t||)`; the tail contributes `|gamma|`.
    pub fn norm(&self) -> f64 {
        self.blocks
            .values()
            .map(|m| op_norm(&m.add_identity(self.gamma)).expect("finite element"))
            .fold(self.gamma.norm(), f64::max)
    }

    pub fn adjoint(&self) -> Self {
        Self { gamma: self.gamma.conj(), blocks: self.blocks.iter().map(|(&t, m)| (t, m.adjoint())).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.gamma * s, self.blocks.iter().map(|(&t, m)| (t, m.scale(s))).collect())
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `(a + a*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_re(0.5)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Option<&CMatrix>, Option<&CMatrix>) -> CMatrix,
    ) -> BTreeMap<usize, CMatrix> {
        let keys: BTreeSet<usize> = self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        keys.into_iter().map(|t| (t, f(self.blocks.get(&t), other.blocks.get(&t)))).collect()
    }
}

impl Add for &BlockElement {
    type Output = BlockElement;
    fn add(self, rhs: &BlockElement) -> BlockElement {
        let blocks = self.zip_with(rhs, |a, b| match (a, b) {
            (Some(a), Some(b)) => a + b,
            (Some(a), None) => a.clone(),
            (None, Some(b)) => b.clone(),
            (None, None) => unreachable!(),
        });
        BlockElement::new(self.gamma + rhs.gamma, blocks)
    }
}

impl Sub for &BlockElement {
    type Output = BlockElement;
    fn sub(self, rhs: &BlockElement) -> BlockElement {
        self + &(-rhs)
    }
}

impl Neg for &BlockElement {
    type Output = BlockElement;
    fn neg(self) -> BlockElement {
        BlockElement { gamma: -self.gamma, blocks: self.blocks.iter().map(|(&t, m)| (t, -m)).collect() }
    }
}

/// Blockwise product: `(ga e + a)(gb e + b) = ga gb e + (a_t b_t + ga b_t + gb a_t)_t`.
///
/// Panics if two blocks at the same index have different shapes; use
/// [`Algebra::mul`](super::Algebra::mul) for checked multiplication.
impl Mul for &BlockElement {
    type Output = BlockElement;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &BlockElement) -> BlockElement {
        let (ga, gb) = (self.gamma, rhs.gamma);
        let blocks = self.zip_with(rhs, |a, b| match (a, b) {
            (Some(a), Some(b)) => &(&a.matmul(b) + &b.scale(ga)) + &a.scale(gb),
            (Some(a), None) => a.scale(gb),
            (None, Some(b)) => b.scale(ga),
            (None, None) => unreachable!(),
        });
        BlockElement::new(ga * gb, blocks)
    }
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    gamma: [f64; 2],
    #[serde(default)]
    blocks: BTreeMap<usize, CMatrix>,
}

impl Serialize for BlockElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ElementRepr { gamma: [self.gamma.re, self.gamma.im], blocks: self.blocks.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BlockElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ElementRepr::deserialize(deserializer)?;
        let [re, im] = repr.gamma;
        if !re.is_finite() || !im.is_finite() {
            return Err(serde::de::Error::custom("non-finite gamma"));
        }
        Ok(BlockElement::new(Complex64::new(re, im), repr.blocks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_is_neutral() {
        let x = BlockElement::scalar(c(2.0)).with_block(1, CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]));
        assert_eq!(&BlockElement::identity() * &x, x);
        assert_eq!(&x * &BlockElement::identity(), x);
    }

    #[test]
    fn disjoint_supports_multiply_to_zero() {
        let a = BlockElement::single(0, CMatrix::from_real_diag(&[1.0, 2.0]));
        let b = BlockElement::single(3, CMatrix::from_real_diag(&[5.0]));
        assert!((&a * &b).is_zero());
    }

    #[test]
    fn zero_blocks_are_dropped() {
        let a = BlockElement::single(0, CMatrix::from_real_diag(&[1.0]));
        let d = &a - &a;
        assert!(d.blocks().is_empty());
        assert!(BlockElement::single(2, CMatrix::zeros(2, 2)).blocks().is_empty());
    }

    #[test]
    fn json_layout() {
        let a = BlockElement::scalar(Complex64::new(1.0, -1.0)).with_block(4, CMatrix::from_real_diag(&[2.0]));
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(text, r#"{"gamma":[1.0,-1.0],"blocks":{"4":{"rows":1,"cols":1,"data":[[2.0,0.0]]}}}"#);
        let back: BlockElement = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
    }
}
