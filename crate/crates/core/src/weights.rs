//! Node weights, and an exact fixed-point image of them for certificates.

use std::ops::Index;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("weight {value} at node {node} is not a positive finite number")]
    NonPositive { node: usize, value: f64 },
    #[error("expected {expected} weights, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("weights span too many binary orders of magnitude for exact arithmetic")]
    RangeTooWide,
}

/// Strictly positive, finite per-node weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeWeights(Vec<f64>);

impl NodeWeights {
    pub fn new(values: Vec<f64>) -> Result<Self, WeightError> {
        if let Some((node, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(WeightError::NonPositive { node, value });
        }
        Ok(Self(values))
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self, WeightError> {
        Self::new(vec![value; n])
    }

    /// Checks that there is exactly one weight per graph node.
    pub fn for_nodes(values: Vec<f64>, n: usize) -> Result<Self, WeightError> {
        if values.len() != n {
            return Err(WeightError::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Float sum of the weights of `set`.
    pub fn total_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.0[i]).sum()
    }
}

impl Index<usize> for NodeWeights {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Every weight written exactly as `scaled[i] * 2^exponent`.
///
/// Any finite `f64` is an integer times a power of two, so with a shared
/// exponent the weights become 128-bit integers and sums, comparisons and
/// doubled LP objectives carry no rounding. Construction fails only when the
/// weights are so spread out that sums over the graph could overflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledWeights {
    scaled: Vec<i128>,
    exponent: i32,
}

/// Leaves headroom for sums over ~2^20 nodes below the flow network's
/// "infinite" capacity of 2^123.
const MAX_BITS: u32 = 100;

impl ScaledWeights {
    pub fn new(w: &NodeWeights) -> Result<Self, WeightError> {
        let parts: Vec<(u64, i32)> = w.as_slice().iter().map(|&x| decompose(x)).collect();
        let Some(exponent) = parts.iter().map(|&(_, e)| e).min() else {
            return Ok(Self {
                scaled: Vec::new(),
                exponent: 0,
            });
        };
        let mut scaled = Vec::with_capacity(parts.len());
        for (m, e) in parts {
            let shift = (e - exponent) as u32;
            let bits = 64 - m.leading_zeros() + shift;
            if bits > MAX_BITS {
                return Err(WeightError::RangeTooWide);
            }
            scaled.push((m as i128) << shift);
        }
        Ok(Self { scaled, exponent })
    }

    pub fn get(&self, i: usize) -> i128 {
        self.scaled[i]
    }

    pub fn as_slice(&self) -> &[i128] {
        &self.scaled
    }

    pub fn sum_of(&self, set: &[usize]) -> i128 {
        set.iter().map(|&i| self.scaled[i]).sum()
    }

    pub fn total(&self) -> i128 {
        self.scaled.iter().sum()
    }

    /// Converts a scaled integer back to a float (one rounding).
    pub fn to_f64(&self, value: i128) -> f64 {
        value as f64 * 2f64.powi(self.exponent)
    }
}

/// `x = m * 2^e` with `m` odd (or zero).
fn decompose(x: f64) -> (u64, i32) {
    debug_assert!(x.is_finite() && x > 0.0);
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    let tz = m.trailing_zeros();
    m >>= tz;
    e += tz as i32;
    (m, e)
}
