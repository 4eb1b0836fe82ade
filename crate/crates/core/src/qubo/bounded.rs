use serde::{Deserialize, Serialize};

use super::{VarId, VarRegistry};
use crate::error::{Error, Result};

/// Coefficients of the capped binary expansion of `0..=bound`:
/// `1, 2, …, 2^(m-1)` with `m = ⌊log₂(bound+1)⌋`, then the residual
/// `bound − (2^m − 1)` when it is nonzero. Every subset sum is at most
/// `bound` and every value in `0..=bound` is reachable.
pub fn capped_coefficients(bound: u64) -> Vec<u64> {
    let m = 63 - (bound + 1).leading_zeros() as u64;
    let mut coeffs: Vec<u64> = (0..m).map(|j| 1u64 << j).collect();
    let residual = bound - ((1u64 << m) - 1);
    if residual > 0 {
        coeffs.push(residual);
    }
    coeffs
}

/// A non-negative integer `Σ c_j·b_j` over binary variables, capped at `bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedInt {
    pub bound: u64,
    pub bits: Vec<(VarId, u64)>,
}

impl BoundedInt {
    pub fn constant_zero() -> Self {
        BoundedInt {
            bound: 0,
            bits: Vec::new(),
        }
    }

    pub fn value(&self, x: &[bool]) -> u64 {
        self.bits
            .iter()
            .filter(|(v, _)| x[v.0])
            .map(|(_, c)| c)
            .sum()
    }

    /// Bit pattern representing `value`, or `None` when it exceeds the bound.
    pub fn decompose(&self, value: u64) -> Option<Vec<bool>> {
        let coeffs: Vec<u64> = self.bits.iter().map(|(_, c)| *c).collect();
        decompose(&coeffs, self.bound, value)
    }

    /// Writes the bits for `value` into `x`.
    pub fn write(&self, value: u64, x: &mut [bool]) -> Option<()> {
        let pattern = self.decompose(value)?;
        for ((v, _), b) in self.bits.iter().zip(pattern) {
            x[v.0] = b;
        }
        Some(())
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.bits.iter().map(|(v, _)| *v)
    }
}

fn decompose(coeffs: &[u64], bound: u64, value: u64) -> Option<Vec<bool>> {
    if value > bound {
        return None;
    }
    let mut bits = vec![false; coeffs.len()];
    let pow_count = coeffs.len() - usize::from(!coeffs.is_empty() && !is_pow_prefix(coeffs));
    let pow_max = (1u64 << pow_count) - 1;
    let mut rest = value;
    if rest > pow_max {
        // Only reachable when a residual coefficient exists.
        let r = *coeffs.last()?;
        bits[coeffs.len() - 1] = true;
        rest -= r;
    }
    for (j, bit) in bits.iter_mut().enumerate().take(pow_count) {
        *bit = rest >> j & 1 == 1;
    }
    Some(bits)
}

fn is_pow_prefix(coeffs: &[u64]) -> bool {
    coeffs.iter().enumerate().all(|(j, &c)| c == 1u64 << j)
}

/// Allocates a capped integer register named `label#j`.
pub fn new_bounded_int(reg: &mut VarRegistry, label: &str, bound: i64) -> Result<BoundedInt> {
    if bound < 0 {
        return Err(Error::NegativeBound(bound));
    }
    let bound = bound as u64;
    let bits = capped_coefficients(bound)
        .into_iter()
        .enumerate()
        .map(|(j, c)| Ok((reg.alloc(format!("{label}#{j}"))?, c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundedInt { bound, bits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn reachable(coeffs: &[u64]) -> BTreeSet<u64> {
        (0u32..1 << coeffs.len())
            .map(|mask| {
                coeffs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| mask >> j & 1 == 1)
                    .map(|(_, c)| c)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn documented_expansions() {
        assert_eq!(capped_coefficients(5), vec![1, 2, 2]);
        assert_eq!(capped_coefficients(7), vec![1, 2, 4]);
        assert_eq!(capped_coefficients(1), vec![1]);
        assert!(capped_coefficients(0).is_empty());
    }

    #[test]
    fn representable_set_is_exactly_zero_to_bound() {
        for bound in 0..=64u64 {
            let c = capped_coefficients(bound);
            let expected: BTreeSet<u64> = (0..=bound).collect();
            assert_eq!(reachable(&c), expected, "bound {bound}");
            // bit count is ⌈log₂(bound+1)⌉
            let ceil_log = (64 - bound.leading_zeros()) as usize;
            assert_eq!(c.len(), ceil_log, "bound {bound}");
        }
    }

    #[test]
    fn decompose_round_trips() {
        for bound in 0..=40u64 {
            let coeffs = capped_coefficients(bound);
            for v in 0..=bound {
                let bits = decompose(&coeffs, bound, v).unwrap();
                let got: u64 = coeffs.iter().zip(&bits).filter(|(_, b)| **b).map(|(c, _)| c).sum();
                assert_eq!(got, v);
            }
            assert!(decompose(&coeffs, bound, bound + 1).is_none());
        }
    }

    #[test]
    fn negative_bound_rejected() {
        let mut reg = VarRegistry::new();
        assert!(matches!(new_bounded_int(&mut reg, "s", -1), Err(Error::NegativeBound(-1))));
        let z = new_bounded_int(&mut reg, "z", 0).unwrap();
        assert!(z.bits.is_empty());
        assert_eq!(reg.len(), 0);
    }
}
