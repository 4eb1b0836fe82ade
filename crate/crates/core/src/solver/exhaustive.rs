use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::Qubo;

pub const DEFAULT_VAR_LIMIT: usize = 24;

/// Minimum energy and every assignment attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStates {
    pub energy: f64,
    pub assignments: Vec<Vec<bool>>,
}

pub(crate) fn tie_tolerance(q: &Qubo) -> f64 {
    1e-9 * (1.0 + q.max_abs_coefficient() * (q.num_terms() as f64 + 1.0))
}

/// Full enumeration in Gray-code order with incrementally updated local
/// fields, so each step costs one variable's degree.
pub fn solve_exhaustive(q: &Qubo, var_limit: usize) -> Result<GroundStates> {
    let n = q.num_vars();
    if n > var_limit || n >= 63 {
        return Err(Error::TooLarge { n, limit: var_limit });
    }
    let (linear, nbrs) = q.local_structure();
    let eps = tie_tolerance(q);
    let mut field = linear;
    let mut x = vec![false; n];
    let mut energy = q.offset();
    let mut best = energy;
    let mut masks: Vec<u64> = vec![0];
    let mut mask = 0u64;

    for step in 1u64..(1u64 << n) {
        let j = step.trailing_zeros() as usize;
        let sign = if x[j] { -1.0 } else { 1.0 };
        energy += sign * field[j];
        x[j] = !x[j];
        mask ^= 1 << j;
        for &(k, c) in &nbrs[j] {
            field[k] += sign * c;
        }
        if energy < best - eps {
            best = energy;
            masks.clear();
            masks.push(mask);
        } else if energy <= best + eps {
            masks.push(mask);
        }
    }

    // re-evaluate the survivors exactly and drop drift-induced ties
    let mut assignments: Vec<(f64, Vec<bool>)> = masks
        .into_iter()
        .map(|m| {
            let a: Vec<bool> = (0..n).map(|j| m >> j & 1 == 1).collect();
            (q.energy_unchecked(&a), a)
        })
        .collect();
    let min = assignments.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
    assignments.retain(|(e, _)| *e <= min + eps);
    assignments.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(GroundStates {
        energy: min,
        assignments: assignments.into_iter().map(|(_, a)| a).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::gadgets::add_product;
    use crate::qubo::VarId;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(q: &Qubo) -> (f64, Vec<Vec<bool>>) {
        let n = q.num_vars();
        let all: Vec<(f64, Vec<bool>)> = (0u32..1 << n)
            .map(|m| {
                let x: Vec<bool> = (0..n).map(|j| m >> j & 1 == 1).collect();
                (q.energy(&x).unwrap(), x)
            })
            .collect();
        let min = all.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
        let mut arg: Vec<Vec<bool>> = all.into_iter().filter(|(e, _)| *e == min).map(|(_, x)| x).collect();
        arg.sort();
        (min, arg)
    }

    #[test]
    fn empty_qubo() {
        let mut q = Qubo::new(0);
        q.add_offset(2.5);
        let g = solve_exhaustive(&q, DEFAULT_VAR_LIMIT).unwrap();
        assert_eq!(g.energy, 2.5);
        assert_eq!(g.assignments, vec![Vec::<bool>::new()]);
    }

    #[test]
    fn product_gadget_has_four_ground_states() {
        let mut q = Qubo::new(3);
        add_product(&mut q, VarId(0), VarId(1), VarId(2), 1.0).unwrap();
        let g = solve_exhaustive(&q, DEFAULT_VAR_LIMIT).unwrap();
        assert_eq!(g.energy, 0.0);
        assert_eq!(g.assignments.len(), 4);
        for a in &g.assignments {
            assert_eq!(a[2], a[0] && a[1]);
        }
    }

    #[test]
    fn matches_naive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.gen_range(1..10);
            let mut q = Qubo::new(n);
            for _ in 0..2 * n {
                q.add_term(VarId(rng.gen_range(0..n)), VarId(rng.gen_range(0..n)), rng.gen_range(-3..=3) as f64);
            }
            let (e, arg) = brute(&q);
            let g = solve_exhaustive(&q, DEFAULT_VAR_LIMIT).unwrap();
            assert_eq!(g.energy, e);
            assert_eq!(g.assignments, arg);
        }
    }

    #[test]
    fn size_limit() {
        let q = Qubo::new(25);
        assert!(matches!(solve_exhaustive(&q, 24), Err(Error::TooLarge { n: 25, limit: 24 })));
    }
}
