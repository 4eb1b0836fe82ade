use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::Qubo;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    pub num_reads: usize,
    pub sweeps_per_read: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub seed: u64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            num_reads: 100,
            sweeps_per_read: 2000,
            beta_start: 0.1,
            beta_end: 10.0,
            seed: 0,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::validation("num_reads", "must be at least 1"));
        }
        if self.sweeps_per_read == 0 {
            return Err(Error::validation("sweeps_per_read", "must be at least 1"));
        }
        if !(self.beta_start > 0.0 && self.beta_start < self.beta_end && self.beta_end.is_finite()) {
            return Err(Error::validation("beta_schedule", "need 0 < beta_start < beta_end"));
        }
        Ok(())
    }

    /// Inverse temperature for sweep `s` of a geometric schedule.
    pub fn beta(&self, s: usize) -> f64 {
        if self.sweeps_per_read == 1 {
            return self.beta_end;
        }
        let f = s as f64 / (self.sweeps_per_read - 1) as f64;
        self.beta_start * (self.beta_end / self.beta_start).powf(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub assignment: Vec<bool>,
    pub energy: f64,
    pub read: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    /// Sorted by energy, then read index.
    pub samples: Vec<Sample>,
    pub params: AnnealParams,
    pub qubo_sha256: String,
}

impl SampleSet {
    pub fn best(&self) -> Option<&Sample> {
        self.samples.first()
    }
}

/// One annealing read: single-bit-flip Metropolis over a fixed variable
/// order, RNG stream `read` of `seed`.
pub fn anneal_read(q: &Qubo, params: &AnnealParams, read: usize) -> Sample {
    let n = q.num_vars();
    let (linear, nbrs) = q.local_structure();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(read as u64);

    let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let mut field = linear;
    for i in 0..n {
        if x[i] {
            for &(k, c) in &nbrs[i] {
                field[k] += c;
            }
        }
    }
    for s in 0..params.sweeps_per_read {
        let beta = params.beta(s);
        for j in 0..n {
            let delta = if x[j] { -field[j] } else { field[j] };
            let accept = delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp();
            if accept {
                let sign = if x[j] { -1.0 } else { 1.0 };
                x[j] = !x[j];
                for &(k, c) in &nbrs[j] {
                    field[k] += sign * c;
                }
            }
        }
    }
    let energy = q.energy_unchecked(&x);
    Sample {
        assignment: x,
        energy,
        read,
    }
}

pub fn solve_anneal(q: &Qubo, params: AnnealParams) -> Result<SampleSet> {
    params.validate()?;
    let mut samples: Vec<Sample> = (0..params.num_reads).map(|r| anneal_read(q, &params, r)).collect();
    samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.read.cmp(&b.read)));
    Ok(SampleSet {
        samples,
        params,
        qubo_sha256: q.sha256(),
    })
}
