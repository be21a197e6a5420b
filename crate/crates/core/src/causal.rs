//! Effective information and its determinism/degeneracy split.

use serde::{Deserialize, Serialize};

use crate::discrete::{entropy_bits, StochasticMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EiReport {
    pub ei: f64,
    pub determinism: f64,
    pub degeneracy: f64,
    pub log_n: f64,
    pub avg_row_entropy: f64,
    pub entropy_of_avg_row: f64,
}

impl EiReport {
    /// Field-wise `other - self`.
    pub fn delta(&self, other: &EiReport) -> EiReport {
        EiReport {
            ei: other.ei - self.ei,
            determinism: other.determinism - self.determinism,
            degeneracy: other.degeneracy - self.degeneracy,
            log_n: other.log_n - self.log_n,
            avg_row_entropy: other.avg_row_entropy - self.avg_row_entropy,
            entropy_of_avg_row: other.entropy_of_avg_row - self.entropy_of_avg_row,
        }
    }
}

/// One-step effective information under a uniform intervention distribution.
pub fn effective_information(m: &StochasticMatrix) -> EiReport {
    let n = m.side();
    let log_n = (n as f64).log2();
    let avg_row_entropy = m.rows().map(entropy_bits).sum::<f64>() / n as f64;
    let uniform = vec![1.0 / n as f64; n];
    let entropy_of_avg_row = entropy_bits(&m.left_multiply(&uniform));
    let determinism = log_n - avg_row_entropy;
    let degeneracy = log_n - entropy_of_avg_row;
    EiReport {
        ei: determinism - degeneracy,
        determinism,
        degeneracy,
        log_n,
        avg_row_entropy,
        entropy_of_avg_row,
    }
}

/// Surjective map from micro states onto macro states `0..n_macro`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct StatePartition {
    mapping: Vec<usize>,
    n_macro: usize,
}

impl TryFrom<Vec<usize>> for StatePartition {
    type Error = Error;

    fn try_from(mapping: Vec<usize>) -> Result<Self> {
        StatePartition::new(mapping)
    }
}

impl From<StatePartition> for Vec<usize> {
    fn from(p: StatePartition) -> Self {
        p.mapping
    }
}

impl StatePartition {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        if mapping.is_empty() {
            return Err(Error::InvalidPartition("partition is empty".into()));
        }
        let n_macro = mapping.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; n_macro];
        mapping.iter().for_each(|&m| seen[m] = true);
        if let Some(g) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "macro state {g} has no micro states"
            )));
        }
        Ok(Self { mapping, n_macro })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
            n_macro: n,
        }
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn n_micro(&self) -> usize {
        self.mapping.len()
    }

    pub fn n_macro(&self) -> usize {
        self.n_macro
    }

    /// Every set partition of `n` states, as restricted-growth strings.
    pub fn all(n: usize) -> Vec<StatePartition> {
        fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<StatePartition>) {
            if prefix.len() == n {
                out.push(StatePartition::new(prefix.clone()).expect("restricted growth"));
                return;
            }
            let next = prefix.iter().max().map_or(0, |m| m + 1);
            for g in 0..=next {
                prefix.push(g);
                grow(prefix, n, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            grow(&mut Vec::with_capacity(n), n, &mut out);
        }
        out
    }
}

/// Macro row of a group: the uniform average of its members' rows, with
/// columns summed within each group.
pub fn coarse_grain_tpm(m: &StochasticMatrix, p: &StatePartition) -> Result<StochasticMatrix> {
    if p.n_micro() != m.side() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} states but the matrix has {}",
            p.n_micro(),
            m.side()
        )));
    }
    let k = p.n_macro();
    let mut sizes = vec![0usize; k];
    p.mapping.iter().for_each(|&g| sizes[g] += 1);
    let mut data = vec![0.0; k * k];
    for (i, row) in m.rows().enumerate() {
        let g = p.mapping[i];
        let w = 1.0 / sizes[g] as f64;
        for (j, v) in row.iter().enumerate() {
            data[g * k + p.mapping[j]] += w * v;
        }
    }
    Ok(StochasticMatrix::from_raw(k, data))
}
