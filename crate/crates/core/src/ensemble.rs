//! Random macroscale ensembles and the expansion experiment.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete::{stationary_distribution, temporal_mutual_information, Tpm};
use crate::error::{Error, Result};
use crate::expansion::expand_node;
use crate::pid::{spectrum_and_bias, temporal_pid};
use crate::stats::pearson;

pub const BASE_ELEMENTS: usize = 3;

/// Probability of the skeleton transition in a near-deterministic TPM.
pub const DETERMINISTIC_WEIGHT: f64 = 0.99;

/// Largest MI difference between scales accepted as "unchanged".
pub const MI_INVARIANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Gaussian,
    Deterministic,
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleKind::Gaussian => "gaussian",
            EnsembleKind::Deterministic => "deterministic",
        })
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(EnsembleKind::Gaussian),
            "deterministic" => Ok(EnsembleKind::Deterministic),
            _ => Err(Error::InvalidArgument(format!(
                "unknown ensemble kind `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n_systems: usize,
    pub seed: u64,
    pub base_elements: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n_systems: usize, seed: u64) -> Result<Self> {
        if n_systems == 0 {
            return Err(Error::InvalidArgument(
                "an ensemble needs at least one system".into(),
            ));
        }
        Ok(Self {
            kind,
            n_systems,
            seed,
            base_elements: BASE_ELEMENTS,
        })
    }

    /// Generator for system `index`: the master seed with its own stream, so
    /// results do not depend on scheduling.
    pub fn system_rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    pub fn generate(&self, index: usize) -> Tpm {
        let mut rng = self.system_rng(index);
        match self.kind {
            EnsembleKind::Gaussian => generate_gaussian_tpm(&mut rng),
            EnsembleKind::Deterministic => generate_deterministic_tpm(&mut rng),
        }
    }
}

/// 8×8 matrix of `|N(0, 1)|` draws with normalized rows.
pub fn generate_gaussian_tpm<R: Rng + ?Sized>(rng: &mut R) -> Tpm {
    let side = 1 << BASE_ELEMENTS;
    let mut data = Vec::with_capacity(side * side);
    for _ in 0..side {
        let row: Vec<f64> = (0..side)
            .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
            .collect();
        let total: f64 = row.iter().sum();
        data.extend(row.into_iter().map(|v| v / total));
    }
    Tpm::from_raw(BASE_ELEMENTS, data)
}

/// Uniform derangement of `0..n`, by rejection.
pub fn sample_derangement<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        perm.shuffle(rng);
        if perm.iter().enumerate().all(|(i, &p)| i != p) {
            return perm;
        }
    }
}

/// Random map on `0..n` without fixed points: each state's successor is
/// drawn uniformly from the other `n - 1` states.
pub fn sample_fixed_point_free_map<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n)
        .map(|x| {
            let y = rng.gen_range(0..n - 1);
            if y >= x {
                y + 1
            } else {
                y
            }
        })
        .collect()
}

/// Near-deterministic TPM around a skeleton map: state `x` goes to
/// `skeleton[x]` with probability 0.99 and the remaining mass is spread
/// evenly over the other seven states.
pub fn near_deterministic_tpm(skeleton: &[usize]) -> Result<Tpm> {
    let side = 1 << BASE_ELEMENTS;
    if skeleton.len() != side || skeleton.iter().any(|&y| y >= side) {
        return Err(Error::InvalidArgument(format!(
            "skeleton must map {side} states into {side} states"
        )));
    }
    let rest = (1.0 - DETERMINISTIC_WEIGHT) / (side - 1) as f64;
    let mut data = vec![rest; side * side];
    for (x, &y) in skeleton.iter().enumerate() {
        data[x * side + y] = DETERMINISTIC_WEIGHT;
    }
    Ok(Tpm::from_raw(BASE_ELEMENTS, data))
}

/// Near-deterministic TPM whose skeleton is a random fixed-point-free map.
///
/// Permutation skeletons are not used: every such TPM is doubly stochastic
/// and a relabeling of every other, so they all share one decomposition.
pub fn generate_deterministic_tpm<R: Rng + ?Sized>(rng: &mut R) -> Tpm {
    let skeleton = sample_fixed_point_free_map(rng, 1 << BASE_ELEMENTS);
    near_deterministic_tpm(&skeleton).expect("skeleton is in range")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleMeasure {
    pub mi: f64,
    pub b_syn: f64,
}

/// Temporal MI and synergy bias at the system's own stationary distribution.
pub fn measure_scale(t: &Tpm) -> Result<ScaleMeasure> {
    let pi = stationary_distribution(t)?;
    let pid = temporal_pid(t, &pi)?;
    let (mi, _) = temporal_mutual_information(t, &pi)?;
    let spectrum = spectrum_and_bias(&pid)?;
    Ok(ScaleMeasure {
        mi,
        b_syn: spectrum.b_syn,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemResult {
    pub system_id: usize,
    pub kind: EnsembleKind,
    pub macro_bsyn: f64,
    pub meso_bsyn: f64,
    /// Absent when only one expansion level was run.
    pub micro_bsyn: Option<f64>,
    pub mi_bits: f64,
    /// MI at each computed scale, coarsest first.
    pub mi_by_scale: Vec<f64>,
    /// `macro − finest`: synergy bias gained by coarse-graining.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedSystem {
    pub system_id: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionTable {
    pub spec: EnsembleSpec,
    pub levels: usize,
    pub split_element: usize,
    pub systems: Vec<SystemResult>,
    pub skipped: Vec<SkippedSystem>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub kind: EnsembleKind,
    pub seed: u64,
    pub levels: usize,
    pub n_requested: usize,
    pub n_completed: usize,
    pub n_skipped: usize,
    /// Correlation of macro synergy bias against `gain`; `None` when undefined.
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub positive_gain_fraction: f64,
    pub mean_macro_bsyn: f64,
    pub max_mi_deviation: f64,
}

impl ExpansionTable {
    pub fn summary(&self) -> ExperimentSummary {
        let xs: Vec<f64> = self.systems.iter().map(|s| s.macro_bsyn).collect();
        let gains: Vec<f64> = self.systems.iter().map(|s| s.gain).collect();
        let (rho, p_value) = match pearson(&xs, &gains) {
            Ok((r, p)) => (Some(r), Some(p)),
            Err(_) => (None, None),
        };
        let n = self.systems.len();
        let frac = |count: usize| if n == 0 { 0.0 } else { count as f64 / n as f64 };
        ExperimentSummary {
            kind: self.spec.kind,
            seed: self.spec.seed,
            levels: self.levels,
            n_requested: self.spec.n_systems,
            n_completed: n,
            n_skipped: self.skipped.len(),
            rho,
            p_value,
            positive_gain_fraction: frac(gains.iter().filter(|&&g| g > 0.0).count()),
            mean_macro_bsyn: if n == 0 {
                f64::NAN
            } else {
                xs.iter().sum::<f64>() / n as f64
            },
            max_mi_deviation: self
                .systems
                .iter()
                .flat_map(|s| s.mi_by_scale.iter().map(move |m| (m - s.mi_bits).abs()))
                .fold(0.0, f64::max),
        }
    }
}

fn run_system(
    spec: &EnsembleSpec,
    index: usize,
    levels: usize,
    split_element: usize,
) -> Result<SystemResult> {
    let macro_tpm = spec.generate(index);
    let macro_m = measure_scale(&macro_tpm)?;
    let meso = expand_node(&macro_tpm, split_element)?;
    let meso_m = measure_scale(&meso.child)?;
    let mut mi_by_scale = vec![macro_m.mi, meso_m.mi];
    let micro_bsyn = if levels == 2 {
        let micro = expand_node(&meso.child, split_element)?;
        let micro_m = measure_scale(&micro.child)?;
        mi_by_scale.push(micro_m.mi);
        Some(micro_m.b_syn)
    } else {
        None
    };
    let drift = mi_by_scale
        .iter()
        .map(|m| (m - macro_m.mi).abs())
        .fold(0.0, f64::max);
    if drift > MI_INVARIANCE_TOL {
        return Err(Error::Internal(format!(
            "system {index}: mutual information drifted by {drift:e} bit across scales"
        )));
    }
    let finest = micro_bsyn.unwrap_or(meso_m.b_syn);
    Ok(SystemResult {
        system_id: index,
        kind: spec.kind,
        macro_bsyn: macro_m.b_syn,
        meso_bsyn: meso_m.b_syn,
        micro_bsyn,
        mi_bits: macro_m.mi,
        mi_by_scale,
        gain: macro_m.b_syn - finest,
    })
}

/// Generates each macroscale, expands it once (meso) and optionally again
/// along the same lineage (micro), and records the synergy bias at every
/// scale. Systems whose bias is undefined are skipped with the reason.
pub fn run_expansion_experiment(
    spec: &EnsembleSpec,
    levels: usize,
    split_element: usize,
) -> Result<ExpansionTable> {
    if !(1..=2).contains(&levels) {
        return Err(Error::InvalidArgument(format!(
            "levels must be 1 or 2, got {levels}"
        )));
    }
    if split_element >= spec.base_elements {
        return Err(Error::InvalidArgument(format!(
            "split element {split_element} out of range for {} elements",
            spec.base_elements
        )));
    }
    let outcomes: Vec<Result<SystemResult>> = (0..spec.n_systems)
        .into_par_iter()
        .map(|i| run_system(spec, i, levels, split_element))
        .collect();

    let mut systems = Vec::new();
    let mut skipped = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(s) => systems.push(s),
            Err(Error::UndefinedBias(reason)) => skipped.push(SkippedSystem {
                system_id: i,
                reason,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(ExpansionTable {
        spec: *spec,
        levels,
        split_element,
        systems,
        skipped,
    })
}
