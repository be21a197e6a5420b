//! Williams–Beer partial information decomposition and the PI spectrum.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::discrete::{JointDistribution, StateDistribution, Tpm};
use crate::error::{Error, Result};
use crate::lattice::{Antichain, PiLattice, SourceSubset, MAX_SOURCES};

/// Atoms between this floor and zero are float noise and get clamped.
pub const NEGATIVE_ATOM_FLOOR: f64 = -1e-6;

/// Below this total, mutual information counts as zero and the spectrum is
/// undefined.
pub const ZERO_MI: f64 = 1e-12;

/// A joint distribution over discrete sources `X_1..X_n` and one target `Y`.
///
/// Source joint states are mixed-radix with source 0 least significant, so
/// for binary sources the index is the little-endian joint state.
#[derive(Debug, Clone)]
pub struct SourcesTarget {
    source_arity: Vec<usize>,
    joint: JointDistribution,
}

impl SourcesTarget {
    pub fn new(source_arity: Vec<usize>, target_arity: usize, p: Vec<f64>) -> Result<Self> {
        let n_x: usize = source_arity.iter().product();
        let joint = JointDistribution::new(n_x, target_arity, p)?;
        Self::from_joint(joint, source_arity)
    }

    pub fn from_joint(joint: JointDistribution, source_arity: Vec<usize>) -> Result<Self> {
        if !(1..=MAX_SOURCES).contains(&source_arity.len()) {
            return Err(Error::SourceCount(source_arity.len()));
        }
        if source_arity.contains(&0) {
            return Err(Error::InvalidArgument(
                "source arity must be positive".into(),
            ));
        }
        let n_x: usize = source_arity.iter().product();
        if n_x != joint.n_x() {
            return Err(Error::DimensionMismatch {
                expected: n_x,
                got: joint.n_x(),
            });
        }
        Ok(Self {
            source_arity,
            joint,
        })
    }

    /// Past elements of a binary system as sources, joint future as target.
    pub fn temporal(t: &Tpm, input: &StateDistribution) -> Result<Self> {
        let joint = JointDistribution::from_tpm(t, input)?;
        Self::from_joint(joint, vec![2; t.n_elements()])
    }

    pub fn n_sources(&self) -> usize {
        self.source_arity.len()
    }

    pub fn source_arity(&self) -> &[usize] {
        &self.source_arity
    }

    pub fn target_arity(&self) -> usize {
        self.joint.n_y()
    }

    pub fn joint(&self) -> &JointDistribution {
        &self.joint
    }

    /// `I(X_1..X_n ; Y)`.
    pub fn mutual_information(&self) -> f64 {
        self.joint.mutual_information()
    }

    /// Maps each source joint state to the joint state of the sources in `subset`.
    fn project(&self, subset: SourceSubset) -> (usize, Vec<usize>) {
        let members: Vec<usize> = subset.sources().collect();
        let n_a: usize = members.iter().map(|&i| self.source_arity[i]).product();
        let mut proj = Vec::with_capacity(self.joint.n_x());
        let mut digits = vec![0usize; self.n_sources()];
        for _ in 0..self.joint.n_x() {
            let mut a = 0;
            for &i in members.iter().rev() {
                a = a * self.source_arity[i] + digits[i];
            }
            proj.push(a);
            for (d, &arity) in digits.iter_mut().zip(&self.source_arity) {
                *d += 1;
                if *d < arity {
                    break;
                }
                *d = 0;
            }
        }
        (n_a, proj)
    }

    /// `i(A; y)` for every `y`, `NaN` where `p(y) = 0`.
    fn specific_row(&self, subset: SourceSubset) -> Vec<f64> {
        let n_y = self.joint.n_y();
        let (n_a, proj) = self.project(subset);
        let mut p_ay = vec![0.0; n_a * n_y];
        for (x, &a) in proj.iter().enumerate() {
            for y in 0..n_y {
                p_ay[a * n_y + y] += self.joint.get(x, y);
            }
        }
        let mut p_a = vec![0.0; n_a];
        for x in 0..self.joint.n_x() {
            p_a[proj[x]] += self.joint.p_x()[x];
        }
        (0..n_y)
            .map(|y| {
                let py = self.joint.p_y()[y];
                if py <= 0.0 {
                    return f64::NAN;
                }
                let mut info = 0.0;
                for a in 0..n_a {
                    let pay = p_ay[a * n_y + y];
                    if pay > 0.0 {
                        let post = pay / py;
                        info += post * (post / p_a[a]).log2();
                    }
                }
                info.max(0.0)
            })
            .collect()
    }

    fn check_subset(&self, subset: SourceSubset) -> Result<()> {
        if (subset.mask() as usize) >= (1 << self.n_sources()) {
            return Err(Error::InvalidArgument(format!(
                "subset {subset} is not over {} sources",
                self.n_sources()
            )));
        }
        Ok(())
    }
}

/// Specific information `i(A; y) = Σ_a p(a|y) log2(p(a|y) / p(a))`.
pub fn specific_information(st: &SourcesTarget, subset: SourceSubset, y: usize) -> Result<f64> {
    st.check_subset(subset)?;
    if y >= st.target_arity() {
        return Err(Error::InvalidArgument(format!(
            "target state {y} out of range"
        )));
    }
    if st.joint.p_y()[y] <= 0.0 {
        return Err(Error::UndefinedState(y));
    }
    Ok(st.specific_row(subset)[y])
}

/// Specific-information table indexed by subset mask, then target state.
struct SpecificTable {
    rows: Vec<Vec<f64>>,
}

impl SpecificTable {
    fn new(st: &SourcesTarget) -> Self {
        let n_masks = 1usize << st.n_sources();
        let mut rows = vec![Vec::new(); n_masks];
        for (m, row) in rows.iter_mut().enumerate().skip(1) {
            *row =
                st.specific_row(SourceSubset::new(m as u8, st.n_sources()).expect("nonzero mask"));
        }
        Self { rows }
    }

    fn redundancy(&self, p_y: &[f64], atom: &Antichain) -> f64 {
        p_y.iter()
            .enumerate()
            .filter(|(_, &py)| py > 0.0)
            .map(|(y, &py)| {
                let min = atom
                    .members()
                    .iter()
                    .map(|s| self.rows[s.mask() as usize][y])
                    .fold(f64::INFINITY, f64::min);
                py * min
            })
            .sum()
    }
}

/// `I_WB(α; Y) = Σ_y p(y) min_{A ∈ α} i(A; y)`.
pub fn redundancy_wb(st: &SourcesTarget, atom: &Antichain) -> Result<f64> {
    for s in atom.members() {
        st.check_subset(*s)?;
    }
    let table = SpecificTable::new(st);
    Ok(table.redundancy(st.joint.p_y(), atom))
}

/// Redundancy and partial information for every atom of the lattice.
#[derive(Debug, Clone)]
pub struct PidResult {
    lattice: &'static PiLattice,
    redundancy: Vec<f64>,
    atoms: Vec<f64>,
    total_mi: f64,
}

impl PidResult {
    pub fn lattice(&self) -> &'static PiLattice {
        self.lattice
    }

    pub fn redundancy(&self) -> &[f64] {
        &self.redundancy
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn total_mi(&self) -> f64 {
        self.total_mi
    }

    /// Partial information of the atom written as e.g. `{0}{12}`.
    pub fn atom(&self, name: &str) -> Result<f64> {
        let a = Antichain::parse(name, self.lattice.n_sources())?;
        let i = self
            .lattice
            .index_of(&a)
            .ok_or_else(|| Error::Internal(format!("{a} missing from lattice")))?;
        Ok(self.atoms[i])
    }

    pub fn redundancy_of(&self, name: &str) -> Result<f64> {
        let a = Antichain::parse(name, self.lattice.n_sources())?;
        let i = self
            .lattice
            .index_of(&a)
            .ok_or_else(|| Error::Internal(format!("{a} missing from lattice")))?;
        Ok(self.redundancy[i])
    }

    /// JSON export: atoms and redundancies keyed by canonical antichain
    /// string, plus the spectrum as `[rank, mass]` pairs when it is defined.
    pub fn to_json(&self) -> Value {
        let keyed = |values: &[f64]| {
            let mut m = Map::new();
            for (a, v) in self.lattice.atoms().iter().zip(values) {
                m.insert(a.to_string(), json!(v));
            }
            Value::Object(m)
        };
        let spectrum = match spectrum_and_bias(self) {
            Ok(s) => json!({
                "layers": s.layers(),
                "height": s.height,
                "b_syn": s.b_syn,
                "b_red": s.b_red,
            }),
            Err(_) => Value::Null,
        };
        json!({
            "n_sources": self.lattice.n_sources(),
            "total_mi": self.total_mi,
            "atoms": keyed(&self.atoms),
            "redundancy": keyed(&self.redundancy),
            "spectrum": spectrum,
        })
    }
}

/// Möbius inversion of `I_WB` over the lattice.
pub fn decompose(st: &SourcesTarget) -> Result<PidResult> {
    let lattice = PiLattice::shared(st.n_sources())?;
    let table = SpecificTable::new(st);
    let p_y = st.joint.p_y();
    let redundancy: Vec<f64> = lattice
        .atoms()
        .iter()
        .map(|a| table.redundancy(p_y, a))
        .collect();

    // Atoms are stored in a linear extension, so every strict predecessor
    // is final before it is read.
    let mut atoms = vec![0.0; lattice.len()];
    for i in 0..lattice.len() {
        let below: f64 = lattice
            .strictly_below(i)
            .iter()
            .map(|&b| atoms[b as usize])
            .sum();
        let value = redundancy[i] - below;
        if value < NEGATIVE_ATOM_FLOOR {
            return Err(Error::NegativeAtom {
                atom: lattice.atom(i).to_string(),
                value,
            });
        }
        atoms[i] = value.max(0.0);
    }

    Ok(PidResult {
        lattice,
        redundancy,
        atoms,
        total_mi: st.mutual_information(),
    })
}

/// Decomposes the past→future mutual information with each past element as
/// a source and the joint future state as the target.
pub fn temporal_pid(t: &Tpm, input: &StateDistribution) -> Result<PidResult> {
    if !(1..=MAX_SOURCES).contains(&t.n_elements()) {
        return Err(Error::SourceCount(t.n_elements()));
    }
    decompose(&SourcesTarget::temporal(t, input)?)
}

/// Fraction of total mutual information per lattice layer, with the
/// synergy and redundancy biases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiSpectrum {
    pub layer_mass: Vec<f64>,
    pub height: usize,
    pub b_syn: f64,
    pub b_red: f64,
}

impl PiSpectrum {
    /// `(rank, mass)` pairs.
    pub fn layers(&self) -> Vec<(usize, f64)> {
        self.layer_mass.iter().copied().enumerate().collect()
    }
}

/// Layer `i` holds atoms of longest-chain rank `i`; the synergy bias is the
/// mass-weighted mean of `i / height`.
pub fn spectrum_and_bias(p: &PidResult) -> Result<PiSpectrum> {
    let height = p.lattice.height();
    if height == 0 {
        return Err(Error::UndefinedBias(
            "a one-source lattice has a single layer".into(),
        ));
    }
    if p.total_mi < ZERO_MI {
        return Err(Error::UndefinedBias(format!(
            "total mutual information is {:e} bit",
            p.total_mi
        )));
    }
    let mut layer_mass = vec![0.0; height + 1];
    for (i, v) in p.atoms.iter().enumerate() {
        layer_mass[p.lattice.rank(i)] += v / p.total_mi;
    }
    let b_syn: f64 = layer_mass
        .iter()
        .enumerate()
        .map(|(i, s)| i as f64 / height as f64 * s)
        .sum();
    Ok(PiSpectrum {
        layer_mass,
        height,
        b_syn,
        b_red: 1.0 - b_syn,
    })
}
