//! Boolean networks with exogenous inputs and the logic-gate circuits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discrete::{StateDistribution, Tpm};
use crate::error::{Error, Result};
use crate::pid::{temporal_pid, PidResult};

/// Largest network turned into a dense TPM.
pub const MAX_ELEMENTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub name: String,
    pub inputs: Vec<usize>,
    /// Output for each joint input state; input `j` contributes bit `j`.
    pub table: Vec<u8>,
}

impl Element {
    pub fn new(name: &str, inputs: Vec<usize>, table: Vec<u8>) -> Self {
        Self {
            name: name.to_string(),
            inputs,
            table,
        }
    }

    pub fn exogenous(name: &str) -> Self {
        Self::new(name, Vec::new(), Vec::new())
    }

    fn eval(&self, state: usize) -> u8 {
        let idx = self
            .inputs
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &i)| acc | (((state >> i) & 1) << j));
        self.table[idx]
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    elements: Vec<Element>,
    exogenous: Vec<usize>,
}

/// Elements updated synchronously from the previous joint state; exogenous
/// elements are redrawn from an input policy at every step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NetworkFile", into = "NetworkFile")]
pub struct BoolNetwork {
    elements: Vec<Element>,
    exogenous: Vec<usize>,
}

impl TryFrom<NetworkFile> for BoolNetwork {
    type Error = Error;

    fn try_from(f: NetworkFile) -> Result<Self> {
        BoolNetwork::new(f.elements, f.exogenous)
    }
}

impl From<BoolNetwork> for NetworkFile {
    fn from(n: BoolNetwork) -> Self {
        NetworkFile {
            elements: n.elements,
            exogenous: n.exogenous,
        }
    }
}

impl BoolNetwork {
    pub fn new(elements: Vec<Element>, mut exogenous: Vec<usize>) -> Result<Self> {
        let n = elements.len();
        if n == 0 || n > MAX_ELEMENTS {
            return Err(Error::InvalidNetwork(format!(
                "network must have 1..={MAX_ELEMENTS} elements, got {n}"
            )));
        }
        exogenous.sort_unstable();
        exogenous.dedup();
        if let Some(&e) = exogenous.iter().find(|&&e| e >= n) {
            return Err(Error::InvalidNetwork(format!(
                "exogenous index {e} out of range"
            )));
        }
        for (i, el) in elements.iter().enumerate() {
            if let Some(&j) = el.inputs.iter().find(|&&j| j >= n) {
                return Err(Error::InvalidNetwork(format!(
                    "element {i} ({}) reads missing element {j}",
                    el.name
                )));
            }
            if exogenous.contains(&i) {
                if !el.inputs.is_empty() {
                    return Err(Error::InvalidNetwork(format!(
                        "exogenous element {i} ({}) has inputs",
                        el.name
                    )));
                }
                continue;
            }
            let expected = 1usize << el.inputs.len();
            if el.table.len() != expected {
                return Err(Error::InvalidNetwork(format!(
                    "element {i} ({}) has a table of length {}, expected {expected}",
                    el.name,
                    el.table.len()
                )));
            }
            if el.table.iter().any(|&v| v > 1) {
                return Err(Error::InvalidNetwork(format!(
                    "element {i} ({}) has a non-binary table entry",
                    el.name
                )));
            }
        }
        Ok(Self {
            elements,
            exogenous,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn exogenous(&self) -> &[usize] {
        &self.exogenous
    }

    pub fn is_exogenous(&self, i: usize) -> bool {
        self.exogenous.binary_search(&i).is_ok()
    }

    /// Joint state of the non-exogenous elements after one update.
    pub fn step_internal(&self, state: usize) -> usize {
        self.elements
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.is_exogenous(*i))
            .fold(0, |acc, (i, el)| acc | ((el.eval(state) as usize) << i))
    }

    /// Longest chain of internal dependencies, or an error on a cycle.
    pub fn depth(&self) -> Result<usize> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done(usize),
        }
        fn visit(net: &BoolNetwork, i: usize, marks: &mut [Mark]) -> Result<usize> {
            match marks[i] {
                Mark::Done(d) => return Ok(d),
                Mark::Active => {
                    return Err(Error::UnsupportedTopology(format!(
                        "element {i} ({}) lies on a feedback loop",
                        net.elements[i].name
                    )))
                }
                Mark::New => {}
            }
            if net.is_exogenous(i) {
                marks[i] = Mark::Done(0);
                return Ok(0);
            }
            marks[i] = Mark::Active;
            let mut d = 0;
            for &j in &net.elements[i].inputs {
                d = d.max(visit(net, j, marks)?);
            }
            marks[i] = Mark::Done(d + 1);
            Ok(d + 1)
        }
        let mut marks = vec![Mark::New; self.len()];
        (0..self.len()).try_fold(0, |acc, i| Ok(acc.max(visit(self, i, &mut marks)?)))
    }

    /// Value of `output` once the feed-forward network has settled on fixed
    /// exogenous values.
    pub fn settle(&self, exo_values: &[u8], output: usize) -> Result<u8> {
        if exo_values.len() != self.exogenous.len() {
            return Err(Error::DimensionMismatch {
                expected: self.exogenous.len(),
                got: exo_values.len(),
            });
        }
        let mut state = self
            .exogenous
            .iter()
            .zip(exo_values)
            .fold(0usize, |acc, (&i, &v)| acc | ((v as usize & 1) << i));
        let exo_mask = self.exogenous.iter().fold(0usize, |acc, &i| acc | (1 << i));
        for _ in 0..self.depth()? {
            state = (state & exo_mask) | self.step_internal(state);
        }
        Ok(((state >> output) & 1) as u8)
    }
}

/// Distribution over the joint states of the exogenous elements, drawn
/// independently at every step. Exogenous element `k` (in index order)
/// contributes bit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExoPolicy {
    probs: Vec<f64>,
}

impl ExoPolicy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if !probs.len().is_power_of_two() {
            return Err(Error::InvalidDistribution(format!(
                "exogenous policy length {} is not a power of two",
                probs.len()
            )));
        }
        let n = probs.len().trailing_zeros() as usize;
        let d = StateDistribution::new(n, probs)?;
        Ok(Self {
            probs: d.into_vec(),
        })
    }

    pub fn uniform(n_exogenous: usize) -> Self {
        Self {
            probs: StateDistribution::uniform(n_exogenous).into_vec(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn check(&self, net: &BoolNetwork) -> Result<()> {
        let expected = 1usize << net.exogenous.len();
        if self.probs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.probs.len(),
            });
        }
        Ok(())
    }

    /// Spreads each exogenous joint value onto its element bits.
    fn placements(&self, net: &BoolNetwork) -> Vec<(usize, f64)> {
        self.probs
            .iter()
            .enumerate()
            .map(|(e, &p)| {
                let bits = net
                    .exogenous
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (k, &i)| acc | (((e >> k) & 1) << i));
                (bits, p)
            })
            .collect()
    }
}

/// One-step TPM: internal elements update deterministically from the past
/// state, exogenous elements are redrawn from `exo`.
pub fn network_to_tpm(net: &BoolNetwork, exo: &ExoPolicy) -> Result<Tpm> {
    exo.check(net)?;
    let n = net.len();
    let side = 1usize << n;
    let placements = exo.placements(net);
    let mut data = vec![0.0; side * side];
    for x in 0..side {
        let internal = net.step_internal(x);
        for &(bits, p) in &placements {
            data[x * side + (internal | bits)] += p;
        }
    }
    Ok(Tpm::from_raw(n, data))
}

/// Temporal PID of a network at its induced past distribution.
pub fn network_pid(net: &BoolNetwork, exo: &ExoPolicy) -> Result<PidResult> {
    let t = network_to_tpm(net, exo)?;
    temporal_pid(&t, &induced_past_distribution(net, exo)?)
}

/// Steady-state distribution of the joint past state of a feed-forward
/// network whose exogenous elements are redrawn from `exo` every step.
pub fn induced_past_distribution(net: &BoolNetwork, exo: &ExoPolicy) -> Result<StateDistribution> {
    exo.check(net)?;
    let depth = net.depth()?;
    let n = net.len();
    let mut probs = vec![0.0; 1 << n];
    for (bits, p) in exo.placements(net) {
        probs[bits] += p;
    }
    let mut dist = StateDistribution::new(n, probs)?;
    // After `depth` steps every internal element is a function of the
    // exogenous history alone, so the starting internal values are forgotten.
    let tpm = network_to_tpm(net, exo)?;
    for _ in 0..depth {
        dist = dist.evolve(&tpm)?;
    }
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    And,
    Or,
    Xor,
}

impl GateKind {
    pub const ALL: [GateKind; 3] = [GateKind::And, GateKind::Or, GateKind::Xor];

    pub fn table(self) -> Vec<u8> {
        match self {
            GateKind::And => AND.to_vec(),
            GateKind::Or => OR.to_vec(),
            GateKind::Xor => XOR.to_vec(),
        }
    }

    pub fn apply(self, a: u8, b: u8) -> u8 {
        self.table()[(a | (b << 1)) as usize]
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
        })
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(GateKind::And),
            "or" => Ok(GateKind::Or),
            "xor" => Ok(GateKind::Xor),
            _ => Err(Error::InvalidArgument(format!("unknown gate `{s}`"))),
        }
    }
}

const NAND: [u8; 4] = [1, 1, 1, 0];
const AND: [u8; 4] = [0, 0, 0, 1];
const OR: [u8; 4] = [0, 1, 1, 1];
const XOR: [u8; 4] = [0, 1, 1, 0];

/// A logic gate as a single mechanism (macro) and as a small network of
/// gates implementing it (micro). Inputs A and B are elements 0 and 1 in both.
#[derive(Debug, Clone)]
pub struct GateCircuitPair {
    pub kind: GateKind,
    pub macro_net: BoolNetwork,
    pub micro_net: BoolNetwork,
    pub macro_output: usize,
    pub micro_output: usize,
}

pub fn build_gate_pair(kind: GateKind) -> GateCircuitPair {
    let gate = |name: &str, a: usize, b: usize, table: [u8; 4]| {
        Element::new(name, vec![a, b], table.to_vec())
    };
    let inputs = || vec![Element::exogenous("A"), Element::exogenous("B")];

    let mut macro_elements = inputs();
    macro_elements.push(Element::new(&kind.to_string(), vec![0, 1], kind.table()));

    let mut micro = inputs();
    match kind {
        GateKind::And => {
            micro.push(gate("N1", 0, 1, NAND));
            micro.push(gate("N2", 2, 2, NAND));
        }
        GateKind::Or => {
            micro.push(gate("N1", 0, 0, NAND));
            micro.push(gate("N2", 1, 1, NAND));
            micro.push(gate("N3", 2, 3, NAND));
        }
        GateKind::Xor => {
            micro.push(gate("N", 0, 1, NAND));
            micro.push(gate("O", 0, 1, OR));
            micro.push(gate("X", 2, 3, AND));
        }
    }
    let micro_output = micro.len() - 1;
    GateCircuitPair {
        kind,
        macro_net: BoolNetwork::new(macro_elements, vec![0, 1]).expect("valid macro gate"),
        micro_net: BoolNetwork::new(micro, vec![0, 1]).expect("valid micro circuit"),
        macro_output: 2,
        micro_output,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::temporal_mutual_information;
    use approx::assert_abs_diff_eq;

    #[test]
    fn self_copy_is_identity() {
        let net = BoolNetwork::new(vec![Element::new("x", vec![0], vec![0, 1])], vec![]).unwrap();
        let t = network_to_tpm(&net, &ExoPolicy::uniform(0)).unwrap();
        assert_eq!(t, Tpm::identity(1));
        assert!(matches!(
            induced_past_distribution(&net, &ExoPolicy::uniform(0)),
            Err(Error::UnsupportedTopology(_))
        ));
    }

    #[test]
    fn macro_and_rows() {
        let pair = build_gate_pair(GateKind::And);
        let t = network_to_tpm(&pair.macro_net, &ExoPolicy::uniform(2)).unwrap();
        for x in 0..8 {
            let g = ((x & 1) & (x >> 1 & 1)) << 2;
            let nonzero: Vec<usize> = (0..8).filter(|&y| t.get(x, y) > 0.0).collect();
            assert_eq!(nonzero, [g, g | 1, g | 2, g | 3]);
            assert!(nonzero.iter().all(|&y| t.get(x, y) == 0.25));
        }
        let input = induced_past_distribution(&pair.macro_net, &ExoPolicy::uniform(2)).unwrap();
        let (mi, _) = temporal_mutual_information(&t, &input).unwrap();
        assert_abs_diff_eq!(mi, 0.811_278_124_459_132_8, epsilon = 1e-12);
    }

    #[test]
    fn macro_and_induced_gate_marginal() {
        let pair = build_gate_pair(GateKind::And);
        let d = induced_past_distribution(&pair.macro_net, &ExoPolicy::uniform(2)).unwrap();
        let p_gate: f64 = (0..8).filter(|s| s & 4 != 0).map(|s| d.probs()[s]).sum();
        assert_abs_diff_eq!(p_gate, 0.25, epsilon = 1e-15);
        for ab in 0..4 {
            let p: f64 = d.probs()[ab] + d.probs()[ab | 4];
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn exogenous_only_network() {
        let net = BoolNetwork::new(
            vec![Element::exogenous("a"), Element::exogenous("b")],
            vec![0, 1],
        )
        .unwrap();
        let policy = ExoPolicy::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let t = network_to_tpm(&net, &policy).unwrap();
        for x in 0..4 {
            assert_eq!(t.row(x), policy.probs());
        }
        let (mi, _) = temporal_mutual_information(&t, &StateDistribution::uniform(2)).unwrap();
        assert_eq!(mi, 0.0);
        let d = induced_past_distribution(&net, &policy).unwrap();
        assert_eq!(d.probs(), policy.probs());
    }

    #[test]
    fn xor_micro_induced_internal_pair() {
        let pair = build_gate_pair(GateKind::Xor);
        let d = induced_past_distribution(&pair.micro_net, &ExoPolicy::uniform(2)).unwrap();
        // (N, O) are bits 2 and 3.
        let mut no = [0.0; 4];
        for (s, p) in d.probs().iter().enumerate() {
            no[(s >> 2) & 3] += p;
        }
        assert_abs_diff_eq!(no[0b01], 0.25, epsilon = 1e-15); // N=1, O=0
        assert_abs_diff_eq!(no[0b11], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(no[0b10], 0.25, epsilon = 1e-15); // N=0, O=1
        assert_eq!(no[0], 0.0);
    }

    #[test]
    fn micro_circuits_compute_their_gate() {
        for kind in GateKind::ALL {
            let pair = build_gate_pair(kind);
            assert_eq!(pair.macro_net.len(), 3);
            assert_eq!(
                pair.micro_net.len(),
                match kind {
                    GateKind::And => 4,
                    _ => 5,
                }
            );
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let want = kind.apply(a, b);
                    assert_eq!(
                        pair.micro_net.settle(&[a, b], pair.micro_output).unwrap(),
                        want
                    );
                    assert_eq!(
                        pair.macro_net.settle(&[a, b], pair.macro_output).unwrap(),
                        want
                    );
                }
            }
        }
        assert_eq!(GateKind::Xor.table(), vec![0, 1, 1, 0]);
        assert_eq!(build_gate_pair(GateKind::Xor).micro_net.depth().unwrap(), 2);
    }

    #[test]
    fn rows_are_deterministic_on_internal_elements() {
        for kind in GateKind::ALL {
            let net = build_gate_pair(kind).micro_net;
            let t = network_to_tpm(&net, &ExoPolicy::uniform(2)).unwrap();
            for x in 0..t.side() {
                let internal: Vec<usize> = (0..t.side())
                    .filter(|&y| t.get(x, y) > 0.0)
                    .map(|y| y & !3)
                    .collect();
                assert!(internal.windows(2).all(|w| w[0] == w[1]));
            }
        }
    }

    #[test]
    fn invalid_networks() {
        let dangling = BoolNetwork::new(vec![Element::new("x", vec![3], vec![0, 1])], vec![]);
        assert!(matches!(dangling, Err(Error::InvalidNetwork(_))));
        let short = BoolNetwork::new(vec![Element::new("x", vec![0], vec![0])], vec![]);
        assert!(short.is_err());
        let exo_inputs = BoolNetwork::new(vec![Element::new("x", vec![0], vec![0, 1])], vec![0]);
        assert!(exo_inputs.is_err());
        let net = build_gate_pair(GateKind::And).macro_net;
        assert!(network_to_tpm(&net, &ExoPolicy::uniform(1)).is_err());
    }

    #[test]
    fn network_json_schema() {
        let s = r#"{"elements":[{"name":"A","inputs":[],"table":[]},
                     {"name":"G","inputs":[0,0],"table":[1,1,1,0]}],"exogenous":[0]}"#;
        let net: BoolNetwork = serde_json::from_str(s).unwrap();
        assert_eq!(net.len(), 2);
        let back: BoolNetwork =
            serde_json::from_str(&serde_json::to_string(&net).unwrap()).unwrap();
        assert_eq!(back, net);
        assert!(serde_json::from_str::<BoolNetwork>(
            r#"{"elements":[{"name":"G","inputs":[4],"table":[1,0]}],"exogenous":[]}"#
        )
        .is_err());
    }
}
