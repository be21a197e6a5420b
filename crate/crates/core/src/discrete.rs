//! Exact discrete probability over joint states of binary elements.
//!
//! Joint states are integers in which element `i` contributes bit `i`
//! (little-endian). Every quantity is in bits.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution or a matrix row.
pub const NORM_TOL: f64 = 1e-12;

/// Probabilities below this are treated as exact zeros when detecting
/// support and recurrent classes.
pub const SUPPORT_EPS: f64 = 1e-15;

/// Residual bound for a stationary distribution, `max |πT − π|`.
pub const STATIONARY_TOL: f64 = 1e-10;

fn check_probabilities(probs: &[f64], what: &str) -> Result<()> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{what} has an invalid entry {p}"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {total}, not 1"
        )));
    }
    Ok(())
}

/// `-Σ p log2 p` with `0 log 0 = 0`. No validation.
pub(crate) fn entropy_bits(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Shannon entropy in bits of a probability vector.
pub fn entropy_of(probs: &[f64]) -> Result<f64> {
    check_probabilities(probs, "distribution")?;
    Ok(entropy_bits(probs))
}

/// Shannon entropy in bits.
pub fn entropy(d: &StateDistribution) -> f64 {
    entropy_bits(&d.probs)
}

/// A distribution over the `2^n` joint states of `n` binary elements.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution {
    probs: Vec<f64>,
    n_elements: usize,
}

impl StateDistribution {
    pub fn new(n_elements: usize, probs: Vec<f64>) -> Result<Self> {
        let expected = 1usize << n_elements;
        if probs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: probs.len(),
            });
        }
        check_probabilities(&probs, "state distribution")?;
        Ok(Self { probs, n_elements })
    }

    pub fn uniform(n_elements: usize) -> Self {
        let side = 1usize << n_elements;
        Self {
            probs: vec![1.0 / side as f64; side],
            n_elements,
        }
    }

    pub fn point_mass(n_elements: usize, state: usize) -> Result<Self> {
        let side = 1usize << n_elements;
        if state >= side {
            return Err(Error::InvalidArgument(format!(
                "state {state} out of range for {n_elements} elements"
            )));
        }
        let mut probs = vec![0.0; side];
        probs[state] = 1.0;
        Ok(Self { probs, n_elements })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// One step of the chain: the row vector `p · T`.
    pub fn evolve(&self, t: &Tpm) -> Result<StateDistribution> {
        if t.side() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: t.side(),
                got: self.len(),
            });
        }
        let mut next = t.matrix().left_multiply(&self.probs);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|p| *p /= total);
        Ok(Self {
            probs: next,
            n_elements: self.n_elements,
        })
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// A square row-stochastic matrix of any side.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    side: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let side = rows.len();
        if side == 0 {
            return Err(Error::InvalidMatrix("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(side * side);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != side {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {side}",
                    row.len()
                )));
            }
            check_probabilities(&row, &format!("row {i}"))
                .map_err(|e| Error::InvalidMatrix(e.to_string()))?;
            data.extend(row);
        }
        Ok(Self { side, data })
    }

    /// Row-major constructor that skips validation; callers guarantee the rows
    /// are stochastic.
    pub(crate) fn from_raw(side: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), side * side);
        Self { side, data }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.side..(i + 1) * self.side]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.side + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.side)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// `p · M` for a row vector `p`.
    pub fn left_multiply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.side];
        for (pi, row) in p.iter().zip(self.rows()) {
            if *pi == 0.0 {
                continue;
            }
            for (o, m) in out.iter_mut().zip(row) {
                *o += pi * m;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &StochasticMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct TpmFile {
    n_elements: usize,
    rows: Vec<Vec<f64>>,
}

/// Transition probability matrix over the joint states of `n` binary elements.
///
/// Row `x` is the distribution of the next joint state given current state `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TpmFile", into = "TpmFile")]
pub struct Tpm {
    n_elements: usize,
    matrix: StochasticMatrix,
}

impl TryFrom<TpmFile> for Tpm {
    type Error = Error;

    fn try_from(f: TpmFile) -> Result<Self> {
        Tpm::from_rows(f.n_elements, f.rows)
    }
}

impl From<Tpm> for TpmFile {
    fn from(t: Tpm) -> Self {
        TpmFile {
            n_elements: t.n_elements,
            rows: t.matrix.to_rows(),
        }
    }
}

impl Tpm {
    pub fn from_rows(n_elements: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let matrix = StochasticMatrix::from_rows(rows)?;
        Self::from_matrix(n_elements, matrix)
    }

    pub fn from_matrix(n_elements: usize, matrix: StochasticMatrix) -> Result<Self> {
        let expected = 1usize
            .checked_shl(n_elements as u32)
            .ok_or_else(|| Error::InvalidMatrix(format!("{n_elements} elements is too many")))?;
        if matrix.side() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: matrix.side(),
            });
        }
        Ok(Self { n_elements, matrix })
    }

    pub(crate) fn from_raw(n_elements: usize, data: Vec<f64>) -> Self {
        Self {
            n_elements,
            matrix: StochasticMatrix::from_raw(1 << n_elements, data),
        }
    }

    /// A deterministic TPM sending state `x` to `next(x)`.
    pub fn deterministic(n_elements: usize, next: impl Fn(usize) -> usize) -> Result<Self> {
        let side = 1usize << n_elements;
        let mut data = vec![0.0; side * side];
        for x in 0..side {
            let y = next(x);
            if y >= side {
                return Err(Error::InvalidArgument(format!(
                    "state {x} maps to out-of-range state {y}"
                )));
            }
            data[x * side + y] = 1.0;
        }
        Ok(Self::from_raw(n_elements, data))
    }

    pub fn identity(n_elements: usize) -> Self {
        Self::deterministic(n_elements, |x| x).expect("identity is in range")
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn side(&self) -> usize {
        self.matrix.side()
    }

    pub fn matrix(&self) -> &StochasticMatrix {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }
}

/// `P(x, y)` with its marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    n_x: usize,
    n_y: usize,
    p_xy: Vec<f64>,
    p_x: Vec<f64>,
    p_y: Vec<f64>,
}

impl JointDistribution {
    /// Builds a joint from a row-major `n_x × n_y` table.
    pub fn new(n_x: usize, n_y: usize, p_xy: Vec<f64>) -> Result<Self> {
        if p_xy.len() != n_x * n_y {
            return Err(Error::DimensionMismatch {
                expected: n_x * n_y,
                got: p_xy.len(),
            });
        }
        check_probabilities(&p_xy, "joint distribution")?;
        let mut p_x = vec![0.0; n_x];
        let mut p_y = vec![0.0; n_y];
        for x in 0..n_x {
            for y in 0..n_y {
                let p = p_xy[x * n_y + y];
                p_x[x] += p;
                p_y[y] += p;
            }
        }
        Ok(Self {
            n_x,
            n_y,
            p_xy,
            p_x,
            p_y,
        })
    }

    /// `P(x, y) = input(x) · T(x → y)`; `P(y)` is the product `input · T`.
    pub fn from_tpm(t: &Tpm, input: &StateDistribution) -> Result<Self> {
        let side = t.side();
        if input.len() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                got: input.len(),
            });
        }
        let mut p_xy = vec![0.0; side * side];
        for (x, &px) in input.probs().iter().enumerate() {
            for (y, &txy) in t.row(x).iter().enumerate() {
                p_xy[x * side + y] = px * txy;
            }
        }
        Ok(Self {
            n_x: side,
            n_y: side,
            p_xy,
            p_x: input.probs().to_vec(),
            p_y: t.matrix().left_multiply(input.probs()),
        })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p_xy[x * self.n_y + y]
    }

    pub fn table(&self) -> &[f64] {
        &self.p_xy
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn p_y(&self) -> &[f64] {
        &self.p_y
    }

    pub fn transposed(&self) -> JointDistribution {
        let mut p = vec![0.0; self.p_xy.len()];
        for x in 0..self.n_x {
            for y in 0..self.n_y {
                p[y * self.n_x + x] = self.get(x, y);
            }
        }
        JointDistribution {
            n_x: self.n_y,
            n_y: self.n_x,
            p_xy: p,
            p_x: self.p_y.clone(),
            p_y: self.p_x.clone(),
        }
    }

    pub fn mutual_information(&self) -> f64 {
        let mut mi = 0.0;
        for x in 0..self.n_x {
            let px = self.p_x[x];
            if px <= 0.0 {
                continue;
            }
            for y in 0..self.n_y {
                let pxy = self.get(x, y);
                if pxy > 0.0 {
                    mi += pxy * (pxy / (px * self.p_y[y])).log2();
                }
            }
        }
        mi.max(0.0)
    }
}

/// Mutual information between the joint past (distributed as `input`) and
/// the joint future of the system, together with the joint it was computed from.
pub fn temporal_mutual_information(
    t: &Tpm,
    input: &StateDistribution,
) -> Result<(f64, JointDistribution)> {
    let joint = JointDistribution::from_tpm(t, input)?;
    Ok((joint.mutual_information(), joint))
}

/// Closed communicating classes of the transition graph, each sorted by
/// state index.
pub fn recurrent_classes(m: &StochasticMatrix) -> Vec<Vec<usize>> {
    let side = m.side();
    let mut graph = DiGraph::<(), ()>::with_capacity(side, side * 2);
    let nodes: Vec<_> = (0..side).map(|_| graph.add_node(())).collect();
    for i in 0..side {
        for (j, &p) in m.row(i).iter().enumerate() {
            if p > SUPPORT_EPS {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .filter(|class| {
            let mut member = vec![false; side];
            class.iter().for_each(|&s| member[s] = true);
            class.iter().all(|&i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .all(|(j, &p)| p <= SUPPORT_EPS || member[j])
            })
        })
        .collect();
    classes.sort_by_key(|c| c[0]);
    classes
}

fn stationary_residual(m: &StochasticMatrix, pi: &[f64]) -> f64 {
    m.left_multiply(pi)
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Exact solve of `π T_C = π, Σπ = 1` restricted to one closed class.
fn solve_on_class(m: &StochasticMatrix, class: &[usize]) -> Option<Vec<f64>> {
    let k = class.len();
    let mut a = DMatrix::<f64>::zeros(k, k);
    for (r, &j) in class.iter().enumerate() {
        for (c, &i) in class.iter().enumerate() {
            a[(r, c)] = m.get(i, j) - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..k {
        a[(k - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k);
    b[k - 1] = 1.0;
    let x = a.lu().solve(&b)?;
    let mut pi = vec![0.0; m.side()];
    for (r, &i) in class.iter().enumerate() {
        pi[i] = x[r].max(0.0);
    }
    let total: f64 = pi.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return None;
    }
    pi.iter_mut().for_each(|p| *p /= total);
    Some(pi)
}

/// Lazy power iteration `π ← π (T + I) / 2`, which converges on periodic
/// chains too.
fn power_iterate(m: &StochasticMatrix, mut pi: Vec<f64>, max_iter: usize) -> (Vec<f64>, f64) {
    let mut residual = stationary_residual(m, &pi);
    for _ in 0..max_iter {
        if residual < STATIONARY_TOL * 1e-2 {
            break;
        }
        let next = m.left_multiply(&pi);
        pi.iter_mut()
            .zip(&next)
            .for_each(|(p, n)| *p = 0.5 * (*p + n));
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        residual = stationary_residual(m, &pi);
    }
    (pi, residual)
}

/// Stationary distribution supported on the largest recurrent class of a
/// square stochastic matrix. Ties go to the class holding the lowest state.
pub fn stationary_of(m: &StochasticMatrix) -> Result<Vec<f64>> {
    let classes = recurrent_classes(m);
    let chosen = classes
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .ok_or_else(|| Error::Internal("no recurrent class found".into()))?;

    let start = match solve_on_class(m, chosen) {
        Some(pi) if stationary_residual(m, &pi) < STATIONARY_TOL => return Ok(pi),
        Some(pi) => pi,
        None => {
            let mut pi = vec![0.0; m.side()];
            chosen
                .iter()
                .for_each(|&i| pi[i] = 1.0 / chosen.len() as f64);
            pi
        }
    };
    let (pi, residual) = power_iterate(m, start, 200_000);
    if residual < STATIONARY_TOL {
        Ok(pi)
    } else {
        Err(Error::Convergence { residual })
    }
}

/// Stationary distribution of a TPM, choosing the largest attractor.
pub fn stationary_distribution(t: &Tpm) -> Result<StateDistribution> {
    let probs = stationary_of(t.matrix())?;
    Ok(StateDistribution {
        probs,
        n_elements: t.n_elements(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy_of(&[0.5, 0.5]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(entropy_of(&[1.0, 0.0]).unwrap(), 0.0);
        // -(0.25 log2 0.25 + 0.75 log2 0.75)
        assert_abs_diff_eq!(
            entropy_of(&[0.25, 0.75]).unwrap(),
            0.811_278_124_459_132_8,
            epsilon = 1e-12
        );
    }

    #[test]
    fn entropy_rejects_unnormalized() {
        assert!(matches!(
            entropy_of(&[0.5, 0.6]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(entropy_of(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(StateDistribution::new(1, vec![0.5, 0.5]).is_ok());
        assert!(matches!(
            StateDistribution::new(2, vec![0.5, 0.5]),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 2
            })
        ));
        assert!(StateDistribution::new(1, vec![0.5, 0.5 + 1e-9]).is_err());
    }

    #[test]
    fn tpm_validation() {
        assert!(Tpm::from_rows(1, vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        // not a power of two
        assert!(Tpm::from_rows(
            1,
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0]
            ]
        )
        .is_err());
        assert!(matches!(
            Tpm::from_rows(1, vec![vec![0.5, 0.4], vec![1.0, 0.0]]),
            Err(Error::InvalidMatrix(_))
        ));
        assert!(Tpm::from_rows(1, vec![vec![1.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn stationary_two_cycle() {
        let t = Tpm::from_rows(1, vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let pi = stationary_distribution(&t).unwrap();
        assert_abs_diff_eq!(pi.probs()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.probs()[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn stationary_identity_tie_goes_to_lowest_state() {
        let pi = stationary_distribution(&Tpm::identity(1)).unwrap();
        assert_eq!(pi.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn stationary_prefers_largest_attractor() {
        // {0} fixed point; {2,3} a 2-cycle; 1 transient into 0.
        let t = Tpm::deterministic(2, |x| match x {
            0 | 1 => 0,
            2 => 3,
            _ => 2,
        })
        .unwrap();
        let pi = stationary_distribution(&t).unwrap();
        assert_eq!(pi.probs(), &[0.0, 0.0, 0.5, 0.5]);
        assert_eq!(recurrent_classes(t.matrix()), vec![vec![0], vec![2, 3]]);
    }

    #[test]
    fn stationary_ignores_float_dust() {
        let t = Tpm::from_rows(1, vec![vec![1.0 - 1e-16, 1e-16], vec![0.0, 1.0]]).unwrap();
        assert_eq!(recurrent_classes(t.matrix()), vec![vec![0], vec![1]]);
    }

    #[test]
    fn mi_of_permutation_is_log_n() {
        let t = Tpm::deterministic(2, |x| (x + 1) % 4).unwrap();
        let (mi, joint) = temporal_mutual_information(&t, &StateDistribution::uniform(2)).unwrap();
        assert_abs_diff_eq!(mi, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(joint.transposed().mutual_information(), mi, epsilon = 1e-12);
    }

    #[test]
    fn mi_is_zero_on_point_attractor() {
        let t = Tpm::deterministic(2, |_| 3).unwrap();
        let pi = stationary_distribution(&t).unwrap();
        assert_eq!(pi.probs(), &[0.0, 0.0, 0.0, 1.0]);
        let (mi, _) = temporal_mutual_information(&t, &pi).unwrap();
        assert_eq!(mi, 0.0);
    }

    #[test]
    fn mi_dimension_mismatch() {
        let t = Tpm::identity(2);
        assert!(matches!(
            temporal_mutual_information(&t, &StateDistribution::uniform(1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tpm_json_round_trip_is_exact() {
        let rows = vec![
            vec![0.1, 0.2, 0.3, 0.4],
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.7, 0.0, 0.3, 0.0],
        ];
        let t = Tpm::from_rows(2, rows).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.starts_with("{\"n_elements\":2,\"rows\":"));
        let back: Tpm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(
            serde_json::from_str::<Tpm>(r#"{"n_elements":1,"rows":[[0.5,0.4],[1,0]]}"#).is_err()
        );
    }
}
