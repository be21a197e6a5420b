//! Node expansion: splitting one element into an equivalence class of two
//! children with identical inputs and outputs.
//!
//! The canonical child keeps the parent's index; the copy is appended as the
//! new highest element. Every update reads the canonical child, so states
//! where the two children disagree are transient and leave in one step.

use crate::discrete::{stationary_distribution, temporal_mutual_information, Tpm};
use crate::error::{Error, Result};
use crate::lattice::MAX_SOURCES;

#[derive(Debug, Clone)]
pub struct ExpansionRecord {
    pub parent: Tpm,
    pub child: Tpm,
    pub split_element: usize,
    /// `(canonical, copy)` element indices in the child system.
    pub child_indices: (usize, usize),
}

impl ExpansionRecord {
    /// Temporal MI of parent and child, each at its own stationary distribution.
    pub fn mutual_informations(&self) -> Result<(f64, f64)> {
        let (p, _) =
            temporal_mutual_information(&self.parent, &stationary_distribution(&self.parent)?)?;
        let (c, _) =
            temporal_mutual_information(&self.child, &stationary_distribution(&self.child)?)?;
        Ok((p, c))
    }

    /// Mass the child's stationary distribution puts on disagreeing states.
    pub fn disagreement_mass(&self) -> Result<f64> {
        let pi = stationary_distribution(&self.child)?;
        let (a, b) = self.child_indices;
        Ok(pi
            .probs()
            .iter()
            .enumerate()
            .filter(|(s, _)| (s >> a) & 1 != (s >> b) & 1)
            .map(|(_, p)| p)
            .sum())
    }
}

/// Splits `element` of `t` into two children that both copy the parent's
/// next value.
pub fn expand_node(t: &Tpm, element: usize) -> Result<ExpansionRecord> {
    let n = t.n_elements();
    if element >= n {
        return Err(Error::InvalidArgument(format!(
            "element {element} out of range for {n} elements"
        )));
    }
    if n + 1 > MAX_SOURCES {
        return Err(Error::InvalidArgument(format!(
            "expanding a {n}-element system would exceed {MAX_SOURCES} elements"
        )));
    }
    let parent_side = t.side();
    let side = parent_side * 2;
    let embed = |q: usize| q | (((q >> element) & 1) << n);
    let mut data = vec![0.0; side * side];
    for s in 0..side {
        let row = t.row(s & (parent_side - 1));
        for (q, &p) in row.iter().enumerate() {
            data[s * side + embed(q)] = p;
        }
    }
    Ok(ExpansionRecord {
        parent: t.clone(),
        child: Tpm::from_raw(n + 1, data),
        split_element: element,
        child_indices: (element, n),
    })
}

/// Coarse-grains an expanded system back onto the parent's elements by
/// merging the copy (the highest element) into the canonical child. Rows are
/// taken from agreeing states and next states are marginalized over the copy.
pub fn merge_children(child: &Tpm, canonical: usize) -> Result<Tpm> {
    let n_child = child.n_elements();
    if n_child < 2 || canonical >= n_child - 1 {
        return Err(Error::InvalidArgument(format!(
            "cannot merge element {canonical} in a {n_child}-element system"
        )));
    }
    let n = n_child - 1;
    let side = 1usize << n;
    let mut data = vec![0.0; side * side];
    for p in 0..side {
        let agree = p | (((p >> canonical) & 1) << n);
        for (y, &v) in child.row(agree).iter().enumerate() {
            data[p * side + (y & (side - 1))] += v;
        }
    }
    Ok(Tpm::from_raw(n, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::StateDistribution;
    use approx::assert_abs_diff_eq;

    fn sample_tpm() -> Tpm {
        let rows = (0..8)
            .map(|i| {
                let raw: Vec<f64> = (0..8).map(|j| ((i * 7 + j * 3) % 11 + 1) as f64).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / total).collect()
            })
            .collect();
        Tpm::from_rows(3, rows).unwrap()
    }

    #[test]
    fn expansion_preserves_mi() {
        let t = sample_tpm();
        for e in 0..3 {
            let rec = expand_node(&t, e).unwrap();
            assert_eq!(rec.child.side(), 16);
            let (p, c) = rec.mutual_informations().unwrap();
            assert_abs_diff_eq!(p, c, epsilon = 1e-9);
            assert!(rec.disagreement_mass().unwrap() < 1e-9);
        }
    }

    #[test]
    fn merge_recovers_parent() {
        let t = sample_tpm();
        for e in 0..3 {
            let rec = expand_node(&t, e).unwrap();
            let back = merge_children(&rec.child, e).unwrap();
            assert!(back.matrix().max_abs_diff(t.matrix()) < 1e-12);
        }
    }

    #[test]
    fn double_expansion_of_one_lineage() {
        let t = sample_tpm();
        let meso = expand_node(&t, 0).unwrap();
        let micro = expand_node(&meso.child, 0).unwrap();
        assert_eq!(micro.child.n_elements(), 5);
        let (mi_macro, _) =
            temporal_mutual_information(&t, &stationary_distribution(&t).unwrap()).unwrap();
        let (_, mi_micro) = micro.mutual_informations().unwrap();
        assert_abs_diff_eq!(mi_macro, mi_micro, epsilon = 1e-9);
        // Elements 0, 3 and 4 all carry the original element 0.
        let pi = stationary_distribution(&micro.child).unwrap();
        for (s, p) in pi.probs().iter().enumerate() {
            if *p > 0.0 {
                assert_eq!(s & 1, (s >> 3) & 1);
                assert_eq!(s & 1, (s >> 4) & 1);
            }
        }
    }

    #[test]
    fn disagreeing_states_exit_in_one_step() {
        let rec = expand_node(&sample_tpm(), 1).unwrap();
        let start = StateDistribution::point_mass(4, 0b1000).unwrap();
        let next = start.evolve(&rec.child).unwrap();
        for (s, p) in next.probs().iter().enumerate() {
            if *p > 0.0 {
                assert_eq!((s >> 1) & 1, (s >> 3) & 1);
            }
        }
    }

    #[test]
    fn expansion_limits() {
        let t = Tpm::identity(5);
        assert!(expand_node(&t, 0).is_err());
        assert!(expand_node(&Tpm::identity(2), 2).is_err());
    }
}
