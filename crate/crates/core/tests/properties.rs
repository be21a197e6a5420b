use infoconv::{
    coarse_grain_tpm, decompose, effective_information, entropy_of, expand_node, merge_children,
    spectrum_and_bias, stationary_distribution, temporal_mutual_information, temporal_pid,
    JointDistribution, PiLattice, SourcesTarget, StateDistribution, StatePartition,
    StochasticMatrix, Tpm,
};
use proptest::prelude::*;

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Distribution over `len` outcomes, with some exact zeros.
fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.01f64..1.0], len)
        .prop_filter("needs mass", |w| w.iter().sum::<f64>() > 0.0)
        .prop_map(normalized)
}

fn rows(side: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(distribution(side), side)
}

fn tpm(n: usize) -> impl Strategy<Value = Tpm> {
    rows(1 << n).prop_map(move |r| Tpm::from_rows(n, r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mutual_information_bounds_and_symmetry(p in distribution(12)) {
        let j = JointDistribution::new(3, 4, p).unwrap();
        let mi = j.mutual_information();
        let hx = entropy_of(j.p_x()).unwrap();
        let hy = entropy_of(j.p_y()).unwrap();
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= hx.min(hy) + 1e-12);
        prop_assert!((mi - j.transposed().mutual_information()).abs() < 1e-12);
    }

    #[test]
    fn atoms_sum_to_mi_and_invert_redundancy(n in 2usize..=3, seed_p in distribution(32)) {
        let side = 1usize << n;
        let p = normalized(seed_p[..side * 4].iter().map(|v| v + 1e-3).collect());
        let st = SourcesTarget::new(vec![2; n], 4, p).unwrap();
        let r = decompose(&st).unwrap();
        let l = r.lattice();
        let total: f64 = r.atoms().iter().sum();
        prop_assert!((total - r.total_mi()).abs() < 1e-9);
        prop_assert!(r.atoms().iter().all(|&a| a >= -1e-9));
        for i in 0..l.len() {
            let below: f64 = (0..l.len()).filter(|&b| l.precedes(b, i)).map(|b| r.atoms()[b]).sum();
            prop_assert!((below - r.redundancy()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn synergy_bias_is_a_proportion(t in tpm(3)) {
        let pid = temporal_pid(&t, &StateDistribution::uniform(3)).unwrap();
        if let Ok(s) = spectrum_and_bias(&pid) {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&s.b_syn));
            prop_assert!((s.layer_mass.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!((s.b_syn + s.b_red - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ei_splits_into_determinism_and_degeneracy(r in rows(8)) {
        let m = StochasticMatrix::from_rows(r.clone()).unwrap();
        let report = effective_information(&m);
        prop_assert!((report.ei - (report.determinism - report.degeneracy)).abs() < 1e-12);
        prop_assert!(report.ei >= -1e-12 && report.ei <= report.log_n + 1e-12);
        let t = Tpm::from_rows(3, r).unwrap();
        let (mi, _) = temporal_mutual_information(&t, &StateDistribution::uniform(3)).unwrap();
        prop_assert!((report.ei - mi).abs() < 1e-12);
    }

    #[test]
    fn coarse_graining_yields_stochastic_matrix(r in rows(6), labels in prop::collection::vec(0usize..3, 6)) {
        // relabel to a surjection onto 0..k
        let mut seen = Vec::new();
        let mapping: Vec<usize> = labels
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(i) => i,
                None => { seen.push(*l); seen.len() - 1 }
            })
            .collect();
        let p = StatePartition::new(mapping).unwrap();
        let m = StochasticMatrix::from_rows(r).unwrap();
        let c = coarse_grain_tpm(&m, &p).unwrap();
        prop_assert_eq!(c.side(), p.n_macro());
        for row in c.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn doubly_stochastic_chains_have_uniform_stationary(
        weights in prop::collection::vec(0.05f64..1.0, 3),
        shifts in prop::collection::vec(1usize..8, 3),
    ) {
        // mixture of cyclic shifts, irreducible because shift 1 is included
        let w = normalized(weights);
        let mut rows = vec![vec![0.0; 8]; 8];
        for (x, row) in rows.iter_mut().enumerate() {
            row[(x + 1) % 8] += w[0];
            row[(x + shifts[1]) % 8] += w[1];
            row[(x + shifts[2]) % 8] += w[2];
        }
        let pi = stationary_distribution(&Tpm::from_rows(3, rows).unwrap()).unwrap();
        for &p in pi.probs() {
            prop_assert!((p - 0.125).abs() < 1e-10);
        }
    }

    #[test]
    fn stationary_is_fixed_point(t in tpm(3)) {
        let pi = stationary_distribution(&t).unwrap();
        let next = pi.evolve(&t).unwrap();
        for (a, b) in pi.probs().iter().zip(next.probs()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn expansion_keeps_mi_and_merges_back(t in tpm(3), e in 0usize..3) {
        let rec = expand_node(&t, e).unwrap();
        let (parent, child) = rec.mutual_informations().unwrap();
        prop_assert!((parent - child).abs() < 1e-9);
        prop_assert!(rec.disagreement_mass().unwrap() < 1e-12);
        let back = merge_children(&rec.child, e).unwrap();
        prop_assert!(back.matrix().max_abs_diff(t.matrix()) < 1e-12);
    }

    #[test]
    fn ranks_increase_along_the_order(n in 1usize..=4, a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let l = PiLattice::shared(n).unwrap();
        let (i, j) = (a.index(l.len()), b.index(l.len()));
        if i != j && l.precedes(i, j) {
            prop_assert!(l.rank(i) < l.rank(j));
        }
        prop_assert!(l.precedes(l.bottom(), i) && l.precedes(i, l.top()));
    }
}
