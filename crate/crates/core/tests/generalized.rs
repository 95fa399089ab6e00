use superposition::basis::constant_overlap_basis;
use superposition::generalized::*;
use superposition::measures::{robustness::m_robustness, weight::m_weight};
use superposition::qstate::{random_density, random_free};

#[test]
fn singleton_blocks_match_classic_measures() {
    let basis = constant_overlap_basis(3, 0.3).unwrap();
    let projectors = block_projectors(&basis, &BlockPartition::singletons(3)).unwrap();
    for seed in 0..4 {
        let rho = random_density(3, 2, seed).unwrap();
        let w = m_weight(&rho, &basis).unwrap().value;
        let gw = m_weight_generalized(&rho, &projectors).unwrap().value;
        assert!((w - gw).abs() < 1e-3, "weight {w} vs {gw}");
        let r = m_robustness(&rho, &basis).unwrap().value;
        let gr = m_robustness_generalized(&rho, &projectors).unwrap().value;
        assert!((r - gr).abs() < 1e-3, "robustness {r} vs {gr}");
    }
}

#[test]
fn single_block_is_free_of_everything() {
    let basis = constant_overlap_basis(3, -0.2).unwrap();
    let projectors = block_projectors(&basis, &BlockPartition::trivial(3)).unwrap();
    let rho = random_density(3, 3, 11).unwrap();
    assert!(is_block_free(&rho, &projectors, 1e-9));
    assert!(m_weight_generalized(&rho, &projectors).unwrap().value.abs() < 1e-6);
    assert!(m_robustness_generalized(&rho, &projectors).unwrap().value.abs() < 1e-6);
}

#[test]
fn coarser_partition_costs_less() {
    let basis = constant_overlap_basis(4, 0.25).unwrap();
    let fine = block_projectors(&basis, &BlockPartition::singletons(4)).unwrap();
    let coarse = block_projectors(&basis, &BlockPartition::contiguous(&[2], 4).unwrap()).unwrap();
    let rho = random_density(4, 2, 5).unwrap();
    let fine_r = m_robustness_generalized(&rho, &fine).unwrap().value;
    let coarse_r = m_robustness_generalized(&rho, &coarse).unwrap().value;
    assert!(coarse_r <= fine_r + 1e-3, "{coarse_r} > {fine_r}");
}

#[test]
fn free_channels_keep_block_free_states() {
    let basis = constant_overlap_basis(4, 0.4).unwrap();
    let partition = BlockPartition::from_one_based(vec![vec![1, 3], vec![2, 4]], 4).unwrap();
    let projectors = block_projectors(&basis, &partition).unwrap();
    for seed in 0..10 {
        let rho = random_block_free_state(&projectors, seed);
        assert!(is_block_free(&rho, &projectors, 1e-8));
        let channel = random_generalized_free_channel(&projectors, seed + 100).unwrap();
        assert!(channel.is_trace_preserving());
        assert!(is_block_free(&channel.apply(&rho).unwrap(), &projectors, 1e-7), "seed {seed}");
    }
}

#[test]
fn dephasing_is_idempotent_and_free() {
    let basis = constant_overlap_basis(3, 0.5).unwrap();
    let projectors = block_projectors(&basis, &BlockPartition::contiguous(&[1], 3).unwrap()).unwrap();
    let rho = random_density(3, 3, 2).unwrap();
    let once = block_dephase(&rho, &projectors).unwrap();
    let twice = block_dephase(&once, &projectors).unwrap();
    assert!((once.matrix() - twice.matrix()).norm() < 1e-10);
    assert!(is_block_free(&once, &projectors, 1e-9));
}

#[test]
fn classic_free_states_are_block_free() {
    let basis = constant_overlap_basis(3, 0.1).unwrap();
    let projectors = block_projectors(&basis, &BlockPartition::contiguous(&[2], 3).unwrap()).unwrap();
    assert!(is_block_free(&random_free(&basis, 4), &projectors, 1e-9));
}

#[test]
fn partition_validation() {
    assert!(BlockPartition::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
    assert!(BlockPartition::new(vec![vec![0], vec![2]], 3).is_err());
    assert!(BlockPartition::from_one_based(vec![vec![0]], 1).is_err());
    let p: BlockPartition = serde_json::from_str("[[3],[1,2]]").unwrap();
    assert_eq!(p.dimension(), 3);
    assert_eq!(serde_json::to_string(&p).unwrap().replace(' ', ""), "[[3],[1,2]]");
}
