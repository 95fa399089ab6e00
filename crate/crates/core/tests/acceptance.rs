//! Acceptance suite: runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::time::Instant;

use superposition::basis::{constant_overlap_basis, constant_overlap_gram, overlap_lower_bound};
use superposition::channels::{cyclic_preparation_channel, example1_channel, random_real_dual_channel};
use superposition::generalized::{
    block_projectors, is_block_free, m_robustness_generalized, m_weight_generalized, random_block_free_state,
    random_generalized_free_channel, BlockPartition,
};
use superposition::harness::{
    run_axiom_campaign, run_oracle_campaign, run_roof_dominance, run_weight_bound, AxiomTag, BasisSpec, CampaignConfig,
    OracleConfig,
};
use superposition::linalg::{self, c, real, CMat};
use superposition::measures::{
    delta_map, example1_closed_form, m_delta, m_l1_roof, m_robustness, m_weight, phi0, MeasureId, RoofOptions,
};
use superposition::qstate::{
    coefficients_of, free_state, random_density, random_real_density, rho_x, state_from_coefficients, CoefficientMatrix,
};
use superposition::rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn x_grid() -> Vec<f64> {
    (0..21).map(|i| -0.45 + 0.045 * i as f64).collect()
}

const MUS: [f64; 5] = [-0.5, -0.25, 0.0, 0.25, 0.5];

fn criterion_1() -> Outcome {
    let (mut worst_value, mut worst_weight, mut bad) = (0.0f64, 0.0f64, 0);
    for mu in MUS {
        for x in x_grid() {
            let (rho, basis) = rho_x(x, mu).unwrap();
            let r = m_l1_roof(&rho, &basis, &RoofOptions::default()).unwrap();
            let gap = (r.value - example1_closed_form(x, mu)).abs();
            let probs = r.ensemble().unwrap().probabilities();
            let weight_gap = if probs.len() == 2 {
                probs.iter().map(|p| (p - 0.5).abs()).fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            worst_value = worst_value.max(gap);
            worst_weight = worst_weight.max(weight_gap);
            if gap > 1e-3 || weight_gap > 1e-3 {
                bad += 1;
            }
        }
    }
    outcome(
        bad == 0,
        format!("105 points, max |roof - closed form| {worst_value:.3e}, max |p - 1/2| {worst_weight:.3e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for mu in MUS {
        for x in x_grid() {
            let (rho, basis) = rho_x(x, mu).unwrap();
            let (phi, _) = phi0(x, mu).unwrap();
            let image = example1_channel(&basis).unwrap().apply(&phi.density()).unwrap();
            worst = worst.max(linalg::max_abs_diff(image.matrix(), rho.matrix()));
        }
    }
    outcome(worst < 1e-9, format!("max matrix error {worst:.3e}"))
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    for d in 2..=5usize {
        let lower = overlap_lower_bound(d);
        for mu in [lower + 1e-3, 1.0 - 1e-3] {
            if constant_overlap_basis(d, mu).is_err() {
                failures.push(format!("d={d} mu={mu} rejected"));
            }
        }
        let det = linalg::det_real(&constant_overlap_gram(d, lower));
        if det > 1e-9 {
            failures.push(format!("d={d} det at boundary {det:e}"));
        }
    }
    let detail = if failures.is_empty() { "d = 2..5 ok".to_string() } else { failures.join("; ") };
    outcome(failures.is_empty(), detail)
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for d in 2..=5usize {
        for mu in [0.0, 0.3, -0.2] {
            let basis = constant_overlap_basis(d, mu).unwrap();
            let mut p0 = vec![0.0; d];
            p0[0] = 1.0;
            let c1 = free_state(&basis, &p0);
            for s in 0..50u64 {
                let mut g = rng::rng_from_seed(rng::derive_seed(d as u64 * 1000 + (mu * 10.0 + 10.0) as u64, s));
                let p = rng::dirichlet_uniform(d, &mut g);
                let out = cyclic_preparation_channel(&basis, &p).unwrap().apply(&c1).unwrap();
                worst = worst.max(linalg::max_abs_diff(out.matrix(), free_state(&basis, &p).matrix()));
                cases += 1;
            }
        }
    }
    outcome(worst < 1e-9, format!("{cases} cases, max error {worst:.3e}"))
}

fn criterion_5() -> Outcome {
    let measures = [
        MeasureId::L1,
        MeasureId::RelEnt,
        MeasureId::Robustness,
        MeasureId::Weight,
        MeasureId::Delta,
        MeasureId::L1Roof,
    ];
    let jobs: Vec<(MeasureId, usize)> = measures.iter().flat_map(|&m| [(m, 2usize), (m, 3)]).collect();
    let reports: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(m, d)| {
                scope.spawn(move || {
                    let config = CampaignConfig::new(m, BasisSpec::Constant { d, mu: 0.5 }, 200, 2024);
                    run_axiom_campaign(&config).unwrap()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut lines = Vec::new();
    let mut pass = true;
    for (&(m, d), report) in jobs.iter().zip(&reports) {
        if !report.passed() {
            pass = false;
            eprintln!("{}", report.to_table());
        }
        lines.push(format!("{m}/d{d}:{}", report.violation_count()));
    }
    let control = CampaignConfig::new(MeasureId::BrokenL1, BasisSpec::Constant { d: 2, mu: 0.5 }, 200, 2024);
    let control_fails = !run_axiom_campaign(&control).unwrap().report(AxiomTag::S1).unwrap().passed();
    pass &= control_fails;
    outcome(pass, format!("violations {}; negative control fails S1: {control_fails}", lines.join(" ")))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for d in [2usize, 3] {
        let report = run_roof_dominance(BasisSpec::Constant { d, mu: 0.5 }, 200, 6, &RoofOptions::default()).unwrap();
        pass &= report.passed();
        let r = &report.reports[0];
        parts.push(format!("d={d} violations {} max(l1 - roof) {:.3e}", r.violations.len(), r.max_slack));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for m in [MeasureId::L1, MeasureId::RelEnt] {
        let (report, c_d) = run_weight_bound(m, BasisSpec::Constant { d: 2, mu: 0.5 }, 100, 7).unwrap();
        pass &= report.passed();
        let r = &report.reports[0];
        parts.push(format!("{m}: C_d {c_d:.6} violations {} max slack {:.3e}", r.violations.len(), r.max_slack));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for m in [MeasureId::RelEnt, MeasureId::Robustness, MeasureId::Weight] {
        let config = OracleConfig::new(m, 0.5, 50, 8).unwrap();
        let report = run_oracle_campaign(&config).unwrap();
        pass &= report.passed();
        parts.push(format!("{m} max gap {:.3e}", report.reports[0].max_slack));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_9() -> Outcome {
    let mut real_max = 0.0f64;
    let mut complex_min = f64::INFINITY;
    let mut commutation = 0.0f64;
    for (d, mu) in [(2usize, 0.5), (3, 0.5), (3, -0.3)] {
        let basis = constant_overlap_basis(d, mu).unwrap();
        for s in 0..20u64 {
            // Real coefficients: a real density matrix over a real basis.
            let rho = random_real_density(d, 1 + (s as usize) % d, s).unwrap();
            real_max = real_max.max(m_delta(&rho, &basis).unwrap().value);
            // Complex coefficients: mix in a state with a purely imaginary coherence.
            let y = 0.1 + 0.35 * (s as f64) / 19.0;
            let mut r = CMat::zeros(d, d);
            r[(0, 0)] = real(0.5);
            r[(1, 1)] = real(0.5);
            r[(0, 1)] = c(0.0, y);
            r[(1, 0)] = c(0.0, -y);
            let imag = state_from_coefficients(&CoefficientMatrix::from_entries(r), &basis).unwrap();
            let state = rho.mix(&imag, 0.5);
            let im =
                coefficients_of(&state, &basis).unwrap().into_entries().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            assert!(im > 1e-3);
            complex_min = complex_min.min(m_delta(&state, &basis).unwrap().value);
        }
        for s in 0..50u64 {
            let channel = random_real_dual_channel(&basis, rng::derive_seed(99, s)).unwrap();
            let rho = random_density(d, d, rng::derive_seed(98, s)).unwrap();
            let dr = delta_map(&rho, &basis).unwrap();
            for (n, p, branch) in channel.selective_with_index(&rho).unwrap() {
                let k = &channel.operators()[n];
                let lhs = delta_map(&branch, &basis).unwrap().matrix() * real(p);
                let rhs: CMat = k * dr.matrix() * k.adjoint();
                commutation = commutation.max(linalg::max_abs_diff(&lhs, &rhs));
            }
        }
    }
    let pass = real_max <= 1e-6 && complex_min > 1e-6 && commutation <= 1e-8;
    outcome(
        pass,
        format!(
            "real fixtures max {real_max:.3e}, complex fixtures min {complex_min:.3e}, commutation gap {commutation:.3e}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut agree = 0.0f64;
    let mut one_block = 0.0f64;
    let mut preserved = 0;
    for d in [2usize, 3] {
        let basis = constant_overlap_basis(d, 0.5).unwrap();
        let singletons = block_projectors(&basis, &BlockPartition::singletons(d)).unwrap();
        let trivial = block_projectors(&basis, &BlockPartition::trivial(d)).unwrap();
        for s in 0..20u64 {
            let rho = random_density(d, 1 + (s as usize) % d, 1000 + s).unwrap();
            let gw = m_weight_generalized(&rho, &singletons).unwrap().value;
            let gr = m_robustness_generalized(&rho, &singletons).unwrap().value;
            agree = agree.max((gw - m_weight(&rho, &basis).unwrap().value).abs());
            agree = agree.max((gr - m_robustness(&rho, &basis).unwrap().value).abs());
            one_block = one_block.max(m_weight_generalized(&rho, &trivial).unwrap().value);
            one_block = one_block.max(m_robustness_generalized(&rho, &trivial).unwrap().value);
        }
    }
    let basis = constant_overlap_basis(4, 0.3).unwrap();
    let blocks = block_projectors(&basis, &BlockPartition::contiguous(&[2], 4).unwrap()).unwrap();
    for s in 0..50u64 {
        let channel = random_generalized_free_channel(&blocks, s).unwrap();
        let out = channel.apply(&random_block_free_state(&blocks, 5000 + s)).unwrap();
        preserved += usize::from(is_block_free(&out, &blocks, 1e-8));
    }
    let pass = agree <= 1e-3 && one_block <= 1e-6 && preserved == 50;
    outcome(
        pass,
        format!("singleton gap {agree:.3e}, one-block max {one_block:.3e}, block-free preserved {preserved}/50"),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("example-1 roof closed form and balanced certificate", criterion_1),
        ("example-1 channel identity", criterion_2),
        ("gram threshold", criterion_3),
        ("cyclic preparation", criterion_4),
        ("axiom suites", criterion_5),
        ("roof dominates l1", criterion_6),
        ("weight upper bound", criterion_7),
        ("grid oracle equivalence", criterion_8),
        ("real-basis dephasing", criterion_9),
        ("block generalization", criterion_10),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:2} {status} [{:.1}s] {name}: {}", start.elapsed().as_secs_f64(), o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
