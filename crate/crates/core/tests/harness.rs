use superposition::harness::*;
use superposition::measures::{example1_closed_form, MeasureId};
use superposition::qstate::{free_state, random_free, rho_x};

#[test]
fn roof_grid_oracle_matches_closed_form() {
    for (x, mu) in [(0.3, 0.5), (-0.2, -0.25), (0.4, 0.0)] {
        let (rho, basis) = rho_x(x, mu).unwrap();
        let grid = l1_roof_grid_oracle(&rho, &basis).unwrap();
        let closed = example1_closed_form(x, mu);
        assert!((grid - closed).abs() < 1e-6, "x={x} mu={mu}: {grid} vs {closed}");
    }
}

#[test]
fn oracles_vanish_on_free_states() {
    let (_, basis) = rho_x(0.0, 0.5).unwrap();
    for seed in 0..3 {
        let rho = random_free(&basis, seed);
        for oracle in [rel_ent_grid_oracle, robustness_grid_oracle, weight_grid_oracle] {
            assert!(oracle(&rho, &basis).unwrap().abs() < 1e-3);
        }
    }
    let projector = free_state(&basis, &[0.0, 1.0]);
    assert!(weight_grid_oracle(&projector, &basis).unwrap().abs() < 1e-3);
}

#[test]
fn l1_roof_oracle_campaign_passes() {
    let config = OracleConfig::new(MeasureId::L1Roof, 0.5, 10, 17).unwrap();
    let report = run_oracle_campaign(&config).unwrap();
    assert!(report.passed(), "{}", report.to_table());
}

#[test]
fn campaign_report_round_trips() {
    let config = CampaignConfig::new(MeasureId::Robustness, BasisSpec::Constant { d: 2, mu: -0.3 }, 8, 1);
    let report = run_axiom_campaign(&config).unwrap();
    assert!(report.passed(), "{}", report.to_table());
    let back: CampaignReport = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(back, report);
    for tag in [AxiomTag::S1, AxiomTag::S2, AxiomTag::S3, AxiomTag::S4] {
        assert!(report.report(tag).is_some(), "{tag:?}");
    }
}

#[test]
fn cyclic_family_campaign() {
    let mut config = CampaignConfig::new(MeasureId::L1, BasisSpec::Constant { d: 3, mu: 0.2 }, 12, 4);
    config.family = ChannelFamily::Cyclic;
    assert!(run_axiom_campaign(&config).unwrap().passed());
}

#[test]
fn tolerance_overrides() {
    let table = ToleranceTable::from_json(r#"{"weight": 0.01}"#).unwrap();
    assert_eq!(table.get(MeasureId::Weight), 0.01);
    assert_eq!(table.get(MeasureId::L1), 1e-6);
    assert_eq!(table.get(MeasureId::Robustness), 1e-3);
    assert!(ToleranceTable::from_json(r#"{"nope": 1}"#).is_err());
}

#[test]
fn failed_checks_serialize() {
    let config = CampaignConfig::new(MeasureId::BrokenL1, BasisSpec::Constant { d: 2, mu: 0.5 }, 8, 3);
    let report = run_axiom_campaign(&config).unwrap();
    assert!(!report.passed());
    let back: CampaignReport = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(back.violation_count(), report.violation_count());
    let v: serde_json::Value =
        serde_json::from_str(r#"{"trial":0,"seed":1,"digest":"00","lhs":"nan","rhs":1.0,"slack":"inf"}"#).unwrap();
    let violation: Violation = serde_json::from_value(v).unwrap();
    assert!(violation.lhs.is_nan() && violation.slack == f64::INFINITY);
}
