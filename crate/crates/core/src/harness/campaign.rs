use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::basis::{constant_overlap_basis, SuperpositionBasis};
use crate::channels::{cyclic_preparation_channel, random_free_channel, random_real_dual_channel, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat, CVec};
use crate::measures::max_value::{max_measure_value, MaxOptions};
use crate::measures::{m_l1, m_l1_roof, m_weight, MeasureId, MeasureResult, RoofOptions};
use crate::qstate::{
    embedded_rho_x, free_state, random_density, random_free, state_from_coefficients, CoefficientMatrix, DensityMatrix,
    Ensemble, PureState, MIN_MEMBER_PROBABILITY,
};
use crate::rng;

use super::{digest, AxiomReport, AxiomTag, CampaignReport, ToleranceTable};

/// Resource states must score strictly above this.
const RESOURCE_FLOOR: f64 = 1e-4;
const C2_TOL: f64 = 1e-6;
const C4_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisSpec {
    Constant { d: usize, mu: f64 },
}

impl BasisSpec {
    pub fn build(&self) -> Result<SuperpositionBasis> {
        match *self {
            BasisSpec::Constant { d, mu } => constant_overlap_basis(d, mu),
        }
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisSpec::Constant { d, mu } => write!(f, "constant overlap d={d} mu={mu}"),
        }
    }
}

/// Channel families sampled for S2/S3. All are free by construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    /// Compositions and mixtures of Gram-preserving relabellings, cyclic
    /// preparations and measure-and-prepare channels.
    Free,
    /// Real channels written over the dual basis (commute with Δ).
    RealDual,
    /// Cyclic preparations with random weights.
    Cyclic,
}

impl ChannelFamily {
    pub const ALL: [ChannelFamily; 3] = [ChannelFamily::Free, ChannelFamily::RealDual, ChannelFamily::Cyclic];

    pub fn name(self) -> &'static str {
        match self {
            ChannelFamily::Free => "free",
            ChannelFamily::RealDual => "real_dual",
            ChannelFamily::Cyclic => "cyclic",
        }
    }

    /// Δ-based measures are tested against real dual-basis channels.
    pub fn default_for(measure: MeasureId) -> Self {
        if measure.requires_real_basis() {
            ChannelFamily::RealDual
        } else {
            ChannelFamily::Free
        }
    }

    pub fn sample(self, basis: &SuperpositionBasis, seed: u64) -> Result<KrausChannel> {
        match self {
            ChannelFamily::Free => random_free_channel(basis, seed),
            ChannelFamily::RealDual => random_real_dual_channel(basis, seed),
            ChannelFamily::Cyclic => {
                let mut g = rng::rng_from_seed(seed);
                cyclic_preparation_channel(basis, &rng::dirichlet_uniform(basis.dimension(), &mut g))
            }
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| Error::UnknownChannelFamily(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub measure: MeasureId,
    pub basis: BasisSpec,
    pub family: ChannelFamily,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Search settings for roof measures; the seed is replaced per trial.
    pub roof: RoofOptions,
}

impl CampaignConfig {
    /// Default family and tolerance for the measure, 8 roof restarts.
    pub fn new(measure: MeasureId, basis: BasisSpec, trials: usize, seed: u64) -> Self {
        Self {
            measure,
            basis,
            family: ChannelFamily::default_for(measure),
            trials,
            seed,
            tolerance: ToleranceTable::default().get(measure),
            roof: RoofOptions::with_restarts(8),
        }
    }

    fn describe(&self) -> String {
        format!(
            "{}, family {}, trials {}, seed {}, roof restarts {}",
            self.basis, self.family, self.trials, self.seed, self.roof.restarts
        )
    }
}

struct Subject<'a> {
    measure: MeasureId,
    basis: &'a SuperpositionBasis,
    roof: &'a RoofOptions,
}

impl Subject<'_> {
    fn eval(&self, rho: &DensityMatrix, seed: u64, warm: Option<Ensemble>) -> Result<MeasureResult> {
        let mut opts = self.roof.clone().with_seed(seed);
        opts.warm_starts.extend(warm);
        self.measure.evaluate(rho, self.basis, &opts)
    }

    fn value(&self, rho: &DensityMatrix, seed: u64) -> Result<f64> {
        Ok(self.eval(rho, seed, None)?.value)
    }

    /// Pushes a decomposition through the Kraus operators: returns the
    /// per-outcome sums `Σ_m p_m ‖K_nφ_m‖² M(K_nφ_m/‖K_nφ_m‖)` and the pushed
    /// ensemble of `Λ(ρ)`.
    fn push(&self, ensemble: &Ensemble, channel: &KrausChannel) -> Result<(Vec<f64>, Ensemble)> {
        let mut totals = Vec::with_capacity(channel.operators().len());
        let mut vectors: Vec<CVec> = Vec::new();
        for k in channel.operators() {
            let mut total = 0.0;
            for m in &ensemble.members {
                let w = k * m.state.vector() * real(m.p.sqrt());
                let q = w.norm_squared();
                if q < MIN_MEMBER_PROBABILITY {
                    continue;
                }
                let phi = PureState::normalized(w.clone())?;
                total += q * self.measure.pure_value(&phi, self.basis)?;
                vectors.push(w);
            }
            totals.push(total);
        }
        Ok((totals, Ensemble::from_weighted_vectors(vectors)))
    }
}

fn resource_state(measure: MeasureId, basis: &SuperpositionBasis, g: &mut rng::Rng) -> Result<DensityMatrix> {
    let magnitude: f64 = g.random_range(0.1..=0.45);
    let sign = if g.random::<bool>() { 1.0 } else { -1.0 };
    if measure.requires_real_basis() {
        // Purely imaginary coherence between the first two basis vectors.
        let d = basis.dimension();
        let mut r = CMat::zeros(d, d);
        r[(0, 0)] = real(0.5);
        r[(1, 1)] = real(0.5);
        r[(0, 1)] = linalg::c(0.0, sign * magnitude);
        r[(1, 0)] = linalg::c(0.0, -sign * magnitude);
        state_from_coefficients(&CoefficientMatrix::from_entries(r), basis)
    } else {
        embedded_rho_x(basis, sign * magnitude)
    }
}

/// Runs S1–S4 for one measure.
///
/// * S1: free samples score at most the tolerance; resource samples (`ρ(x)`
///   with `|x| ∈ [0.1, 0.45]`, or an imaginary coherence for Δ-based
///   measures) score above `1e-4`.
/// * S2: `M(Λρ) ≤ M(ρ)` for channels of the configured family.
/// * S3: `Σ_n p_n M(ρ_n) ≤ M(ρ)` over the same pairs.
/// * S4: `M(tρ₁ + (1−t)ρ₂) ≤ tM(ρ₁) + (1−t)M(ρ₂)`.
///
/// Roof measures are upper bounds: in S2 the output value comes from a search
/// warm-started with the input certificate pushed through the channel, in S3
/// each outcome is valued by its share of that pushed ensemble, and in S4 the
/// scaled input certificates are concatenated into a warm start.
pub fn run_axiom_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    let basis = config.basis.build()?;
    let d = basis.dimension();
    if d < 2 {
        return Err(Error::WrongDimension { expected: 2, found: d });
    }
    let subject = Subject { measure: config.measure, basis: &basis, roof: &config.roof };
    let tol = config.tolerance;
    let mut s1 = AxiomReport::new(AxiomTag::S1, tol);
    let mut s2 = AxiomReport::new(AxiomTag::S2, tol);
    let mut s3 = AxiomReport::new(AxiomTag::S3, tol);
    let mut s4 = AxiomReport::new(AxiomTag::S4, tol);

    for trial in 0..config.trials {
        let seed = rng::derive_seed(config.seed, trial as u64);
        let sub = |k: u64| rng::derive_seed(seed, k);

        // S1, free side. Every fourth sample is a single basis projector.
        let free = if trial % 4 == 3 {
            let mut p = vec![0.0; d];
            p[trial % d] = 1.0;
            free_state(&basis, &p)
        } else {
            random_free(&basis, sub(1))
        };
        let tag = digest(&[free.matrix()], &[]);
        match subject.value(&free, sub(1)) {
            Ok(v) => s1.check(trial, seed, &tag, v, 0.0),
            Err(e) => s1.failed(trial, seed, &tag, e.to_string()),
        }

        // S1, resource side: recorded so that slack > tol iff value < floor.
        let mut g = rng::rng_from_seed(sub(2));
        match resource_state(config.measure, &basis, &mut g) {
            Ok(rho) => {
                let tag = digest(&[rho.matrix()], &[]);
                match subject.value(&rho, sub(2)) {
                    Ok(v) => s1.check(trial, seed, &tag, RESOURCE_FLOOR + tol, v),
                    Err(e) => s1.failed(trial, seed, &tag, e.to_string()),
                }
            }
            Err(e) => s1.failed(trial, seed, "", e.to_string()),
        }

        // S2 and S3 on a shared (state, channel) pair.
        let pair =
            random_density(d, 1 + trial % d, sub(3)).and_then(|rho| Ok((rho, config.family.sample(&basis, sub(4))?)));
        match pair {
            Ok((rho, channel)) => {
                let mut mats = vec![rho.matrix()];
                mats.extend(channel.operators());
                let tag = digest(&mats, &[]);
                match monotonicity(&subject, &rho, &channel, sub(5)) {
                    Ok((before, after, selective)) => {
                        s2.check(trial, seed, &tag, after, before);
                        s3.check(trial, seed, &tag, selective, before);
                    }
                    Err(e) => {
                        s2.failed(trial, seed, &tag, e.to_string());
                        s3.failed(trial, seed, &tag, e.to_string());
                    }
                }
            }
            Err(e) => {
                s2.failed(trial, seed, "", e.to_string());
                s3.failed(trial, seed, "", e.to_string());
            }
        }

        // S4.
        let mut g = rng::rng_from_seed(sub(6));
        let t: f64 = g.random_range(0.0..1.0);
        let triple = random_density(d, 1 + g.random_range(0..d), sub(7))
            .and_then(|a| Ok((a, random_density(d, 1 + g.random_range(0..d), sub(8))?)));
        match triple {
            Ok((a, b)) => {
                let tag = digest(&[a.matrix(), b.matrix()], &[t]);
                match convexity(&subject, &a, &b, t, sub(9)) {
                    Ok((lhs, rhs)) => s4.check(trial, seed, &tag, lhs, rhs),
                    Err(e) => s4.failed(trial, seed, &tag, e.to_string()),
                }
            }
            Err(e) => s4.failed(trial, seed, "", e.to_string()),
        }
    }

    Ok(CampaignReport {
        measure: config.measure.to_string(),
        configuration: config.describe(),
        note: format!(
            "S2/S3 use only channels of the '{}' family, which are free by construction; passing is a necessary condition.",
            config.family
        ),
        reports: vec![s1.finish(), s2.finish(), s3.finish(), s4.finish()],
    })
}

/// `(M(ρ), M(Λρ), Σ_n p_n M(ρ_n))`.
fn monotonicity(subject: &Subject, rho: &DensityMatrix, channel: &KrausChannel, seed: u64) -> Result<(f64, f64, f64)> {
    let before = subject.eval(rho, seed, None)?;
    let output = channel.apply(rho)?;
    if subject.measure.is_roof() {
        let ensemble =
            before.ensemble().ok_or_else(|| Error::Internal("roof result without an ensemble certificate".into()))?;
        let (totals, pushed) = subject.push(ensemble, channel)?;
        let after = subject.eval(&output, seed, Some(pushed))?.value;
        Ok((before.value, after, totals.iter().sum()))
    } else {
        let after = subject.value(&output, seed)?;
        let mut selective = 0.0;
        for (p, branch) in channel.apply_selective(rho)? {
            selective += p * subject.value(&branch, seed)?;
        }
        Ok((before.value, after, selective))
    }
}

/// `(M(tρ₁ + (1−t)ρ₂), tM(ρ₁) + (1−t)M(ρ₂))`.
fn convexity(subject: &Subject, a: &DensityMatrix, b: &DensityMatrix, t: f64, seed: u64) -> Result<(f64, f64)> {
    let ra = subject.eval(a, seed, None)?;
    let rb = subject.eval(b, rng::derive_seed(seed, 1), None)?;
    let warm = match (ra.ensemble(), rb.ensemble()) {
        (Some(ea), Some(eb)) => Some(ea.scaled(t).concat(eb.scaled(1.0 - t))),
        _ => None,
    };
    let mix = subject.eval(&a.mix(b, t), rng::derive_seed(seed, 2), warm)?;
    Ok((mix.value, t * ra.value + (1.0 - t) * rb.value))
}

/// `m_ℓ1 ≤ m_ℓ1_roof` on random states of every rank.
pub fn run_roof_dominance(basis: BasisSpec, trials: usize, seed: u64, roof: &RoofOptions) -> Result<CampaignReport> {
    let b = basis.build()?;
    let d = b.dimension();
    let mut report = AxiomReport::new(AxiomTag::C2, C2_TOL);
    for trial in 0..trials {
        let s = rng::derive_seed(seed, trial as u64);
        let rho = random_density(d, 1 + trial % d, s)?;
        let tag = digest(&[rho.matrix()], &[]);
        let pair = m_l1(&rho, &b).and_then(|l| Ok((l.value, m_l1_roof(&rho, &b, &roof.clone().with_seed(s))?.value)));
        match pair {
            Ok((l1, roof_value)) => report.check(trial, s, &tag, l1, roof_value),
            Err(e) => report.failed(trial, s, &tag, e.to_string()),
        }
    }
    Ok(CampaignReport {
        measure: MeasureId::L1Roof.to_string(),
        configuration: format!("{basis}, trials {trials}, seed {seed}"),
        note: "lhs = l1, rhs = l1_roof".into(),
        reports: vec![report.finish()],
    })
}

/// `C(ρ) ≤ C_d · m_w(ρ)` with `C_d` the numerical maximum of `C` over pure
/// states. Returns the report and `C_d`.
pub fn run_weight_bound(
    measure: MeasureId,
    basis: BasisSpec,
    trials: usize,
    seed: u64,
) -> Result<(CampaignReport, f64)> {
    if !matches!(measure, MeasureId::L1 | MeasureId::RelEnt) {
        return Err(Error::UnknownMeasure(format!("{measure} (weight-bound campaign supports l1 and rel_ent)")));
    }
    let b = basis.build()?;
    let d = b.dimension();
    let c_d = max_measure_value(
        &b,
        &|phi| measure.pure_value(phi, &b).unwrap_or(f64::NEG_INFINITY),
        MaxOptions { seed, ..MaxOptions::default() },
    );
    let mut report = AxiomReport::new(AxiomTag::C4, C4_TOL);
    for trial in 0..trials {
        let s = rng::derive_seed(seed, trial as u64);
        let rho = random_density(d, 1 + trial % d, s)?;
        let tag = digest(&[rho.matrix()], &[]);
        let opts = RoofOptions::default();
        let pair = measure.evaluate(&rho, &b, &opts).and_then(|c| Ok((c.value, m_weight(&rho, &b)?.value)));
        match pair {
            Ok((c, w)) => report.check(trial, s, &tag, c, c_d * w),
            Err(e) => report.failed(trial, s, &tag, e.to_string()),
        }
    }
    let campaign = CampaignReport {
        measure: measure.to_string(),
        configuration: format!("{basis}, trials {trials}, seed {seed}, C_d {c_d:.11e}"),
        note: "lhs = measure, rhs = C_d * weight".into(),
        reports: vec![report.finish()],
    };
    Ok((campaign, c_d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names() {
        for f in ChannelFamily::ALL {
            assert_eq!(f.name().parse::<ChannelFamily>().unwrap(), f);
        }
        assert!(matches!("bogus".parse::<ChannelFamily>(), Err(Error::UnknownChannelFamily(_))));
    }

    #[test]
    fn l1_small_campaign_passes_and_is_reproducible() {
        let config = CampaignConfig::new(MeasureId::L1, BasisSpec::Constant { d: 2, mu: 0.5 }, 20, 3);
        let a = run_axiom_campaign(&config).unwrap();
        assert!(a.passed(), "{}", a.to_table());
        let b = run_axiom_campaign(&config).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn broken_measure_fails_faithfulness() {
        let config = CampaignConfig::new(MeasureId::BrokenL1, BasisSpec::Constant { d: 2, mu: 0.5 }, 10, 0);
        let report = run_axiom_campaign(&config).unwrap();
        assert!(!report.report(AxiomTag::S1).unwrap().passed());
    }
}
