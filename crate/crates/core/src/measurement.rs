//! Quantum model of the variable-strength interferometric PM measurement
//! followed by a projective HV measurement.
//!
//! The measurement strength is set by the half-wave-plate angle `theta` in
//! [0, pi/8]; the exact apparatus has resolution `sin(4 theta)` and
//! back-action `1 - cos(4 theta)`. Finite interference visibility `v_pm`
//! rescales the resolution, finite coherence visibility `v_hv` rescales the
//! back-action, and a beam-splitter imbalance `delta` biases the two
//! detectors in a way that flips with the HWP rotation direction.

use crate::dist::{outcome_index, JointDistribution, Sign, OUTCOMES};
use crate::qubit::{ComplexMatrix2, QubitState, SpinObservable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use std::f64::consts::FRAC_PI_8;
use thiserror::Error;

/// Slack accepted on configuration range checks before rejecting, so that
/// degree-to-radian conversion of the nominal bounds stays valid.
const RANGE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApparatusError {
    #[error("theta = {theta} outside [0, pi/8]")]
    ThetaOutOfRange { theta: f64 },
    #[error("visibility {name} = {value} outside [0, 1]")]
    VisibilityOutOfRange { name: &'static str, value: f64 },
    #[error("detector imbalance delta = {delta} outside (-1, 1)")]
    DeltaOutOfRange { delta: f64 },
    #[error("photons_per_setting must be at least 1")]
    NoPhotons,
}

/// Full description of one apparatus setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApparatusConfig {
    theta: f64,
    v_pm: f64,
    v_hv: f64,
    delta: f64,
    photons_per_setting: u64,
}

impl ApparatusConfig {
    pub fn new(
        theta: f64,
        v_pm: f64,
        v_hv: f64,
        delta: f64,
        photons_per_setting: u64,
    ) -> Result<Self, ApparatusError> {
        if !theta.is_finite() || !(-RANGE_TOL..=FRAC_PI_8 + RANGE_TOL).contains(&theta) {
            return Err(ApparatusError::ThetaOutOfRange { theta });
        }
        for (name, value) in [("v_pm", v_pm), ("v_hv", v_hv)] {
            if !value.is_finite() || !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&value) {
                return Err(ApparatusError::VisibilityOutOfRange { name, value });
            }
        }
        if !delta.is_finite() || delta.abs() >= 1.0 {
            return Err(ApparatusError::DeltaOutOfRange { delta });
        }
        if photons_per_setting == 0 {
            return Err(ApparatusError::NoPhotons);
        }
        Ok(Self {
            theta: theta.clamp(0.0, FRAC_PI_8),
            v_pm: v_pm.clamp(0.0, 1.0),
            v_hv: v_hv.clamp(0.0, 1.0),
            delta,
            photons_per_setting,
        })
    }

    /// Ideal apparatus (unit visibilities, balanced detectors).
    pub fn ideal(theta: f64, photons_per_setting: u64) -> Result<Self, ApparatusError> {
        Self::new(theta, 1.0, 1.0, 0.0, photons_per_setting)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn v_pm(&self) -> f64 {
        self.v_pm
    }

    pub fn v_hv(&self) -> f64 {
        self.v_hv
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn photons_per_setting(&self) -> u64 {
        self.photons_per_setting
    }

    /// Model resolution `v_pm sin(4 theta)`.
    pub fn epsilon(&self) -> f64 {
        self.v_pm * (4.0 * self.theta).sin()
    }

    /// Model back-action `1 - v_hv cos(4 theta)`.
    pub fn eta(&self) -> f64 {
        1.0 - self.v_hv * (4.0 * self.theta).cos()
    }
}

/// HWP angle at which the model resolution equals `epsilon`, if reachable.
pub fn theta_for_epsilon(epsilon: f64, v_pm: f64) -> Option<f64> {
    if v_pm <= 0.0 {
        return None;
    }
    let ratio = epsilon / v_pm;
    if !(0.0..=1.0).contains(&ratio) {
        return None;
    }
    Some(ratio.asin() / 4.0)
}

/// HWP angle at which the model back-action equals `eta`, if reachable.
pub fn theta_for_eta(eta: f64, v_hv: f64) -> Option<f64> {
    if v_hv <= 0.0 {
        return None;
    }
    let ratio = (1.0 - eta) / v_hv;
    if !(0.0..=1.0).contains(&ratio) {
        return None;
    }
    Some(ratio.acos() / 4.0)
}

/// Measurement operators of the PM stage at strength `theta`:
/// `M_P = cos(t) P_P + sin(t) P_M` and `M_M = sin(t) P_P + cos(t) P_M`
/// with `t = pi/4 - 2 theta`. They satisfy `M_P'M_P + M_M'M_M = I`.
pub fn kraus_pair(theta: f64) -> Result<(ComplexMatrix2, ComplexMatrix2), ApparatusError> {
    if !theta.is_finite() || !(-RANGE_TOL..=FRAC_PI_8 + RANGE_TOL).contains(&theta) {
        return Err(ApparatusError::ThetaOutOfRange { theta });
    }
    let t = std::f64::consts::FRAC_PI_4 - 2.0 * theta.clamp(0.0, FRAC_PI_8);
    let (proj_p, proj_m) = SpinObservable::pm().projectors();
    let m_p = proj_p.scale(t.cos()) + proj_m.scale(t.sin());
    let m_m = proj_p.scale(t.sin()) + proj_m.scale(t.cos());
    Ok((m_p, m_m))
}

/// Noise-free outcome distribution `p(s2, s3) = <s3| M_{s2} rho M_{s2}' |s3>`.
pub fn ideal_joint_distribution(
    state: &QubitState,
    theta: f64,
) -> Result<JointDistribution, ApparatusError> {
    let (m_p, m_m) = kraus_pair(theta)?;
    let mut cells = [0.0f64; 4];
    for &(s2, s3) in OUTCOMES.iter() {
        let kraus = match s2 {
            Sign::Plus => m_p,
            Sign::Minus => m_m,
        };
        // HV basis: index 0 de-excites to |H> (s3 = +1), index 1 to |V>.
        let row = match s3 {
            Sign::Plus => 0,
            Sign::Minus => 1,
        };
        let post = kraus * *state.density() * kraus.adjoint();
        cells[outcome_index(s2, s3)] = post.entry(row, row).re;
    }
    Ok(JointDistribution::proper(cells).expect("Kraus probabilities are normalized"))
}

fn flip_s2(cells: &[f64; 4], flip_prob: f64) -> [f64; 4] {
    let mut out = [0.0f64; 4];
    for &(s2, s3) in OUTCOMES.iter() {
        out[outcome_index(s2, s3)] = (1.0 - flip_prob) * cells[outcome_index(s2, s3)]
            + flip_prob * cells[outcome_index(s2.flip(), s3)];
    }
    out
}

fn flip_s3(cells: &[f64; 4], flip_prob: f64) -> [f64; 4] {
    let mut out = [0.0f64; 4];
    for &(s2, s3) in OUTCOMES.iter() {
        out[outcome_index(s2, s3)] = (1.0 - flip_prob) * cells[outcome_index(s2, s3)]
            + flip_prob * cells[outcome_index(s2, s3.flip())];
    }
    out
}

/// Outcome distribution including visibility noise: the recorded `s2` is
/// flipped with probability `(1 - v_pm)/2` (readout contrast) and the
/// recorded `s3` with probability `(1 - v_hv)/2` (PM-basis dephasing of the
/// post-measurement state). The effective error rates become
/// `epsilon = v_pm sin(4 theta)` and `eta = 1 - v_hv cos(4 theta)`.
pub fn noisy_joint_distribution(state: &QubitState, config: &ApparatusConfig) -> JointDistribution {
    let ideal = ideal_joint_distribution(state, config.theta())
        .expect("config theta is validated on construction");
    let with_s2 = flip_s2(ideal.cells(), (1.0 - config.v_pm()) / 2.0);
    let with_s3 = flip_s3(&with_s2, (1.0 - config.v_hv()) / 2.0);
    JointDistribution::proper(with_s3).expect("flip channels preserve normalization")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountError {
    #[error("total counts {total} exceed twice the photon budget {budget}")]
    OverBudget { total: u64, budget: u64 },
}

/// Raw detector counts of one double run (H-filter run plus V-filter run)
/// at a single HWP rotation direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    counts: [u64; 4],
    hwp_sign: Sign,
    seed: u64,
    config: ApparatusConfig,
}

impl CountRecord {
    pub fn new(
        counts: [u64; 4],
        hwp_sign: Sign,
        seed: u64,
        config: ApparatusConfig,
    ) -> Result<Self, CountError> {
        let total: u64 = counts.iter().sum();
        if total > 2 * config.photons_per_setting() {
            return Err(CountError::OverBudget {
                total,
                budget: config.photons_per_setting(),
            });
        }
        Ok(Self {
            counts,
            hwp_sign,
            seed,
            config,
        })
    }

    pub fn count(&self, s2: Sign, s3: Sign) -> u64 {
        self.counts[outcome_index(s2, s3)]
    }

    pub fn counts(&self) -> &[u64; 4] {
        &self.counts
    }

    pub fn hwp_sign(&self) -> Sign {
        self.hwp_sign
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &ApparatusConfig {
        &self.config
    }
}

/// Sequential-binomial multinomial sampler. `probs` must be non-negative
/// and sum to at most 1 + rounding slack; a trailing implicit remainder is
/// not required (the counts simply sum to at most `n` if the given
/// categories do not exhaust the probability).
pub(crate) fn sample_multinomial<const K: usize>(
    rng: &mut ChaCha8Rng,
    n: u64,
    probs: &[f64; K],
) -> [u64; K] {
    let mut out = [0u64; K];
    let mut remaining_n = n;
    let mut remaining_p = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if remaining_n == 0 || remaining_p <= 0.0 {
            break;
        }
        let cond = (p / remaining_p).clamp(0.0, 1.0);
        let drawn = Binomial::new(remaining_n, cond)
            .expect("conditional probability is in [0, 1]")
            .sample(rng);
        out[k] = drawn;
        remaining_n -= drawn;
        remaining_p -= p;
    }
    out
}

fn thin(rng: &mut ChaCha8Rng, count: u64, efficiency: f64) -> u64 {
    if efficiency >= 1.0 || count == 0 {
        count
    } else {
        Binomial::new(count, efficiency.max(0.0))
            .expect("efficiency is in [0, 1]")
            .sample(rng)
    }
}

/// Simulates one double run: `photons_per_setting` photons through the
/// H polarizer (detecting the two `s3 = +1` cells) and the same number
/// through the V polarizer (the `s3 = -1` cells). The detector assigned to
/// `s2 = +1` has relative efficiency `1 + hwp_sign * delta`, the other
/// `1 - hwp_sign * delta`; rejected photons are discarded. Deterministic
/// for a fixed seed.
pub fn simulate_counts(
    state: &QubitState,
    config: &ApparatusConfig,
    hwp_sign: Sign,
    rng_seed: u64,
) -> CountRecord {
    let p = noisy_joint_distribution(state, config);
    let n = config.photons_per_setting();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    let mut counts = [0u64; 4];
    for s3 in Sign::BOTH {
        let p_plus = p.get(Sign::Plus, s3);
        let p_minus = p.get(Sign::Minus, s3);
        let discard = (1.0 - p_plus - p_minus).max(0.0);
        let [c_plus, c_minus, _] = sample_multinomial(&mut rng, n, &[p_plus, p_minus, discard]);
        counts[outcome_index(Sign::Plus, s3)] = c_plus;
        counts[outcome_index(Sign::Minus, s3)] = c_minus;
    }

    // Relative efficiencies rescaled so the favored detector keeps every photon.
    let delta = config.delta();
    if delta != 0.0 {
        let norm = 1.0 + delta.abs();
        for &(s2, s3) in OUTCOMES.iter() {
            let efficiency = (1.0 + s2.value() * hwp_sign.value() * delta) / norm;
            let idx = outcome_index(s2, s3);
            counts[idx] = thin(&mut rng, counts[idx], efficiency);
        }
    }

    CountRecord::new(counts, hwp_sign, rng_seed, *config)
        .expect("sampled counts cannot exceed the photon budget")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("no count records given")]
    NoRecords,
    #[error("records mix different apparatus configurations")]
    MixedConfigs,
    #[error("no records with hwp_sign = {0:?}; cannot compensate detector imbalance")]
    MissingSign(Sign),
    #[error("all counts are zero for hwp_sign = {0:?}")]
    NoCounts(Sign),
}

/// Sums counts per cell over the records of one sign; also returns the
/// per-run photon budget behind those sums.
fn pooled_counts(records: &[&CountRecord]) -> ([u64; 4], u64) {
    let mut sums = [0u64; 4];
    let mut budget = 0u64;
    for r in records {
        for (s, c) in sums.iter_mut().zip(r.counts().iter()) {
            *s += c;
        }
        budget += r.config().photons_per_setting();
    }
    (sums, budget)
}

/// Normalized frequencies of the records of a single HWP rotation
/// direction, with per-cell multinomial standard errors. No imbalance
/// compensation is applied; this estimator carries a first-order bias of
/// about `delta * (1 - <s2>^2)` on `<s2>`.
pub fn single_sign_estimate(
    records: &[CountRecord],
    sign: Sign,
) -> Result<(JointDistribution, [f64; 4]), EstimateError> {
    if records.is_empty() {
        return Err(EstimateError::NoRecords);
    }
    check_same_config(records)?;
    let selected: Vec<&CountRecord> = records.iter().filter(|r| r.hwp_sign() == sign).collect();
    if selected.is_empty() {
        return Err(EstimateError::MissingSign(sign));
    }
    let (sums, _) = pooled_counts(&selected);
    let total: u64 = sums.iter().sum();
    if total == 0 {
        return Err(EstimateError::NoCounts(sign));
    }
    let t = total as f64;
    let mut cells = [0.0f64; 4];
    let mut se = [0.0f64; 4];
    for i in 0..4 {
        let q = sums[i] as f64 / t;
        cells[i] = q;
        se[i] = (q * (1.0 - q) / t).sqrt();
    }
    let dist = JointDistribution::proper(cells).expect("frequencies are a proper distribution");
    Ok((dist, se))
}

fn check_same_config(records: &[CountRecord]) -> Result<(), EstimateError> {
    let first = records[0].config();
    if records.iter().any(|r| r.config() != first) {
        return Err(EstimateError::MixedConfigs);
    }
    Ok(())
}

/// Imbalance-compensating estimator: per-budget count rates are averaged
/// over the two HWP rotation directions, then normalized once. The swap of
/// detector efficiencies between the two directions makes the average rate
/// proportional to the true cell probability, so `delta` cancels exactly
/// in the infinite-count limit.
///
/// Per-cell standard errors come from the multinomial variance of each
/// sign's normalized frequencies, propagated through the two-sign average.
pub fn estimate_probabilities(
    records: &[CountRecord],
) -> Result<(JointDistribution, [f64; 4]), EstimateError> {
    if records.is_empty() {
        return Err(EstimateError::NoRecords);
    }
    check_same_config(records)?;

    let mut rates = [[0.0f64; 4]; 2];
    let mut variances = [[0.0f64; 4]; 2];
    for (which, sign) in Sign::BOTH.into_iter().enumerate() {
        let selected: Vec<&CountRecord> =
            records.iter().filter(|r| r.hwp_sign() == sign).collect();
        if selected.is_empty() {
            return Err(EstimateError::MissingSign(sign));
        }
        let (sums, budget) = pooled_counts(&selected);
        let total: u64 = sums.iter().sum();
        if total == 0 {
            return Err(EstimateError::NoCounts(sign));
        }
        for i in 0..4 {
            rates[which][i] = sums[i] as f64 / budget as f64;
            let q = sums[i] as f64 / total as f64;
            variances[which][i] = q * (1.0 - q) / total as f64;
        }
    }

    let mut averaged = [0.0f64; 4];
    for i in 0..4 {
        averaged[i] = (rates[0][i] + rates[1][i]) / 2.0;
    }
    let norm: f64 = averaged.iter().sum();
    let mut cells = [0.0f64; 4];
    let mut se = [0.0f64; 4];
    for i in 0..4 {
        cells[i] = averaged[i] / norm;
        se[i] = ((variances[0][i] + variances[1][i]) / 4.0).sqrt();
    }
    let dist = JointDistribution::proper(cells).expect("averaged frequencies are proper");
    Ok((dist, se))
}
