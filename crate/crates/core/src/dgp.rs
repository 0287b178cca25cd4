//! Structural data-generating process for two-period binary-outcome cohorts
//! with selective post-period dropout.
//!
//! The generative order is C → X → Y1 → M2 → Y2:
//!
//! * confounder           `C  ~ Bernoulli(p_c)`
//! * treatment group      `X  | C ~ Bernoulli(expit(alpha0 + alpha1·C))`
//! * prior event          `Y1 | C ~ Bernoulli(p1 · r_c^C)`
//! * dropout/death        `M2 | C,X,Y1 ~ Bernoulli(expit(gamma0 + active terms))`
//! * post event           `Y2 | C,X ~ Bernoulli(p2 · r_c^C · rr_x^X)`, observed only when `M2 = 0`
//!
//! Both outcome models are multiplicative in the shared confounder effect
//! `r_c`, so the two periods cancel the confounding exactly and any estimator
//! bias under dropout is attributable to the selection alone. `Y2` is
//! conditionally independent of `(Y1, M2)` given `(C, X)`: dropout and the
//! prior event are associated with the post event only through `C` and `X`.
//!
//! Because every variable is binary, the exact population law is a 32-state
//! joint distribution; [`enumerate_population`] computes it along with the
//! asymptotic values of the three estimators, which serve as the oracle the
//! simulated estimates converge to.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorValue;

/// Structural coefficients and baseline risks of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DgpParams {
    /// Prevalence of the binary confounder C.
    pub p_c: f64,
    /// Intercept of the treatment-assignment logistic model.
    pub alpha0: f64,
    /// C-coefficient of the treatment-assignment logistic model.
    pub alpha1: f64,
    /// Baseline prior-event risk P(Y1=1 | C=0).
    pub p1: f64,
    /// Baseline post-event risk P(Y2=1 | C=0, X=0).
    pub p2: f64,
    /// Multiplicative risk ratio of C on both Y1 and Y2 (time-constant confounding).
    pub r_c: f64,
    /// True treatment effect, multiplicative on P(Y2=1).
    pub rr_x: f64,
    /// Dropout log-odds coefficient for C (applied when C is an active determinant).
    pub gamma_c: f64,
    /// Dropout log-odds coefficient for X.
    pub gamma_x: f64,
    /// Dropout log-odds coefficient for Y1.
    pub gamma_y1: f64,
}

impl Default for DgpParams {
    fn default() -> Self {
        DgpParams {
            p_c: 0.5,
            alpha0: -1.0,
            alpha1: 2.0,
            p1: 0.20,
            p2: 0.16,
            r_c: 2.0,
            rr_x: 2.0,
            gamma_c: 2.0,
            gamma_x: 2.0,
            gamma_y1: 0.05,
        }
    }
}

impl DgpParams {
    /// Checks every structural invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let prob_fields = [("p_c", self.p_c), ("p1", self.p1), ("p2", self.p2)];
        for (name, v) in prob_fields {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, format!("{v} is not in [0, 1]")));
            }
        }
        for (name, v) in [("r_c", self.r_c), ("rr_x", self.rr_x)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("{v} is not a positive real")));
            }
        }
        for (name, v) in [
            ("alpha0", self.alpha0),
            ("alpha1", self.alpha1),
            ("gamma_c", self.gamma_c),
            ("gamma_x", self.gamma_x),
            ("gamma_y1", self.gamma_y1),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("{v} is not finite")));
            }
        }
        if self.p1 * self.r_c > 1.0 {
            return Err(Error::invalid(
                "p1",
                format!("p1 * r_c = {} exceeds 1: P(Y1=1 | C=1) leaves [0, 1]", self.p1 * self.r_c),
            ));
        }
        if self.p2 * self.r_c * self.rr_x > 1.0 {
            return Err(Error::invalid(
                "p2",
                format!(
                    "p2 * r_c * rr_x = {} exceeds 1: P(Y2=1 | C=1, X=1) leaves [0, 1]",
                    self.p2 * self.r_c * self.rr_x
                ),
            ));
        }
        Ok(())
    }
}

/// Which variables drive dropout: the four rows of the scenario table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// M2 depends on confounder, treatment and prior event.
    ConfounderTreatmentPrior,
    /// M2 depends on confounder and prior event.
    ConfounderPrior,
    /// M2 depends on confounder and treatment.
    ConfounderTreatment,
    /// M2 depends on the confounder alone.
    ConfounderOnly,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::ConfounderTreatmentPrior,
        Scenario::ConfounderPrior,
        Scenario::ConfounderTreatment,
        Scenario::ConfounderOnly,
    ];

    pub fn id(self) -> u8 {
        match self {
            Scenario::ConfounderTreatmentPrior => 1,
            Scenario::ConfounderPrior => 2,
            Scenario::ConfounderTreatment => 3,
            Scenario::ConfounderOnly => 4,
        }
    }

    pub fn from_id(id: u8) -> Result<Scenario> {
        Scenario::ALL
            .into_iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| Error::invalid("scenario", format!("{id} is not a scenario id (1..=4)")))
    }

    /// The set of dropout determinants. The confounder is active in every
    /// scenario.
    pub fn determinants(self) -> DropoutDeterminants {
        let (treatment, prior_event) = match self {
            Scenario::ConfounderTreatmentPrior => (true, true),
            Scenario::ConfounderPrior => (false, true),
            Scenario::ConfounderTreatment => (true, false),
            Scenario::ConfounderOnly => (false, false),
        };
        DropoutDeterminants { confounder: true, treatment, prior_event }
    }
}

impl TryFrom<u8> for Scenario {
    type Error = String;
    fn try_from(id: u8) -> std::result::Result<Self, String> {
        Scenario::from_id(id).map_err(|_| format!("{id} is not a scenario id (1..=4)"))
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s.id()
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Active dropout determinants of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropoutDeterminants {
    pub confounder: bool,
    pub treatment: bool,
    pub prior_event: bool,
}

/// A scenario together with the target marginal dropout rate P(M2=1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub target_dropout: f64,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, target_dropout: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&target_dropout) {
            return Err(Error::invalid(
                "target_dropout",
                format!("{target_dropout} is not in [0, 0.5]"),
            ));
        }
        Ok(ScenarioSpec { scenario, target_dropout })
    }
}

/// One person's realized values. `y2` is present exactly when `m2 = 0`:
/// non-completers never expose a post-period outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndividualRecord {
    pub c: bool,
    pub x: bool,
    pub y1: bool,
    pub m2: bool,
    pub y2: Option<bool>,
}

impl IndividualRecord {
    /// The observability invariant: y2 absent exactly when m2 = 1.
    pub fn is_consistent(&self) -> bool {
        self.y2.is_some() != self.m2
    }
}

/// The calibrated dropout mechanism. A target rate of exactly zero switches
/// dropout off structurally (`M2 ≡ 0`) instead of chasing an infinite
/// intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DropoutModel {
    /// No-dropout mode: every person completes.
    None,
    /// Logistic dropout with the calibrated intercept gamma0.
    Logistic { intercept: f64 },
}

impl DropoutModel {
    pub fn intercept(&self) -> Option<f64> {
        match self {
            DropoutModel::None => None,
            DropoutModel::Logistic { intercept } => Some(*intercept),
        }
    }
}

#[inline]
fn expit(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Effective dropout coefficients with inactive determinants forced to zero,
/// so scenario differences are structural rather than numeric.
fn effective_gammas(params: &DgpParams, scenario: Scenario) -> (f64, f64, f64) {
    let d = scenario.determinants();
    (
        if d.confounder { params.gamma_c } else { 0.0 },
        if d.treatment { params.gamma_x } else { 0.0 },
        if d.prior_event { params.gamma_y1 } else { 0.0 },
    )
}

fn treatment_prob(params: &DgpParams, c: bool) -> f64 {
    expit(params.alpha0 + params.alpha1 * (c as u8 as f64))
}

fn prior_event_prob(params: &DgpParams, c: bool) -> f64 {
    params.p1 * if c { params.r_c } else { 1.0 }
}

fn post_event_prob(params: &DgpParams, c: bool, x: bool) -> f64 {
    params.p2 * if c { params.r_c } else { 1.0 } * if x { params.rr_x } else { 1.0 }
}

fn dropout_prob(
    params: &DgpParams,
    scenario: Scenario,
    model: &DropoutModel,
    c: bool,
    x: bool,
    y1: bool,
) -> f64 {
    match model {
        DropoutModel::None => 0.0,
        DropoutModel::Logistic { intercept } => {
            let (gc, gx, gy1) = effective_gammas(params, scenario);
            expit(
                intercept
                    + gc * (c as u8 as f64)
                    + gx * (x as u8 as f64)
                    + gy1 * (y1 as u8 as f64),
            )
        }
    }
}

/// The exact 8-state joint law of (C, X, Y1) before dropout, as
/// `(c, x, y1, probability)` tuples.
fn pre_dropout_joint(params: &DgpParams) -> [(bool, bool, bool, f64); 8] {
    let mut out = [(false, false, false, 0.0); 8];
    let mut i = 0;
    for c in [false, true] {
        let pc = if c { params.p_c } else { 1.0 - params.p_c };
        let px1 = treatment_prob(params, c);
        let py1 = prior_event_prob(params, c);
        for x in [false, true] {
            let px = if x { px1 } else { 1.0 - px1 };
            for y1 in [false, true] {
                let py = if y1 { py1 } else { 1.0 - py1 };
                out[i] = (c, x, y1, pc * px * py);
                i += 1;
            }
        }
    }
    out
}

/// Exact marginal P(M2=1) under a given intercept, by enumerating the
/// pre-dropout joint law.
fn marginal_dropout_at(params: &DgpParams, scenario: Scenario, intercept: f64) -> f64 {
    let model = DropoutModel::Logistic { intercept };
    pre_dropout_joint(params)
        .iter()
        .map(|&(c, x, y1, w)| w * dropout_prob(params, scenario, &model, c, x, y1))
        .sum()
}

/// Bisection bounds for the dropout intercept.
const INTERCEPT_LO: f64 = -40.0;
const INTERCEPT_HI: f64 = 40.0;

/// Solves for the dropout intercept gamma0 so that the exact marginal
/// P(M2=1) equals `spec.target_dropout`.
///
/// The marginal is strictly increasing in the intercept, so plain bisection
/// over [-40, 40] down to an interval width of 1e-12 lands within 1e-10 of
/// the target. A target of exactly 0 returns [`DropoutModel::None`].
pub fn calibrate_dropout_intercept(params: &DgpParams, spec: &ScenarioSpec) -> Result<DropoutModel> {
    params.validate()?;
    if !(0.0..=0.5).contains(&spec.target_dropout) {
        return Err(Error::invalid(
            "target_dropout",
            format!("{} is not in [0, 0.5]", spec.target_dropout),
        ));
    }
    if spec.target_dropout == 0.0 {
        return Ok(DropoutModel::None);
    }
    let target = spec.target_dropout;
    let at_lo = marginal_dropout_at(params, spec.scenario, INTERCEPT_LO);
    let at_hi = marginal_dropout_at(params, spec.scenario, INTERCEPT_HI);
    if target < at_lo || target > at_hi {
        return Err(Error::NoSolution { target, lo: at_lo, hi: at_hi });
    }
    let (mut lo, mut hi) = (INTERCEPT_LO, INTERCEPT_HI);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if marginal_dropout_at(params, spec.scenario, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DropoutModel::Logistic { intercept: 0.5 * (lo + hi) })
}

/// A Bernoulli acceptance threshold on raw 64-bit words, with the same
/// quantization as `rand::distributions::Bernoulli`: the draw hits when
/// `word < (p * 2^64) as u64`, and `p = 1` always hits.
#[derive(Debug, Clone, Copy)]
struct Threshold(u64);

impl Threshold {
    fn new(field: &'static str, p: f64) -> Result<Threshold> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(field, format!("implied probability {p} leaves [0, 1]")));
        }
        if p == 1.0 {
            return Ok(Threshold(u64::MAX));
        }
        const SCALE: f64 = 2.0 * (1u64 << 63) as f64;
        Ok(Threshold((p * SCALE) as u64))
    }

    #[inline]
    fn hit(self, word: u64) -> bool {
        self.0 == u64::MAX || word < self.0
    }
}

/// Precomputed per-state acceptance thresholds for one
/// `(params, scenario, model)` cell. Construction validates every implied
/// probability once so the per-record sampling path stays branch-light.
#[derive(Debug, Clone)]
pub struct CohortSampler {
    t_c: Threshold,
    t_x: [Threshold; 2],
    t_y1: [Threshold; 2],
    /// Indexed by (c << 2) | (x << 1) | y1; `None` in no-dropout mode.
    t_m2: Option<[Threshold; 8]>,
    /// Indexed by (c << 1) | x.
    t_y2: [Threshold; 4],
}

impl CohortSampler {
    pub fn new(params: &DgpParams, spec: &ScenarioSpec, model: &DropoutModel) -> Result<Self> {
        params.validate()?;
        let t_c = Threshold::new("p_c", params.p_c)?;
        let mut t_x = [t_c; 2];
        let mut t_y1 = [t_c; 2];
        for c in [false, true] {
            t_x[c as usize] = Threshold::new("alpha0/alpha1", treatment_prob(params, c))?;
            t_y1[c as usize] = Threshold::new("p1", prior_event_prob(params, c))?;
        }
        let t_m2 = match model {
            DropoutModel::None => None,
            DropoutModel::Logistic { .. } => {
                let mut thresholds = [t_c; 8];
                for c in [false, true] {
                    for x in [false, true] {
                        for y1 in [false, true] {
                            let idx = ((c as usize) << 2) | ((x as usize) << 1) | y1 as usize;
                            thresholds[idx] = Threshold::new(
                                "gamma",
                                dropout_prob(params, spec.scenario, model, c, x, y1),
                            )?;
                        }
                    }
                }
                Some(thresholds)
            }
        };
        let mut t_y2 = [t_c; 4];
        for c in [false, true] {
            for x in [false, true] {
                t_y2[((c as usize) << 1) | x as usize] =
                    Threshold::new("p2", post_event_prob(params, c, x))?;
            }
        }
        Ok(CohortSampler { t_c, t_x, t_y1, t_m2, t_y2 })
    }

    /// Draws one person in generative order C → X → Y1 → M2 → Y2.
    ///
    /// The latent post-period outcome is drawn for everyone; observability
    /// masks it for non-completers (the record never exposes y2 when m2 = 1).
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> IndividualRecord {
        match &self.t_m2 {
            None => self.sample_complete(rng),
            Some(thresholds) => self.sample_with_dropout(thresholds, rng),
        }
    }

    #[inline]
    fn sample_complete<R: Rng + ?Sized>(&self, rng: &mut R) -> IndividualRecord {
        let c = self.t_c.hit(rng.next_u64());
        let x = self.t_x[c as usize].hit(rng.next_u64());
        let y1 = self.t_y1[c as usize].hit(rng.next_u64());
        let y2 = self.t_y2[(((c as usize) << 1) | x as usize) & 3].hit(rng.next_u64());
        IndividualRecord { c, x, y1, m2: false, y2: Some(y2) }
    }

    #[inline]
    fn sample_with_dropout<R: Rng + ?Sized>(
        &self,
        t_m2: &[Threshold; 8],
        rng: &mut R,
    ) -> IndividualRecord {
        let c = self.t_c.hit(rng.next_u64());
        let x = self.t_x[c as usize].hit(rng.next_u64());
        let y1 = self.t_y1[c as usize].hit(rng.next_u64());
        let m2 =
            t_m2[(((c as usize) << 2) | ((x as usize) << 1) | y1 as usize) & 7].hit(rng.next_u64());
        let y2_latent = self.t_y2[(((c as usize) << 1) | x as usize) & 3].hit(rng.next_u64());
        // branchless select: non-completers mask the latent outcome
        let y2 = [Some(y2_latent), None][m2 as usize];
        IndividualRecord { c, x, y1, m2, y2 }
    }
}

/// Words drawn per record: C, X, Y1, latent Y2, plus M2 outside no-dropout mode.
impl CohortSampler {
    fn words_per_record(&self) -> usize {
        if self.t_m2.is_some() {
            5
        } else {
            4
        }
    }

    /// Appends `n` records. Identical output to calling [`CohortSampler::sample`]
    /// `n` times with the same generator: the raw words are prefetched in
    /// chunks (decoupling generator stepping from the table lookups) but
    /// consumed in the same order and count.
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        out: &mut Vec<IndividualRecord>,
    ) {
        const CHUNK_RECORDS: usize = 1024;
        out.reserve(n);
        let wpr = self.words_per_record();
        let mut buf = vec![0u64; CHUNK_RECORDS * wpr];
        let mut remaining = n;
        while remaining > 0 {
            let k = remaining.min(CHUNK_RECORDS);
            let words = &mut buf[..k * wpr];
            for w in words.iter_mut() {
                *w = rng.next_u64();
            }
            let mut src = WordSource { words, next: 0 };
            match &self.t_m2 {
                None => {
                    for _ in 0..k {
                        out.push(self.sample_complete(&mut src));
                    }
                }
                Some(thresholds) => {
                    for _ in 0..k {
                        out.push(self.sample_with_dropout(thresholds, &mut src));
                    }
                }
            }
            debug_assert_eq!(src.next, words.len());
            remaining -= k;
        }
    }
}

/// An RngCore view over prefetched words; panics if overdrawn.
struct WordSource<'a> {
    words: &'a [u64],
    next: usize,
}

impl rand::RngCore for WordSource<'_> {
    fn next_u32(&mut self) -> u32 {
        self.next_u64() as u32
    }

    fn next_u64(&mut self) -> u64 {
        let w = self.words[self.next];
        self.next += 1;
        w
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// Draws `n` independent records from the structural model.
pub fn sample_cohort<R: Rng + ?Sized>(
    params: &DgpParams,
    spec: &ScenarioSpec,
    model: &DropoutModel,
    n: usize,
    rng: &mut R,
) -> Result<Vec<IndividualRecord>> {
    if n == 0 {
        return Err(Error::invalid("n", "cohort size must be at least 1"));
    }
    let sampler = CohortSampler::new(params, spec, model)?;
    let mut records = Vec::with_capacity(n);
    sampler.sample_into(n, rng, &mut records);
    Ok(records)
}

/// Exact population law and the asymptotic estimator values implied by it.
///
/// The joint assigns a counterfactual Y2 value to non-completers as well;
/// observability (`y2` missing when `m2 = 1`) is an analysis-time mask, not a
/// property of the law.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationEstimands {
    joint: [f64; 32],
    /// Exact marginal P(M2=1).
    pub marginal_dropout: f64,
    /// E(Y1 | X=g) indexed by g.
    pub mean_y1_all: [Option<f64>; 2],
    /// E(Y1 | X=g, M2=0) indexed by g.
    pub mean_y1_completers: [Option<f64>; 2],
    /// E(Y2 | X=g, M2=0) indexed by g.
    pub mean_y2_completers: [Option<f64>; 2],
    pub perr_prev: EstimatorValue,
    pub perr_comp: EstimatorValue,
    pub rr: EstimatorValue,
}

fn state_index(c: bool, x: bool, y1: bool, m2: bool, y2: bool) -> usize {
    ((c as usize) << 4) | ((x as usize) << 3) | ((y1 as usize) << 2) | ((m2 as usize) << 1) | y2 as usize
}

impl PopulationEstimands {
    /// Probability of one of the 32 joint states.
    pub fn joint(&self, c: bool, x: bool, y1: bool, m2: bool, y2: bool) -> f64 {
        self.joint[state_index(c, x, y1, m2, y2)]
    }

    pub fn joint_sum(&self) -> f64 {
        self.joint.iter().sum()
    }

    pub fn value_of(&self, estimator: crate::estimators::Estimator) -> EstimatorValue {
        use crate::estimators::Estimator;
        match estimator {
            Estimator::PerrPrev => self.perr_prev,
            Estimator::PerrComp => self.perr_comp,
            Estimator::Rr => self.rr,
        }
    }
}

/// Staged ratio-of-ratios with the same failure semantics as the sample
/// estimators: a subgroup with no mass is `Empty`, a zero component anywhere
/// in the ratio arithmetic is `Undefined`.
fn ratio_of_ratios(
    num: [Option<f64>; 2],
    den: Option<[Option<f64>; 2]>,
) -> EstimatorValue {
    let mut components = vec![num[1], num[0]];
    if let Some(d) = den {
        components.push(d[1]);
        components.push(d[0]);
    }
    if components.iter().any(|c| c.is_none()) {
        return EstimatorValue::Empty;
    }
    if components.iter().any(|c| c.unwrap() == 0.0) {
        return EstimatorValue::Undefined;
    }
    let num_ratio = num[1].unwrap() / num[0].unwrap();
    match den {
        None => EstimatorValue::Value(num_ratio),
        Some(d) => EstimatorValue::Value(num_ratio / (d[1].unwrap() / d[0].unwrap())),
    }
}

/// Computes the exact 32-state joint law and the asymptotic estimator values
/// by multiplying out the factorization
/// P(C)·P(X|C)·P(Y1|C)·P(M2|C,X,Y1)·P(Y2|C,X).
pub fn enumerate_population(
    params: &DgpParams,
    spec: &ScenarioSpec,
    model: &DropoutModel,
) -> Result<PopulationEstimands> {
    params.validate()?;
    let mut joint = [0.0f64; 32];
    let mut marginal_dropout = 0.0;
    // conditional accumulators indexed by x
    let mut p_x = [0.0f64; 2];
    let mut p_y1_x = [0.0f64; 2];
    let mut p_x_m0 = [0.0f64; 2];
    let mut p_y1_x_m0 = [0.0f64; 2];
    let mut p_y2_x_m0 = [0.0f64; 2];

    for (c, x, y1, w) in pre_dropout_joint(params) {
        let pm2 = dropout_prob(params, spec.scenario, model, c, x, y1);
        let py2 = post_event_prob(params, c, x);
        marginal_dropout += w * pm2;
        let g = x as usize;
        p_x[g] += w;
        p_y1_x[g] += w * (y1 as u8 as f64);
        p_x_m0[g] += w * (1.0 - pm2);
        p_y1_x_m0[g] += w * (1.0 - pm2) * (y1 as u8 as f64);
        p_y2_x_m0[g] += w * (1.0 - pm2) * py2;
        for m2 in [false, true] {
            let wm = w * if m2 { pm2 } else { 1.0 - pm2 };
            for y2 in [false, true] {
                joint[state_index(c, x, y1, m2, y2)] = wm * if y2 { py2 } else { 1.0 - py2 };
            }
        }
    }

    let cond = |num: [f64; 2], den: [f64; 2]| -> [Option<f64>; 2] {
        let mut out = [None; 2];
        for g in 0..2 {
            if den[g] > 0.0 {
                out[g] = Some(num[g] / den[g]);
            }
        }
        out
    };
    let mean_y1_all = cond(p_y1_x, p_x);
    let mean_y1_completers = cond(p_y1_x_m0, p_x_m0);
    let mean_y2_completers = cond(p_y2_x_m0, p_x_m0);

    Ok(PopulationEstimands {
        joint,
        marginal_dropout,
        mean_y1_all,
        mean_y1_completers,
        mean_y2_completers,
        perr_prev: ratio_of_ratios(mean_y2_completers, Some(mean_y1_all)),
        perr_comp: ratio_of_ratios(mean_y2_completers, Some(mean_y1_completers)),
        rr: ratio_of_ratios(mean_y2_completers, None),
    })
}
