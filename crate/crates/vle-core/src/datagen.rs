//! Deterministic synthetic cohort generator with analytically known ground
//! truth, used to verify every estimator in the pipeline.
//!
//! Each student draws an archetype, then per week either stays at zero
//! activity (with the archetype's zero probability) or produces
//! `1 + Poisson(mean - 1)` clicks spread over the week's days and content
//! types. All randomness comes from streams keyed by
//! `(seed, purpose, student, week)`, so output is identical under any
//! iteration or parallel schedule, and ground-truth state distributions,
//! transition matrices and flag conditionals follow from the spec in closed
//! form rather than from sampling.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bayes::{FailClass, FlagId};
use crate::discretize::Binning;
use crate::features::Outcome;
use crate::model::{
    AssessmentRecord, ClickRecord, ContentType, Dataset, DatasetError, PresentationConfig,
    StudentId,
};
use crate::rng::KeyedRng;

/// Mean clicks per active week must stay below this bound so Poisson math
/// stays in range.
pub const MAX_MEAN_CLICKS: f64 = 500.0;

/// Largest cohort the generator will produce (keeps ids fixed-width).
pub const MAX_STUDENTS: usize = 1_000_000;

// stream purposes
const P_ARCHETYPE: u64 = 1;
const P_WEEK: u64 = 2;
const P_OUTCOME: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum DatagenError {
    NoArchetypes,
    WeightSum(f64),
    OutcomeSum { archetype: String, sum: f64 },
    BadZeroProb { archetype: String, week: usize },
    BadMean { archetype: String, week: usize },
    BadPropensity { archetype: String },
    WrongVectorLength { archetype: String },
    TooManyStudents(usize),
    Dataset(DatasetError),
}

impl fmt::Display for DatagenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatagenError::NoArchetypes => write!(f, "InvalidSpec: no archetypes"),
            DatagenError::WeightSum(s) => {
                write!(f, "InvalidSpec: archetype weights sum to {s}, expected 1")
            }
            DatagenError::OutcomeSum { archetype, sum } => write!(
                f,
                "InvalidSpec: outcome distribution of `{archetype}` sums to {sum}"
            ),
            DatagenError::BadZeroProb { archetype, week } => write!(
                f,
                "InvalidSpec: zero probability of `{archetype}` week {week} outside [0,1]"
            ),
            DatagenError::BadMean { archetype, week } => write!(
                f,
                "InvalidSpec: mean clicks of `{archetype}` week {week} outside [1,{MAX_MEAN_CLICKS}]"
            ),
            DatagenError::BadPropensity { archetype } => write!(
                f,
                "InvalidSpec: `{archetype}` needs non-negative propensities with positive sum"
            ),
            DatagenError::WrongVectorLength { archetype } => write!(
                f,
                "InvalidSpec: `{archetype}` vector lengths must match weeks and vocabulary"
            ),
            DatagenError::TooManyStudents(n) => {
                write!(f, "InvalidSpec: {n} students exceeds {MAX_STUDENTS}")
            }
            DatagenError::Dataset(e) => write!(f, "InvalidSpec: {e}"),
        }
    }
}

impl core::error::Error for DatagenError {}

/// One behavioural profile in the cohort mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchetypeSpec {
    pub name: String,
    /// Mixture weight; weights sum to 1 over the spec.
    pub weight: f64,
    /// P(zero activity) per week 0..=num_weeks.
    pub zero_prob: Vec<f64>,
    /// Mean clicks in an active week (conditional on activity), per week.
    pub mean_active_clicks: Vec<f64>,
    /// Unnormalized click share per content type, in vocabulary order.
    pub type_propensity: Vec<f64>,
    /// P(NotSubmitted, Failed, Passed).
    pub outcome_dist: [f64; 3],
}

/// Full generator specification.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub config: PresentationConfig,
    pub n_students: usize,
    pub archetypes: Vec<ArchetypeSpec>,
    pub seed: u64,
}

impl CohortSpec {
    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.archetypes.is_empty() {
            return Err(DatagenError::NoArchetypes);
        }
        if self.n_students > MAX_STUDENTS {
            return Err(DatagenError::TooManyStudents(self.n_students));
        }
        let weight_sum: f64 = self.archetypes.iter().map(|a| a.weight).sum();
        if libm::fabs(weight_sum - 1.0) > 1e-9 {
            return Err(DatagenError::WeightSum(weight_sum));
        }
        let weeks = self.config.num_weeks as usize + 1;
        let types = self.config.vocabulary.len();
        for arch in &self.archetypes {
            if arch.zero_prob.len() != weeks
                || arch.mean_active_clicks.len() != weeks
                || arch.type_propensity.len() != types
            {
                return Err(DatagenError::WrongVectorLength {
                    archetype: arch.name.clone(),
                });
            }
            let outcome_sum: f64 = arch.outcome_dist.iter().sum();
            if libm::fabs(outcome_sum - 1.0) > 1e-9 || arch.outcome_dist.iter().any(|&p| p < 0.0) {
                return Err(DatagenError::OutcomeSum {
                    archetype: arch.name.clone(),
                    sum: outcome_sum,
                });
            }
            for (week, &z) in arch.zero_prob.iter().enumerate() {
                if !(0.0..=1.0).contains(&z) {
                    return Err(DatagenError::BadZeroProb {
                        archetype: arch.name.clone(),
                        week,
                    });
                }
            }
            for (week, &m) in arch.mean_active_clicks.iter().enumerate() {
                if !(1.0..=MAX_MEAN_CLICKS).contains(&m) {
                    return Err(DatagenError::BadMean {
                        archetype: arch.name.clone(),
                        week,
                    });
                }
            }
            if arch.type_propensity.iter().any(|&p| p < 0.0)
                || arch.type_propensity.iter().sum::<f64>() <= 0.0
            {
                return Err(DatagenError::BadPropensity {
                    archetype: arch.name.clone(),
                });
            }
        }
        Ok(())
    }
}

/// The shipped default cohort: three personas (engaged / lurker / at-risk),
/// each split into low/mid/high intensity tiers. Zero-activity profiles, not
/// intensity, carry the week-pattern contrasts: the at-risk persona goes
/// quiet in weeks 2-4, the lurker persona starts slow but recovers, and only
/// the engaged persona touches quizzes.
pub fn default_spec(seed: u64, n_students: usize) -> CohortSpec {
    let config = PresentationConfig::default();
    let tier_weights: [(&str, f64); 3] = [("low", 0.30), ("mid", 0.45), ("high", 0.25)];
    let personas: [(&str, f64, [f64; 6], [f64; 3], Vec<f64>, [f64; 3]); 3] = [
        (
            "engaged",
            0.40,
            [0.35, 0.05, 0.05, 0.05, 0.05, 0.08],
            [30.0, 75.0, 150.0],
            vec![3.0, 1.0, 2.0, 4.0, 2.0, 1.0, 3.0, 1.0, 0.5, 1.0, 0.5],
            [0.03, 0.07, 0.90],
        ),
        (
            "lurker",
            0.30,
            [0.55, 0.10, 0.12, 0.10, 0.12, 0.25],
            [18.0, 45.0, 81.0],
            vec![1.0, 0.5, 3.0, 0.0, 3.0, 1.0, 2.0, 1.0, 0.5, 1.0, 0.0],
            [0.10, 0.12, 0.78],
        ),
        (
            "at_risk",
            0.30,
            [0.45, 0.25, 0.55, 0.75, 0.85, 0.90],
            [5.5, 14.0, 28.0],
            vec![2.0, 0.5, 2.0, 0.0, 2.0, 1.0, 1.0, 0.5, 0.0, 0.5, 0.0],
            [0.90, 0.08, 0.02],
        ),
    ];

    let mut archetypes = Vec::new();
    for (persona, weight, zero, tier_means, propensity, outcomes) in &personas {
        for ((tier, tier_weight), &mean) in tier_weights.iter().zip(tier_means) {
            let mean = mean.max(1.0);
            archetypes.push(ArchetypeSpec {
                name: format!("{persona}_{tier}"),
                weight: weight * tier_weight,
                zero_prob: zero.to_vec(),
                mean_active_clicks: vec![mean; 6],
                type_propensity: propensity.clone(),
                outcome_dist: *outcomes,
            });
        }
    }

    CohortSpec {
        config,
        n_students,
        archetypes,
        seed,
    }
}

/// What actually happened to one generated student.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudentTruth {
    pub student: StudentId,
    pub archetype: usize,
    pub weekly_totals: Vec<u64>,
    pub outcome: Outcome,
}

/// Everything generated for one student; `assemble` merges these.
#[derive(Debug, Clone)]
pub struct StudentData {
    pub clicks: Vec<ClickRecord>,
    pub assessment: AssessmentRecord,
    pub truth: StudentTruth,
}

/// Realized per-student emissions plus the closed-form distributions the
/// cohort was drawn from.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub spec: CohortSpec,
    pub students: Vec<StudentTruth>,
}

fn student_id(index: usize) -> StudentId {
    StudentId::new(format!("s{index:06}"))
}

/// Generates one student; independent of all other students by construction.
pub fn generate_student(spec: &CohortSpec, index: usize) -> StudentData {
    let id = student_id(index);
    let i = index as u64;
    let seed = spec.seed;
    let config = &spec.config;

    let archetype = {
        let mut rng = KeyedRng::from_key(&[seed, P_ARCHETYPE, i]);
        let weights: Vec<f64> = spec.archetypes.iter().map(|a| a.weight).collect();
        rng.categorical(&weights)
    };
    let arch = &spec.archetypes[archetype];

    let mut weekly_totals = Vec::with_capacity(config.num_weeks as usize + 1);
    let mut cells: BTreeMap<(i32, usize), u32> = BTreeMap::new();
    for week in 0..=config.num_weeks as usize {
        let mut rng = KeyedRng::from_key(&[seed, P_WEEK, i, week as u64]);
        let total = if rng.bernoulli(arch.zero_prob[week]) {
            0
        } else {
            1 + rng.poisson(arch.mean_active_clicks[week] - 1.0)
        };
        weekly_totals.push(total);
        for _ in 0..total {
            let ty = rng.categorical(&arch.type_propensity);
            let day = if week == 0 {
                rng.uniform_inclusive(-7, -1) as i32
            } else {
                let first = (week as i64 - 1) * 7;
                rng.uniform_inclusive(first, first + 6) as i32
            };
            *cells.entry((day, ty)).or_insert(0) += 1;
        }
    }

    let outcome = {
        let mut rng = KeyedRng::from_key(&[seed, P_OUTCOME, i]);
        let outcome = Outcome::ALL[rng.categorical(&arch.outcome_dist)];
        let threshold = i64::from(config.pass_threshold);
        let score = match outcome {
            Outcome::NotSubmitted => None,
            Outcome::Failed => Some(rng.uniform_inclusive(0, threshold - 1) as u8),
            Outcome::Passed => Some(rng.uniform_inclusive(threshold, 100) as u8),
        };
        AssessmentRecord {
            student: id.clone(),
            tma_index: config.tma_of_interest,
            score,
        }
    };

    let clicks = cells
        .into_iter()
        .map(|((day, ty), clicks)| ClickRecord {
            student: id.clone(),
            day_offset: day,
            content_type: content_type_at(config, ty),
            clicks,
        })
        .collect();

    StudentData {
        clicks,
        assessment: outcome.clone(),
        truth: StudentTruth {
            student: id,
            archetype,
            weekly_totals,
            outcome: match outcome.score {
                None => Outcome::NotSubmitted,
                Some(s) if u32::from(s) >= u32::from(config.pass_threshold) => Outcome::Passed,
                Some(_) => Outcome::Failed,
            },
        },
    }
}

fn content_type_at(config: &PresentationConfig, index: usize) -> ContentType {
    config
        .vocabulary
        .iter()
        .nth(index)
        .expect("propensity length is validated against the vocabulary")
}

/// Merges per-student outputs (index order) into a dataset and ground truth.
pub fn assemble(
    spec: &CohortSpec,
    students: Vec<StudentData>,
) -> Result<(Dataset, GroundTruth), DatagenError> {
    let mut clicks = Vec::new();
    let mut assessments = Vec::with_capacity(students.len());
    let mut truths = Vec::with_capacity(students.len());
    for s in students {
        clicks.extend(s.clicks);
        assessments.push(s.assessment);
        truths.push(s.truth);
    }
    let dataset =
        Dataset::new(clicks, assessments, spec.config.clone()).map_err(DatagenError::Dataset)?;
    Ok((
        dataset,
        GroundTruth {
            spec: spec.clone(),
            students: truths,
        },
    ))
}

/// Generates the whole cohort sequentially.
pub fn generate(spec: &CohortSpec) -> Result<(Dataset, GroundTruth), DatagenError> {
    spec.validate()?;
    let students = (0..spec.n_students)
        .map(|i| generate_student(spec, i))
        .collect();
    assemble(spec, students)
}

// ---- closed-form distributions ---------------------------------------------

impl CohortSpec {
    /// P(weekly total lands in each bin) for one archetype and week, from the
    /// zero-inflation plus shifted-Poisson law the generator samples.
    pub fn state_pmf(&self, archetype: usize, week: usize, binning: &Binning) -> Vec<f64> {
        let arch = &self.archetypes[archetype];
        let z = arch.zero_prob[week];
        let lambda = arch.mean_active_clicks[week] - 1.0;
        let mut pmf = vec![0.0; binning.bin_count()];
        pmf[binning.apply(0)] += z;

        let top = binning
            .boundaries
            .last()
            .map(|&b| libm::floor(b) as u64)
            .unwrap_or(0);
        // P(total = v) for v >= 1 is (1-z) * Poisson(v-1; lambda)
        let mut pois = libm::exp(-lambda); // Poisson pmf at 0
        let mut covered = 0.0;
        for v in 1..=top {
            pmf[binning.apply(v)] += (1.0 - z) * pois;
            covered += pois;
            pois *= lambda / v as f64;
        }
        // everything beyond the last boundary sits in the top bin
        pmf[binning.bin_count() - 1] += (1.0 - z) * (1.0 - covered);
        pmf
    }

    /// Mixture state distribution for a week.
    pub fn mixture_state_pmf(&self, week: usize, binning: &Binning) -> Vec<f64> {
        let mut pmf = vec![0.0; binning.bin_count()];
        for (ai, arch) in self.archetypes.iter().enumerate() {
            for (bin, p) in self.state_pmf(ai, week, binning).into_iter().enumerate() {
                pmf[bin] += arch.weight * p;
            }
        }
        pmf
    }

    /// True transition matrices of one archetype: weekly states are
    /// independent given the archetype, so every defined row of step `w`
    /// equals the week `w+1` state distribution.
    pub fn archetype_transitions(&self, archetype: usize, binning: &Binning) -> Vec<Vec<Vec<f64>>> {
        let weeks = self.config.num_weeks as usize + 1;
        let states = binning.bin_count();
        (0..weeks - 1)
            .map(|w| {
                let cur = self.state_pmf(archetype, w, binning);
                let next = self.state_pmf(archetype, w + 1, binning);
                (0..states)
                    .map(|s| {
                        if cur[s] > 0.0 {
                            next.clone()
                        } else {
                            vec![0.0; states]
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// True cohort-level transition matrices: rows condition on the current
    /// state, which reweights the archetype mixture,
    /// `P(next=t | cur=s) = sum_a w_a p_a(s) p_a(t) / sum_a w_a p_a(s)`.
    /// Rows for states with zero occupancy are all zero (undefined).
    pub fn mixture_transitions(&self, binning: &Binning) -> Vec<Vec<Vec<f64>>> {
        let weeks = self.config.num_weeks as usize + 1;
        let states = binning.bin_count();
        let pmfs: Vec<Vec<Vec<f64>>> = (0..weeks)
            .map(|w| {
                (0..self.archetypes.len())
                    .map(|a| self.state_pmf(a, w, binning))
                    .collect()
            })
            .collect();
        (0..weeks - 1)
            .map(|w| {
                (0..states)
                    .map(|s| {
                        let occupancy: f64 = self
                            .archetypes
                            .iter()
                            .enumerate()
                            .map(|(a, arch)| arch.weight * pmfs[w][a][s])
                            .sum();
                        if occupancy <= 0.0 {
                            return vec![0.0; states];
                        }
                        (0..states)
                            .map(|t| {
                                let joint: f64 = self
                                    .archetypes
                                    .iter()
                                    .enumerate()
                                    .map(|(a, arch)| {
                                        arch.weight * pmfs[w][a][s] * pmfs[w + 1][a][t]
                                    })
                                    .sum();
                                joint / occupancy
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// P(zero activity) in a week under the mixture.
    pub fn zero_rate(&self, week: usize) -> f64 {
        self.archetypes
            .iter()
            .map(|a| a.weight * a.zero_prob[week])
            .sum()
    }

    /// Cohort outcome distribution.
    pub fn outcome_rates(&self) -> [f64; 3] {
        let mut rates = [0.0; 3];
        for arch in &self.archetypes {
            for (i, p) in arch.outcome_dist.iter().enumerate() {
                rates[i] += arch.weight * p;
            }
        }
        rates
    }

    /// P(flag = 1) for one archetype: a week flag is just activity; a type
    /// flag thins the shifted-Poisson total by the type's propensity share,
    /// giving `1 - (1-q) * exp(-lambda * q)` for the active branch.
    pub fn archetype_flag_rate(&self, archetype: usize, flag: &FlagId) -> f64 {
        let arch = &self.archetypes[archetype];
        let week = flag.week.index();
        let active = 1.0 - arch.zero_prob[week];
        match flag.content_type {
            None => active,
            Some(ty) => {
                let total: f64 = arch.type_propensity.iter().sum();
                let q = arch.type_propensity[ty.index()] / total;
                if q <= 0.0 {
                    return 0.0;
                }
                let lambda = arch.mean_active_clicks[week] - 1.0;
                active * (1.0 - (1.0 - q) * libm::exp(-lambda * q))
            }
        }
    }

    /// P(flag = 1 | class) under the mixture, where the class is the fail or
    /// pass side of the given fail-class split.
    pub fn flag_conditional(&self, flag: &FlagId, fail_class: FailClass, fail_side: bool) -> f64 {
        let mut class_mass = 0.0;
        let mut joint = 0.0;
        for (ai, arch) in self.archetypes.iter().enumerate() {
            let p_class: f64 = Outcome::ALL
                .iter()
                .filter(|&&o| fail_class.is_fail(o) == fail_side)
                .map(|&o| arch.outcome_dist[o.index()])
                .sum();
            class_mass += arch.weight * p_class;
            joint += arch.weight * p_class * self.archetype_flag_rate(ai, flag);
        }
        if class_mass <= 0.0 {
            0.0
        } else {
            joint / class_mass
        }
    }
}
