//! ASSOC-style association miner: enumerates antecedent conjunctions over
//! categorical activity attributes, evaluates each against a fixed outcome
//! succedent through a 4ft contingency table, and emits the hypotheses whose
//! quantifier holds.
//!
//! The search walks attributes in index order so every antecedent is visited
//! exactly once, keeps per-literal student bitsets so extending an antecedent
//! is a word-wise AND, and exploits that the `a` cell of the 4ft table can
//! only shrink as literals are added.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::discretize::Binning;
use crate::features::{CohortFeatures, Outcome, StudyWeek};
use crate::model::{ContentType, StudentId, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuhaError {
    EmptyAttributeSpace,
    EmptyMatrix,
    UnknownAttribute { index: usize },
    BadCategory { attribute: usize, category: usize },
    /// An attribute needs at least two categories to carry information.
    DegenerateAttribute { id: String },
    MissingOutcome(StudentId),
    BadQuantifier(String),
}

impl fmt::Display for GuhaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuhaError::EmptyAttributeSpace => write!(f, "EmptyAttributeSpace: no attributes"),
            GuhaError::EmptyMatrix => write!(f, "EmptyMatrix: no students"),
            GuhaError::UnknownAttribute { index } => {
                write!(f, "UnknownAttribute: index {index} not in the matrix")
            }
            GuhaError::BadCategory {
                attribute,
                category,
            } => write!(
                f,
                "BadCategory: category {category} out of range for attribute {attribute}"
            ),
            GuhaError::DegenerateAttribute { id } => {
                write!(f, "DegenerateAttribute: `{id}` has fewer than two categories")
            }
            GuhaError::MissingOutcome(s) => write!(f, "MissingOutcome: student {s} is unlabeled"),
            GuhaError::BadQuantifier(s) => write!(f, "BadQuantifier: {s}"),
        }
    }
}

impl core::error::Error for GuhaError {}

/// Where an attribute's categories come from.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeSource {
    /// Whole-week activity flag (categories: 0 = inactive, 1 = active).
    WeekFlag(StudyWeek),
    /// Activity flag for one content type in one week.
    TypeFlag(StudyWeek, ContentType),
    /// Binned click count for a week, over all types or one type.
    BinnedCount {
        week: StudyWeek,
        content_type: Option<ContentType>,
        binning: Binning,
    },
}

/// One categorical attribute of the mining matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub id: String,
    pub source: AttributeSource,
    pub arity: usize,
}

impl Attribute {
    pub fn week_flag(week: StudyWeek) -> Self {
        Attribute {
            id: format!("{week}_active"),
            source: AttributeSource::WeekFlag(week),
            arity: 2,
        }
    }

    pub fn type_flag(week: StudyWeek, ty: ContentType, vocabulary: &Vocabulary) -> Self {
        Attribute {
            id: format!("{week}_{}", vocabulary.name(ty)),
            source: AttributeSource::TypeFlag(week, ty),
            arity: 2,
        }
    }

    pub fn binned_total(week: StudyWeek, binning: Binning) -> Result<Self, GuhaError> {
        let id = format!("{week}_total");
        if binning.bin_count() < 2 {
            return Err(GuhaError::DegenerateAttribute { id });
        }
        Ok(Attribute {
            id,
            arity: binning.bin_count(),
            source: AttributeSource::BinnedCount {
                week,
                content_type: None,
                binning,
            },
        })
    }

    pub fn binned_type(
        week: StudyWeek,
        ty: ContentType,
        binning: Binning,
        vocabulary: &Vocabulary,
    ) -> Result<Self, GuhaError> {
        let id = format!("{week}_{}_count", vocabulary.name(ty));
        if binning.bin_count() < 2 {
            return Err(GuhaError::DegenerateAttribute { id });
        }
        Ok(Attribute {
            id,
            arity: binning.bin_count(),
            source: AttributeSource::BinnedCount {
                week,
                content_type: Some(ty),
                binning,
            },
        })
    }

    fn category_of(&self, feats: &crate::features::WeeklyFeatures) -> usize {
        match &self.source {
            AttributeSource::WeekFlag(w) => usize::from(feats.week_active(*w)),
            AttributeSource::TypeFlag(w, t) => usize::from(feats.type_active(*w, *t)),
            AttributeSource::BinnedCount {
                week,
                content_type,
                binning,
            } => {
                let count = match content_type {
                    None => feats.total_clicks(*week),
                    Some(t) => feats.type_clicks(*week, *t),
                };
                binning.apply(count)
            }
        }
    }

    /// Rendering of one category: bare 0/1 for flags, `bin<i>` for counts.
    pub fn category_label(&self, category: usize) -> String {
        match &self.source {
            AttributeSource::WeekFlag(_) | AttributeSource::TypeFlag(_, _) => {
                format!("{category}")
            }
            AttributeSource::BinnedCount { .. } => format!("bin{category}"),
        }
    }
}

/// One attribute-category condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    /// Index into the matrix's attribute list.
    pub attribute: usize,
    pub category: usize,
}

/// Conjunction of literals, at most one per attribute, kept sorted by
/// attribute index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Antecedent {
    pub literals: Vec<Literal>,
}

impl Antecedent {
    pub fn new(mut literals: Vec<Literal>) -> Self {
        literals.sort_unstable();
        debug_assert!(
            literals.windows(2).all(|w| w[0].attribute < w[1].attribute),
            "at most one literal per attribute"
        );
        Antecedent { literals }
    }

    pub fn render(&self, attributes: &[Attribute]) -> String {
        let parts: Vec<String> = self
            .literals
            .iter()
            .map(|l| {
                let attr = &attributes[l.attribute];
                format!("{}={}", attr.id, attr.category_label(l.category))
            })
            .collect();
        parts.join(" & ")
    }
}

/// 2x2 contingency table of antecedent and succedent over the cohort:
/// `a` both hold, `b` antecedent only, `c` succedent only, `d` neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourFt {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl FourFt {
    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// `a / (a+b)`; 0 when the antecedent is empty.
    pub fn confidence(&self) -> f64 {
        if self.a + self.b == 0 {
            0.0
        } else {
            self.a as f64 / (self.a + self.b) as f64
        }
    }

    /// `a / n`.
    pub fn support(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.a as f64 / self.n() as f64
        }
    }
}

/// Interestingness predicate over a 4ft table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantifierSpec {
    /// Holds when `a >= base` and `a/(a+b) >= p`.
    FoundedImplication { p: f64, base: u64 },
    /// Holds when `a >= base` and `a/(a+b) >= q * (a+c)/n`.
    AboveAverage { q: f64, base: u64 },
}

impl QuantifierSpec {
    pub fn base(&self) -> u64 {
        match self {
            QuantifierSpec::FoundedImplication { base, .. } => *base,
            QuantifierSpec::AboveAverage { base, .. } => *base,
        }
    }

    pub fn validate(&self) -> Result<(), GuhaError> {
        match *self {
            QuantifierSpec::FoundedImplication { p, base } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(GuhaError::BadQuantifier(format!(
                        "founded implication needs p in (0,1], got {p}"
                    )));
                }
                if base < 1 {
                    return Err(GuhaError::BadQuantifier("base must be >= 1".into()));
                }
            }
            QuantifierSpec::AboveAverage { q, base } => {
                if !(q > 1.0) {
                    return Err(GuhaError::BadQuantifier(format!(
                        "above average needs q > 1, got {q}"
                    )));
                }
                if base < 1 {
                    return Err(GuhaError::BadQuantifier("base must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Compact `fi:<p>:<base>` / `aa:<q>:<base>` form used by files and flags.
    pub fn parse(text: &str) -> Result<Self, GuhaError> {
        let parts: Vec<&str> = text.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(GuhaError::BadQuantifier(format!(
                "expected kind:param:base, got `{text}`"
            )));
        }
        let param: f64 = parts[1]
            .parse()
            .map_err(|_| GuhaError::BadQuantifier(format!("bad parameter `{}`", parts[1])))?;
        let base: u64 = parts[2]
            .parse()
            .map_err(|_| GuhaError::BadQuantifier(format!("bad base `{}`", parts[2])))?;
        let spec = match parts[0] {
            "fi" => QuantifierSpec::FoundedImplication { p: param, base },
            "aa" => QuantifierSpec::AboveAverage { q: param, base },
            other => {
                return Err(GuhaError::BadQuantifier(format!(
                    "unknown quantifier kind `{other}` (expected fi or aa)"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for QuantifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantifierSpec::FoundedImplication { p, base } => write!(f, "fi:{p}:{base}"),
            QuantifierSpec::AboveAverage { q, base } => write!(f, "aa:{q}:{base}"),
        }
    }
}

/// Outcome of evaluating a quantifier on one table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantifierEval {
    pub satisfied: bool,
    pub confidence: f64,
    pub support: f64,
}

pub fn eval_quantifier(table: &FourFt, spec: &QuantifierSpec) -> QuantifierEval {
    let confidence = table.confidence();
    let support = table.support();
    let satisfied = match *spec {
        QuantifierSpec::FoundedImplication { p, base } => {
            table.a + table.b > 0 && table.a >= base && confidence >= p
        }
        QuantifierSpec::AboveAverage { q, base } => {
            let n = table.n();
            table.a >= base
                && n > 0
                && table.a + table.b > 0
                && confidence >= q * ((table.a + table.c) as f64 / n as f64)
        }
    };
    QuantifierEval {
        satisfied,
        confidence,
        support,
    }
}

/// May any extension of a partial antecedent with this `a` count still reach
/// the quantifier's base? Adding literals never increases `a`, so once `a`
/// drops below base the whole subtree is settled.
pub fn prune_bound(partial_a: u64, spec: &QuantifierSpec) -> bool {
    partial_a >= spec.base()
}

/// A mined rule: antecedent, outcome-class succedent, its table and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub antecedent: Antecedent,
    pub succedent: Outcome,
    pub table: FourFt,
    pub confidence: f64,
    pub support: f64,
    pub quantifier_satisfied: bool,
}

/// Categorical data matrix: one category column per attribute plus the
/// outcome column, rows in sorted student order.
#[derive(Debug, Clone)]
pub struct CategoricalMatrix {
    attributes: Vec<Attribute>,
    columns: Vec<Vec<u16>>,
    outcomes: Vec<Outcome>,
    students: Vec<StudentId>,
}

impl CategoricalMatrix {
    pub fn build(
        features: &CohortFeatures,
        outcomes: &alloc::collections::BTreeMap<StudentId, Outcome>,
        attributes: Vec<Attribute>,
    ) -> Result<Self, GuhaError> {
        let mut columns = alloc::vec![Vec::with_capacity(features.len()); attributes.len()];
        let mut out = Vec::with_capacity(features.len());
        let mut students = Vec::with_capacity(features.len());
        for (student, feats) in features.iter() {
            let outcome = *outcomes
                .get(student)
                .ok_or_else(|| GuhaError::MissingOutcome(student.clone()))?;
            for (ai, attr) in attributes.iter().enumerate() {
                let cat = attr.category_of(feats);
                debug_assert!(cat < attr.arity);
                columns[ai].push(cat as u16);
            }
            out.push(outcome);
            students.push(student.clone());
        }
        Ok(CategoricalMatrix {
            attributes,
            columns,
            outcomes: out,
            students,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.outcomes.len()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn students(&self) -> &[StudentId] {
        &self.students
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn category(&self, attribute: usize, row: usize) -> u16 {
        self.columns[attribute][row]
    }
}

/// Exact 4ft counts for an antecedent/succedent pair by row scan.
pub fn build_4ft(
    matrix: &CategoricalMatrix,
    antecedent: &Antecedent,
    succedent: Outcome,
) -> Result<FourFt, GuhaError> {
    for lit in &antecedent.literals {
        let attr = matrix
            .attributes
            .get(lit.attribute)
            .ok_or(GuhaError::UnknownAttribute {
                index: lit.attribute,
            })?;
        if lit.category >= attr.arity {
            return Err(GuhaError::BadCategory {
                attribute: lit.attribute,
                category: lit.category,
            });
        }
    }
    let mut t = FourFt {
        a: 0,
        b: 0,
        c: 0,
        d: 0,
    };
    for row in 0..matrix.n_rows() {
        let ante = antecedent
            .literals
            .iter()
            .all(|l| matrix.columns[l.attribute][row] as usize == l.category);
        let succ = matrix.outcomes[row] == succedent;
        match (ante, succ) {
            (true, true) => t.a += 1,
            (true, false) => t.b += 1,
            (false, true) => t.c += 1,
            (false, false) => t.d += 1,
        }
    }
    Ok(t)
}

// ---- bitset helpers -------------------------------------------------------

fn bitset_new(n: usize) -> Vec<u64> {
    alloc::vec![0u64; n.div_ceil(64)]
}

fn bitset_full(n: usize) -> Vec<u64> {
    let mut v = alloc::vec![!0u64; n.div_ceil(64)];
    let tail = n % 64;
    if tail != 0 {
        if let Some(last) = v.last_mut() {
            *last = (1u64 << tail) - 1;
        }
    }
    v
}

fn bitset_set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn and_into(dst: &mut [u64], a: &[u64], b: &[u64]) {
    for ((d, &x), &y) in dst.iter_mut().zip(a).zip(b) {
        *d = x & y;
    }
}

fn count(bits: &[u64]) -> u64 {
    bits.iter().map(|w| u64::from(w.count_ones())).sum()
}

fn and_count(a: &[u64], b: &[u64]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| u64::from((x & y).count_ones()))
        .sum()
}

// ---------------------------------------------------------------------------

/// Total order on mined hypotheses: confidence desc, support desc, antecedent
/// literals ascending, succedent index ascending. Confidence and support are
/// compared as exact rationals so ties do not depend on float rounding.
pub fn hypothesis_order(x: &Hypothesis, y: &Hypothesis) -> Ordering {
    // confidence: a1/(a1+b1) vs a2/(a2+b2), cross-multiplied
    let lhs = u128::from(x.table.a) * u128::from(y.table.a + y.table.b);
    let rhs = u128::from(y.table.a) * u128::from(x.table.a + x.table.b);
    rhs.cmp(&lhs) // descending confidence
        .then_with(|| y.table.a.cmp(&x.table.a)) // descending support (same n)
        .then_with(|| x.antecedent.cmp(&y.antecedent))
        .then_with(|| x.succedent.index().cmp(&y.succedent.index()))
}

/// Mines every antecedent of length 1..=`max_length` against each requested
/// succedent class and returns the hypotheses whose quantifier holds, in the
/// deterministic order of [`hypothesis_order`].
pub fn mine_assoc(
    matrix: &CategoricalMatrix,
    succedents: &[Outcome],
    spec: &QuantifierSpec,
    max_length: usize,
) -> Result<Vec<Hypothesis>, GuhaError> {
    mine_assoc_with(matrix, succedents, spec, max_length, true)
}

/// [`mine_assoc`] with the base-bound pruning toggleable; both settings must
/// produce identical output (the pruning is sound, not heuristic).
pub fn mine_assoc_with(
    matrix: &CategoricalMatrix,
    succedents: &[Outcome],
    spec: &QuantifierSpec,
    max_length: usize,
    prune: bool,
) -> Result<Vec<Hypothesis>, GuhaError> {
    spec.validate()?;
    if matrix.attributes.is_empty() {
        return Err(GuhaError::EmptyAttributeSpace);
    }
    if matrix.n_rows() == 0 {
        return Err(GuhaError::EmptyMatrix);
    }
    let n = matrix.n_rows();
    let max_length = max_length.max(1);

    // per-literal row bitsets
    let literal_bits: Vec<Vec<Vec<u64>>> = matrix
        .attributes
        .iter()
        .enumerate()
        .map(|(ai, attr)| {
            let mut per_cat = alloc::vec![bitset_new(n); attr.arity];
            for (row, &cat) in matrix.columns[ai].iter().enumerate() {
                bitset_set(&mut per_cat[cat as usize], row);
            }
            per_cat
        })
        .collect();

    let succ_bits: Vec<Vec<u64>> = succedents
        .iter()
        .map(|&o| {
            let mut bits = bitset_new(n);
            for (row, &out) in matrix.outcomes.iter().enumerate() {
                if out == o {
                    bitset_set(&mut bits, row);
                }
            }
            bits
        })
        .collect();
    let succ_counts: Vec<u64> = succ_bits.iter().map(|b| count(b)).collect();

    let mut miner = Miner {
        matrix,
        spec,
        max_length,
        prune,
        literal_bits,
        succ_bits,
        succ_counts,
        succedents,
        n: n as u64,
        found: Vec::new(),
    };

    let all = bitset_full(n);
    let viable: Vec<usize> = (0..succedents.len()).collect();
    let mut lits: Vec<Literal> = Vec::with_capacity(max_length);
    miner.descend(0, &all, &viable, &mut lits);

    let mut found = miner.found;
    found.sort_by(hypothesis_order);
    Ok(found)
}

struct Miner<'a> {
    matrix: &'a CategoricalMatrix,
    spec: &'a QuantifierSpec,
    max_length: usize,
    prune: bool,
    literal_bits: Vec<Vec<Vec<u64>>>,
    succ_bits: Vec<Vec<u64>>,
    succ_counts: Vec<u64>,
    succedents: &'a [Outcome],
    n: u64,
    found: Vec<Hypothesis>,
}

impl Miner<'_> {
    fn descend(
        &mut self,
        first_attr: usize,
        current: &[u64],
        viable: &[usize],
        lits: &mut Vec<Literal>,
    ) {
        for attr in first_attr..self.matrix.attributes.len() {
            for cat in 0..self.matrix.attributes[attr].arity {
                let mut child = bitset_new(self.matrix.n_rows());
                and_into(&mut child, current, &self.literal_bits[attr][cat]);
                let ante_support = count(&child);

                lits.push(Literal {
                    attribute: attr,
                    category: cat,
                });

                let mut still_viable: Vec<usize> = Vec::with_capacity(viable.len());
                for &si in viable {
                    let a = and_count(&child, &self.succ_bits[si]);
                    let table = FourFt {
                        a,
                        b: ante_support - a,
                        c: self.succ_counts[si] - a,
                        d: self.n - ante_support - (self.succ_counts[si] - a),
                    };
                    let eval = eval_quantifier(&table, self.spec);
                    if eval.satisfied {
                        self.found.push(Hypothesis {
                            antecedent: Antecedent {
                                literals: lits.clone(),
                            },
                            succedent: self.succedents[si],
                            table,
                            confidence: eval.confidence,
                            support: eval.support,
                            quantifier_satisfied: true,
                        });
                    }
                    if !self.prune || prune_bound(a, self.spec) {
                        still_viable.push(si);
                    }
                }

                if lits.len() < self.max_length && !still_viable.is_empty() {
                    self.descend(attr + 1, &child, &still_viable, lits);
                }
                lits.pop();
            }
        }
    }
}

/// The default attribute space: week flags, per-type flags, and an
/// equal-frequency binned total per week. Weeks whose totals cannot support
/// at least two bins contribute flags only.
pub fn default_attribute_space(
    features: &CohortFeatures,
    weeks: crate::features::WeekRange,
    vocabulary: &Vocabulary,
    bins: usize,
) -> Vec<Attribute> {
    let mut attrs = Vec::new();
    for week in weeks.iter() {
        attrs.push(Attribute::week_flag(week));
        for ty in vocabulary.iter() {
            attrs.push(Attribute::type_flag(week, ty, vocabulary));
        }
        let totals: Vec<u64> = features
            .iter()
            .map(|(_, f)| f.total_clicks(week))
            .collect();
        if let Ok(binning) = crate::discretize::equal_frequency_bins(&totals, bins) {
            if let Ok(attr) = Attribute::binned_total(week, binning) {
                attrs.push(attr);
            }
        }
    }
    attrs
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    /// Builds a matrix directly from category columns (students s0, s1, ...).
    fn matrix_from(columns: Vec<(usize, Vec<u16>)>, outcomes: Vec<Outcome>) -> CategoricalMatrix {
        let attributes: Vec<Attribute> = columns
            .iter()
            .enumerate()
            .map(|(i, (arity, _))| Attribute {
                id: format!("attr{i}"),
                source: AttributeSource::WeekFlag(StudyWeek(i as u32)),
                arity: *arity,
            })
            .collect();
        let students: Vec<StudentId> = (0..outcomes.len())
            .map(|i| StudentId::new(format!("s{i:03}")))
            .collect();
        CategoricalMatrix {
            attributes,
            columns: columns.into_iter().map(|(_, c)| c).collect(),
            outcomes,
            students,
        }
    }

    #[test]
    fn four_ft_hand_counted() {
        // 6 students; antecedent true for rows 0,1,2; NotSubmitted rows 0,1,4
        let matrix = matrix_from(
            vec![(2, vec![1, 1, 1, 0, 0, 0])],
            vec![
                Outcome::NotSubmitted,
                Outcome::NotSubmitted,
                Outcome::Passed,
                Outcome::Passed,
                Outcome::NotSubmitted,
                Outcome::Passed,
            ],
        );
        let ante = Antecedent::new(vec![Literal {
            attribute: 0,
            category: 1,
        }]);
        let t = build_4ft(&matrix, &ante, Outcome::NotSubmitted).unwrap();
        assert_eq!((t.a, t.b, t.c, t.d), (2, 1, 1, 2));
        assert_eq!(t.n(), 6);
    }

    #[test]
    fn antecedent_true_for_all_empties_c_and_d() {
        let matrix = matrix_from(
            vec![(2, vec![1, 1, 1])],
            vec![Outcome::Passed, Outcome::NotSubmitted, Outcome::Passed],
        );
        let ante = Antecedent::new(vec![Literal {
            attribute: 0,
            category: 1,
        }]);
        let t = build_4ft(&matrix, &ante, Outcome::Passed).unwrap();
        assert_eq!((t.a, t.b, t.c, t.d), (2, 1, 0, 0));
    }

    #[test]
    fn unknown_attribute_rejected() {
        let matrix = matrix_from(vec![(2, vec![0])], vec![Outcome::Passed]);
        let ante = Antecedent::new(vec![Literal {
            attribute: 5,
            category: 0,
        }]);
        assert!(matches!(
            build_4ft(&matrix, &ante, Outcome::Passed),
            Err(GuhaError::UnknownAttribute { index: 5 })
        ));
    }

    #[test]
    fn founded_implication_boundary() {
        let spec = QuantifierSpec::FoundedImplication { p: 0.9, base: 10 };
        let sat = |a, b| {
            eval_quantifier(
                &FourFt {
                    a,
                    b,
                    c: 0,
                    d: 100,
                },
                &spec,
            )
            .satisfied
        };
        assert!(sat(18, 2), "confidence exactly 0.9 satisfies");
        assert!(!sat(9, 1), "base gate fails despite confidence 0.9");
        assert!(!sat(17, 3), "confidence 0.85 < 0.9");
    }

    #[test]
    fn above_average_hand_computed() {
        // conf 0.75 >= 2 * (60/200) = 0.6
        let spec = QuantifierSpec::AboveAverage { q: 2.0, base: 10 };
        let t = FourFt {
            a: 30,
            b: 10,
            c: 30,
            d: 130,
        };
        let eval = eval_quantifier(&t, &spec);
        assert!(eval.satisfied);
        assert!((eval.confidence - 0.75).abs() < 1e-15);

        // same table, q = 3: 0.75 < 0.9
        let spec = QuantifierSpec::AboveAverage { q: 3.0, base: 10 };
        assert!(!eval_quantifier(&t, &spec).satisfied);
    }

    #[test]
    fn prune_bound_examples() {
        let spec = QuantifierSpec::FoundedImplication { p: 0.9, base: 10 };
        assert!(!prune_bound(5, &spec), "a below base cannot recover");
        assert!(prune_bound(10, &spec));
    }

    #[test]
    fn quantifier_grammar_round_trip() {
        let fi = QuantifierSpec::parse("fi:0.9:20").unwrap();
        assert_eq!(fi, QuantifierSpec::FoundedImplication { p: 0.9, base: 20 });
        assert_eq!(format!("{fi}"), "fi:0.9:20");
        let aa = QuantifierSpec::parse("aa:1.5:10").unwrap();
        assert_eq!(aa, QuantifierSpec::AboveAverage { q: 1.5, base: 10 });
        assert!(QuantifierSpec::parse("xy:1:1").is_err());
        assert!(QuantifierSpec::parse("fi:0:5").is_err());
        assert!(QuantifierSpec::parse("fi:1.5:5").is_err());
        assert!(QuantifierSpec::parse("aa:0.9:5").is_err());
        assert!(QuantifierSpec::parse("fi:0.5:0").is_err());
        assert!(QuantifierSpec::parse("fi:0.5").is_err());
    }

    #[test]
    fn base_above_cohort_size_yields_nothing() {
        let matrix = matrix_from(
            vec![(2, vec![1, 0, 1])],
            vec![Outcome::Passed, Outcome::Passed, Outcome::NotSubmitted],
        );
        let spec = QuantifierSpec::FoundedImplication { p: 0.5, base: 10 };
        let out = mine_assoc(&matrix, &[Outcome::Passed], &spec, 2).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn empty_attribute_space_rejected() {
        let matrix = matrix_from(vec![], vec![Outcome::Passed]);
        let spec = QuantifierSpec::FoundedImplication { p: 0.5, base: 1 };
        assert!(matches!(
            mine_assoc(&matrix, &[Outcome::Passed], &spec, 2),
            Err(GuhaError::EmptyAttributeSpace)
        ));
    }

    // ---- brute-force oracle -------------------------------------------

    /// Enumerates every antecedent of length <= max_length by direct nested
    /// recursion, counts tables by row scan, and sorts with an independently
    /// written comparator.
    pub(crate) fn brute_force_mine(
        matrix: &CategoricalMatrix,
        succedents: &[Outcome],
        spec: &QuantifierSpec,
        max_length: usize,
    ) -> Vec<Hypothesis> {
        let mut results = Vec::new();
        let n_attrs = matrix.attributes().len();
        let mut stack: Vec<Literal> = Vec::new();
        fn recurse(
            matrix: &CategoricalMatrix,
            succedents: &[Outcome],
            spec: &QuantifierSpec,
            max_length: usize,
            next_attr: usize,
            stack: &mut Vec<Literal>,
            results: &mut Vec<Hypothesis>,
        ) {
            if !stack.is_empty() {
                for &succ in succedents {
                    let ante = Antecedent::new(stack.clone());
                    let table = build_4ft(matrix, &ante, succ).unwrap();
                    let eval = eval_quantifier(&table, spec);
                    if eval.satisfied {
                        results.push(Hypothesis {
                            antecedent: ante,
                            succedent: succ,
                            table,
                            confidence: eval.confidence,
                            support: eval.support,
                            quantifier_satisfied: true,
                        });
                    }
                }
            }
            if stack.len() == max_length {
                return;
            }
            for attr in next_attr..matrix.attributes().len() {
                for cat in 0..matrix.attributes()[attr].arity {
                    stack.push(Literal {
                        attribute: attr,
                        category: cat,
                    });
                    recurse(
                        matrix, succedents, spec, max_length, attr + 1, stack, results,
                    );
                    stack.pop();
                }
            }
        }
        let _ = n_attrs;
        recurse(
            matrix,
            succedents,
            spec,
            max_length,
            0,
            &mut stack,
            &mut results,
        );
        // independent ordering: exact fractions via f64 on small counts would
        // be fine, but compare with integer cross-multiplication directly
        results.sort_by(|x, y| {
            let xl = (x.table.a as u128) * ((y.table.a + y.table.b) as u128);
            let yl = (y.table.a as u128) * ((x.table.a + x.table.b) as u128);
            yl.cmp(&xl)
                .then_with(|| y.table.a.cmp(&x.table.a))
                .then_with(|| x.antecedent.literals.cmp(&y.antecedent.literals))
                .then_with(|| x.succedent.index().cmp(&y.succedent.index()))
        });
        results
    }

    pub(crate) fn random_matrix(
        rng: &mut crate::rng::KeyedRng,
        n_attrs: usize,
        n_rows: usize,
    ) -> CategoricalMatrix {
        let columns: Vec<(usize, Vec<u16>)> = (0..n_attrs)
            .map(|_| {
                let arity = 2 + (rng.next_u64() % 4) as usize; // 2..=5
                let col = (0..n_rows)
                    .map(|_| (rng.next_u64() % arity as u64) as u16)
                    .collect();
                (arity, col)
            })
            .collect();
        let outcomes = (0..n_rows)
            .map(|_| Outcome::ALL[(rng.next_u64() % 3) as usize])
            .collect();
        matrix_from(columns, outcomes)
    }

    #[test]
    fn miner_matches_brute_force_on_seeded_matrices() {
        for seed in 0..12u64 {
            let mut rng = crate::rng::KeyedRng::from_key(&[0x61BA, seed]);
            let n_attrs = 3 + (rng.next_u64() % 5) as usize;
            let n_rows = 20 + (rng.next_u64() % 80) as usize;
            let matrix = random_matrix(&mut rng, n_attrs, n_rows);
            let spec = if seed % 2 == 0 {
                QuantifierSpec::FoundedImplication {
                    p: 0.4 + 0.1 * (seed % 5) as f64,
                    base: 2 + seed % 6,
                }
            } else {
                QuantifierSpec::AboveAverage {
                    q: 1.1 + 0.2 * (seed % 4) as f64,
                    base: 2 + seed % 6,
                }
            };
            let succedents = [Outcome::NotSubmitted, Outcome::Passed];
            let max_length = 1 + (seed % 3) as usize;
            let mined = mine_assoc(&matrix, &succedents, &spec, max_length).unwrap();
            let oracle = brute_force_mine(&matrix, &succedents, &spec, max_length);
            assert_eq!(mined, oracle, "seed {seed}");
        }
    }

    #[test]
    fn emitted_tables_recompute_exactly() {
        let mut rng = crate::rng::KeyedRng::from_key(&[0x7AB1]);
        let matrix = random_matrix(&mut rng, 6, 120);
        let spec = QuantifierSpec::FoundedImplication { p: 0.3, base: 3 };
        let mined = mine_assoc(&matrix, &[Outcome::Passed], &spec, 3).unwrap();
        assert!(!mined.is_empty());
        for h in &mined {
            let again = build_4ft(&matrix, &h.antecedent, h.succedent).unwrap();
            assert_eq!(again, h.table);
            assert_eq!(again.n(), matrix.n_rows() as u64);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn a_is_antitone_under_extension(
            seed in 0u64..10_000,
            n_rows in 10usize..80,
        ) {
            let mut rng = crate::rng::KeyedRng::from_key(&[0xA171, seed]);
            let matrix = random_matrix(&mut rng, 4, n_rows);
            // antecedent {attr0=c0} vs {attr0=c0, attr1=c1}
            let c0 = (rng.next_u64() % matrix.attributes()[0].arity as u64) as usize;
            let c1 = (rng.next_u64() % matrix.attributes()[1].arity as u64) as usize;
            let short = Antecedent::new(vec![Literal { attribute: 0, category: c0 }]);
            let long = Antecedent::new(vec![
                Literal { attribute: 0, category: c0 },
                Literal { attribute: 1, category: c1 },
            ]);
            for succ in Outcome::ALL {
                let ta = build_4ft(&matrix, &short, succ).unwrap();
                let tb = build_4ft(&matrix, &long, succ).unwrap();
                prop_assert!(tb.a <= ta.a);
            }
        }

        #[test]
        fn pruning_never_changes_output(
            seed in 0u64..10_000,
            n_rows in 10usize..60,
            base in 1u64..8,
        ) {
            let mut rng = crate::rng::KeyedRng::from_key(&[0x9121, seed]);
            let matrix = random_matrix(&mut rng, 5, n_rows);
            let spec = QuantifierSpec::FoundedImplication { p: 0.5, base };
            let succedents = [Outcome::NotSubmitted, Outcome::Failed, Outcome::Passed];
            let pruned = mine_assoc_with(&matrix, &succedents, &spec, 2, true).unwrap();
            let unpruned = mine_assoc_with(&matrix, &succedents, &spec, 2, false).unwrap();
            prop_assert_eq!(pruned, unpruned);
        }

        #[test]
        fn rerun_is_identical(seed in 0u64..10_000) {
            let mut rng = crate::rng::KeyedRng::from_key(&[0xDE7E, seed]);
            let matrix = random_matrix(&mut rng, 5, 50);
            let spec = QuantifierSpec::AboveAverage { q: 1.2, base: 3 };
            let a = mine_assoc(&matrix, &[Outcome::Passed], &spec, 3).unwrap();
            let b = mine_assoc(&matrix, &[Outcome::Passed], &spec, 3).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
