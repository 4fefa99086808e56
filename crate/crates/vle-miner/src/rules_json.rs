//! Structured JSON export of mined hypotheses, mirroring the CSV table.

use serde::Serialize;
use vle_core::guha::{Attribute, Hypothesis, QuantifierSpec};

#[derive(Serialize)]
struct RulesDocument<'a> {
    quantifier: String,
    cohort_size: u64,
    hypotheses: Vec<RuleJson<'a>>,
}

#[derive(Serialize)]
struct RuleJson<'a> {
    antecedent: String,
    literals: Vec<LiteralJson<'a>>,
    succedent: &'a str,
    a: u64,
    b: u64,
    c: u64,
    d: u64,
    confidence: f64,
    support: f64,
}

#[derive(Serialize)]
struct LiteralJson<'a> {
    attribute: &'a str,
    category: String,
}

pub fn rules_to_json(
    hypotheses: &[Hypothesis],
    attributes: &[Attribute],
    spec: &QuantifierSpec,
    cohort_size: u64,
) -> String {
    let doc = RulesDocument {
        quantifier: spec.to_string(),
        cohort_size,
        hypotheses: hypotheses
            .iter()
            .map(|h| RuleJson {
                antecedent: h.antecedent.render(attributes),
                literals: h
                    .antecedent
                    .literals
                    .iter()
                    .map(|l| LiteralJson {
                        attribute: attributes[l.attribute].id.as_str(),
                        category: attributes[l.attribute].category_label(l.category),
                    })
                    .collect(),
                succedent: h.succedent.label(),
                a: h.table.a,
                b: h.table.b,
                c: h.table.c,
                d: h.table.d,
                confidence: h.confidence,
                support: h.support,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("rules serialize");
    json.push('\n');
    json
}

#[cfg(test)]
mod tests {
    use super::*;
    use vle_core::features::{Outcome, StudyWeek};
    use vle_core::guha::{Antecedent, FourFt, Literal};

    #[test]
    fn json_mirrors_table_fields() {
        let attrs = vec![Attribute::week_flag(StudyWeek(3))];
        let table = FourFt { a: 9, b: 1, c: 4, d: 6 };
        let hyp = Hypothesis {
            antecedent: Antecedent::new(vec![Literal { attribute: 0, category: 0 }]),
            succedent: Outcome::NotSubmitted,
            table,
            confidence: table.confidence(),
            support: table.support(),
            quantifier_satisfied: true,
        };
        let spec = QuantifierSpec::FoundedImplication { p: 0.8, base: 5 };
        let json = rules_to_json(&[hyp], &attrs, &spec, 20);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["quantifier"], "fi:0.8:5");
        assert_eq!(value["cohort_size"], 20);
        let rule = &value["hypotheses"][0];
        assert_eq!(rule["antecedent"], "w3_active=0");
        assert_eq!(rule["succedent"], "NotSubmitted");
        assert_eq!(rule["a"], 9);
        assert_eq!(rule["confidence"], 0.9);
        assert_eq!(rule["literals"][0]["attribute"], "w3_active");
        assert_eq!(rule["literals"][0]["category"], "0");
    }
}
