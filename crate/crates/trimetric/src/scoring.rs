//! Cohort normalization, composite scores, and 3D comparison export.
//!
//! Two composites are reported side by side. `security_score_literal` is the
//! plain weighted sum of the raw metrics. Because the raw metrics carry
//! different units and orientations (high complexity and high instability
//! are bad, high robustness is good), the literal sum is hard to interpret
//! on its own, so `risk_score_oriented` complements it: metrics are min-max
//! normalized over the cohort and the robustness axis is flipped
//! (`1 - ner_norm`), making lower uniformly mean more secure. The scatter
//! export uses the same orientation, so distance to the origin orders
//! systems from most to least secure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoringError {
    #[error("empty cohort")]
    EmptyCohort,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("record not normalized: {0}")]
    NotNormalized(String),
}

/// Which robustness variant populated `ner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NerKind {
    Literal,
    Epsilon,
}

/// One system's raw metric triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub system_id: String,
    pub sci: f64,
    pub leais: f64,
    pub ner: f64,
    pub ner_kind: NerKind,
}

/// A record with every metric mapped into [0, 1] over its cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRecord {
    pub system_id: String,
    pub sci_norm: f64,
    pub leais_norm: f64,
    pub ner_norm: f64,
    pub ner_kind: NerKind,
}

/// Non-negative weights summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Weights {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self, ScoringError> {
        let w = Weights { w1, w2, w3 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        for (name, v) in [("w1", self.w1), ("w2", self.w2), ("w3", self.w3)] {
            if !v.is_finite() || v < 0.0 {
                return Err(ScoringError::InvalidWeights(format!(
                    "{name} must be a non-negative finite number"
                )));
            }
        }
        let sum = self.w1 + self.w2 + self.w3;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ScoringError::InvalidWeights(format!(
                "weights sum to {sum}"
            )));
        }
        Ok(())
    }

    pub fn equal() -> Self {
        let w = 1.0 / 3.0;
        Weights {
            w1: w,
            w2: w,
            w3: w,
        }
    }
}

fn min_max_scale(value: f64, min: f64, max: f64) -> f64 {
    if max == min {
        // An uninformative metric should not push anyone to best or worst.
        0.5
    } else {
        (value - min) / (max - min)
    }
}

/// Min-max normalizes each metric over the cohort. Cohort extremes map to
/// exactly 0 and 1; a metric constant across the cohort maps to 0.5.
pub fn normalize_cohort(records: &[MetricsRecord]) -> Result<Vec<NormalizedRecord>, ScoringError> {
    if records.is_empty() {
        return Err(ScoringError::EmptyCohort);
    }
    let bounds = |extract: fn(&MetricsRecord) -> f64| -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for r in records {
            min = min.min(extract(r));
            max = max.max(extract(r));
        }
        (min, max)
    };
    let (sci_min, sci_max) = bounds(|r| r.sci);
    let (leais_min, leais_max) = bounds(|r| r.leais);
    let (ner_min, ner_max) = bounds(|r| r.ner);
    Ok(records
        .iter()
        .map(|r| NormalizedRecord {
            system_id: r.system_id.clone(),
            sci_norm: min_max_scale(r.sci, sci_min, sci_max),
            leais_norm: min_max_scale(r.leais, leais_min, leais_max),
            ner_norm: min_max_scale(r.ner, ner_min, ner_max),
            ner_kind: r.ner_kind,
        })
        .collect())
}

/// The plain weighted sum `w1*sci + w2*leais + w3*ner` of raw metrics.
pub fn security_score_literal(
    record: &MetricsRecord,
    weights: &Weights,
) -> Result<f64, ScoringError> {
    weights.validate()?;
    Ok(weights.w1 * record.sci + weights.w2 * record.leais + weights.w3 * record.ner)
}

fn check_normalized(record: &NormalizedRecord) -> Result<(), ScoringError> {
    for (name, v) in [
        ("sci_norm", record.sci_norm),
        ("leais_norm", record.leais_norm),
        ("ner_norm", record.ner_norm),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ScoringError::NotNormalized(format!(
                "{} has {name} = {v}",
                record.system_id
            )));
        }
    }
    Ok(())
}

/// Orientation-corrected risk in [0, 1]:
/// `w1*sci_norm + w2*leais_norm + w3*(1 - ner_norm)`. Lower is more secure.
pub fn risk_score_oriented(
    record: &NormalizedRecord,
    weights: &Weights,
) -> Result<f64, ScoringError> {
    weights.validate()?;
    check_normalized(record)?;
    Ok(weights.w1 * record.sci_norm
        + weights.w2 * record.leais_norm
        + weights.w3 * (1.0 - record.ner_norm))
}

/// One 3D comparison point: x = complexity, y = instability,
/// z = 1 - robustness, all normalized. Closer to the origin is more secure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub system_id: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub distance: f64,
}

/// Builds scatter rows sorted by distance to the origin (ties broken by
/// system id).
pub fn scatter_export(records: &[NormalizedRecord]) -> Result<Vec<ScatterRow>, ScoringError> {
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        check_normalized(r)?;
        let (x, y, z) = (r.sci_norm, r.leais_norm, 1.0 - r.ner_norm);
        rows.push(ScatterRow {
            system_id: r.system_id.clone(),
            x,
            y,
            z,
            distance: (x * x + y * y + z * z).sqrt(),
        });
    }
    rows.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .unwrap()
            .then_with(|| a.system_id.cmp(&b.system_id))
    });
    Ok(rows)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Byte-deterministic CSV: header then one row per system, floats in
/// shortest round-trip form.
pub fn scatter_to_csv(rows: &[ScatterRow]) -> String {
    let mut out = String::from("system_id,x,y,z,distance\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&r.system_id),
            r.x,
            r.y,
            r.z,
            r.distance
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, sci: f64, leais: f64, ner: f64) -> MetricsRecord {
        MetricsRecord {
            system_id: id.into(),
            sci,
            leais,
            ner,
            ner_kind: NerKind::Literal,
        }
    }

    #[test]
    fn normalize_affine_map() {
        let cohort = [
            record("a", 2.0, 0.0, 0.0),
            record("b", 4.0, 0.0, 0.0),
            record("c", 6.0, 0.0, 0.0),
        ];
        let normalized = normalize_cohort(&cohort).unwrap();
        assert_eq!(normalized[0].sci_norm, 0.0);
        assert_eq!(normalized[1].sci_norm, 0.5);
        assert_eq!(normalized[2].sci_norm, 1.0);
        // leais constant across cohort -> degenerate 0.5.
        assert!(normalized.iter().all(|r| r.leais_norm == 0.5));
    }

    #[test]
    fn normalize_single_record_cohort() {
        let normalized = normalize_cohort(&[record("only", 3.0, -1.0, 0.4)]).unwrap();
        assert_eq!(normalized[0].sci_norm, 0.5);
        assert_eq!(normalized[0].leais_norm, 0.5);
        assert_eq!(normalized[0].ner_norm, 0.5);
    }

    #[test]
    fn normalize_empty_cohort_rejected() {
        assert_eq!(normalize_cohort(&[]), Err(ScoringError::EmptyCohort));
    }

    #[test]
    fn literal_score_examples() {
        let r = record("s", 3.0, 0.6, 0.9);
        let score = security_score_literal(&r, &Weights::equal()).unwrap();
        assert!((score - 1.5).abs() < 1e-12);

        let w = Weights::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(security_score_literal(&r, &w).unwrap(), 3.0);
        let w = Weights::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(security_score_literal(&r, &w).unwrap(), 0.6);
        let w = Weights::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(security_score_literal(&r, &w).unwrap(), 0.9);

        assert!(matches!(
            Weights::new(0.5, 0.4, 0.2),
            Err(ScoringError::InvalidWeights(_))
        ));
        assert!(Weights::new(-0.1, 0.6, 0.5).is_err());
    }

    #[test]
    fn literal_score_is_linear_per_metric() {
        let w = Weights::new(0.2, 0.5, 0.3).unwrap();
        let base = record("s", 1.0, 2.0, 3.0);
        for delta in [0.25, -1.5, 10.0] {
            let mut shifted = base.clone();
            shifted.sci += delta;
            let a = security_score_literal(&base, &w).unwrap();
            let b = security_score_literal(&shifted, &w).unwrap();
            assert!((b - a - w.w1 * delta).abs() < 1e-12);
        }
    }

    fn normalized(id: &str, s: f64, l: f64, n: f64) -> NormalizedRecord {
        NormalizedRecord {
            system_id: id.into(),
            sci_norm: s,
            leais_norm: l,
            ner_norm: n,
            ner_kind: NerKind::Literal,
        }
    }

    #[test]
    fn risk_score_examples() {
        let r = normalized("s", 0.2, 0.4, 0.9);
        let score = risk_score_oriented(&r, &Weights::equal()).unwrap();
        assert!((score - (0.2 + 0.4 + 0.1) / 3.0).abs() < 1e-12);

        let best = normalized("best", 0.0, 0.0, 1.0);
        assert_eq!(risk_score_oriented(&best, &Weights::equal()).unwrap(), 0.0);
        let worst = normalized("worst", 1.0, 1.0, 0.0);
        assert!((risk_score_oriented(&worst, &Weights::equal()).unwrap() - 1.0).abs() < 1e-12);

        let out_of_range = normalized("bad", 1.2, 0.0, 0.0);
        assert!(matches!(
            risk_score_oriented(&out_of_range, &Weights::equal()),
            Err(ScoringError::NotNormalized(_))
        ));
    }

    #[test]
    fn scatter_rows_and_ordering() {
        let rows = scatter_export(&[
            normalized("far", 0.6, 0.8, 0.0),
            normalized("origin", 0.0, 0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(rows[0].system_id, "origin");
        assert_eq!(rows[0].distance, 0.0);
        assert_eq!(rows[1].system_id, "far");
        assert!((rows[1].distance - std::f64::consts::SQRT_2).abs() < 1e-12);

        let rows = scatter_export(&[normalized("s", 0.6, 0.8, 1.0)]).unwrap();
        assert!((rows[0].distance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scatter_tie_break_is_lexicographic() {
        let rows = scatter_export(&[
            normalized("zeta", 0.5, 0.5, 0.5),
            normalized("alpha", 0.5, 0.5, 0.5),
        ])
        .unwrap();
        assert_eq!(rows[0].system_id, "alpha");
        assert_eq!(rows[1].system_id, "zeta");
    }

    #[test]
    fn ranking_invariant_under_affine_rescaling() {
        let cohort = [
            record("a", 2.0, -0.5, 0.1),
            record("b", 5.0, 0.3, 1.2),
            record("c", 3.5, 0.9, 0.7),
            record("d", 9.0, -0.2, 0.4),
        ];
        let rank = |records: &[MetricsRecord]| -> Vec<String> {
            let normalized = normalize_cohort(records).unwrap();
            let mut scored: Vec<(String, f64)> = normalized
                .iter()
                .map(|r| {
                    (
                        r.system_id.clone(),
                        risk_score_oriented(r, &Weights::equal()).unwrap(),
                    )
                })
                .collect();
            scored.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap().then_with(|| x.0.cmp(&y.0)));
            scored.into_iter().map(|(id, _)| id).collect()
        };
        let baseline = rank(&cohort);
        let rescaled: Vec<MetricsRecord> = cohort
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.sci = 7.5 * r.sci + 100.0;
                r
            })
            .collect();
        assert_eq!(rank(&rescaled), baseline);
    }

    #[test]
    fn csv_is_deterministic_and_escaped() {
        let rows = scatter_export(&[
            normalized("plain", 0.25, 0.5, 1.0),
            normalized("odd,id", 1.0, 1.0, 0.0),
        ])
        .unwrap();
        let csv = scatter_to_csv(&rows);
        assert_eq!(csv, scatter_to_csv(&rows));
        assert!(csv.starts_with("system_id,x,y,z,distance\n"));
        assert!(csv.contains("\"odd,id\""));
        assert!(csv.contains("plain,0.25,0.5,0,"));
    }
}
