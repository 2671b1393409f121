use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Severity {
    Negligible,
    Marginal,
    Critical,
    Catastrophic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Occurrence {
    Improbable,
    Remote,
    Occasional,
    Probable,
    Frequent,
}

impl Occurrence {
    pub const ALL: [Occurrence; 5] = [
        Occurrence::Improbable,
        Occurrence::Remote,
        Occurrence::Occasional,
        Occurrence::Probable,
        Occurrence::Frequent,
    ];

    /// The band `steps` below this one, saturating at improbable.
    pub fn lowered(self, steps: usize) -> Occurrence {
        Self::ALL[(self as usize).saturating_sub(steps)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum RiskClass {
    Low,
    Medium,
    High,
    Intolerable,
}

impl RiskClass {
    pub fn is_tolerable(self) -> bool {
        matches!(self, RiskClass::Low | RiskClass::Medium)
    }
}

impl fmt::Display for RiskClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskClass::Low => "low",
            RiskClass::Medium => "medium",
            RiskClass::High => "high",
            RiskClass::Intolerable => "intolerable",
        })
    }
}

use Occurrence as O;
use RiskClass::*;

/// Rows by severity (negligible to catastrophic), columns by occurrence
/// (improbable to frequent).
pub const RISK_MATRIX: [[RiskClass; 5]; 4] = [
    [Low, Low, Low, Medium, Medium],
    [Low, Medium, Medium, High, High],
    [Low, Medium, High, Intolerable, Intolerable],
    [Medium, High, Intolerable, Intolerable, Intolerable],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RiskLevel {
    pub class: RiskClass,
    pub tolerable: bool,
}

pub fn risk_matrix_level(severity: Severity, occurrence: Occurrence) -> RiskLevel {
    let class = RISK_MATRIX[severity as usize][occurrence as usize];
    RiskLevel {
        class,
        tolerable: class.is_tolerable(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hazard {
    pub code: &'static str,
    pub situation: &'static str,
    pub failure: &'static str,
    pub effect: &'static str,
    pub consequence: &'static str,
    pub severity: Severity,
    pub occurrence: Occurrence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RiskAssessment {
    pub hazard_code: &'static str,
    pub class: RiskClass,
    pub tolerable: bool,
}

impl Hazard {
    pub fn assess(&self) -> RiskAssessment {
        let level = risk_matrix_level(self.severity, self.occurrence);
        RiskAssessment {
            hazard_code: self.code,
            class: level.class,
            tolerable: level.tolerable,
        }
    }
}

/// Hazards of the row-transition scenario.
pub fn hazard_registry() -> Vec<Hazard> {
    vec![Hazard {
        code: "F-G5",
        situation: "Worker approaches from the side while the robot is at a row end",
        failure: "Human detected only once closer than 3.6 m",
        effect: "UV-C lamps switched off too late",
        consequence: "Worker injured by UV-C exposure",
        severity: Severity::Critical,
        occurrence: O::Probable,
    }]
}

pub fn hazard(code: &str) -> Option<Hazard> {
    hazard_registry().into_iter().find(|h| h.code == code)
}

/// Safety integrity level implied by a risk reduction factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sil {
    None,
    Sil1,
    Sil2,
    Sil3,
    Sil4,
}

impl fmt::Display for Sil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sil::None => "none",
            Sil::Sil1 => "SIL1",
            Sil::Sil2 => "SIL2",
            Sil::Sil3 => "SIL3",
            Sil::Sil4 => "SIL4",
        })
    }
}

/// Relative slack on band edges, so that ratios of decimal inputs such as
/// 0.12 / 0.012 land in the band they denote.
const BAND_SLACK: f64 = 1e-9;

impl Sil {
    pub fn from_rrf(rrf: f64) -> Sil {
        let at_least = |edge: f64| rrf >= edge * (1.0 - BAND_SLACK);
        if at_least(10_000.0) {
            Sil::Sil4
        } else if at_least(1_000.0) {
            Sil::Sil3
        } else if at_least(100.0) {
            Sil::Sil2
        } else if at_least(10.0) {
            Sil::Sil1
        } else {
            Sil::None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("baseline probability must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error("mitigated probability must be non-negative, got {0}")]
    NegativeMitigated(f64),
}

/// `(p_baseline / p_mitigated, SIL band)`. A mitigated probability of zero
/// gives an infinite factor and SIL 4.
pub fn risk_reduction_and_sil(p_baseline: f64, p_mitigated: f64) -> Result<(f64, Sil), RiskError> {
    if p_baseline.is_nan() || p_baseline <= 0.0 {
        return Err(RiskError::NonPositiveBaseline(p_baseline));
    }
    if p_mitigated.is_nan() || p_mitigated < 0.0 {
        return Err(RiskError::NegativeMitigated(p_mitigated));
    }
    let rrf = if p_mitigated == 0.0 {
        f64::INFINITY
    } else {
        p_baseline / p_mitigated
    };
    Ok((rrf, Sil::from_rrf(rrf)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sil_bands() {
        let (rrf, sil) = risk_reduction_and_sil(0.12, 0.012).unwrap();
        assert!((rrf - 10.0).abs() < 1e-12);
        assert_eq!(sil, Sil::Sil1);
        let (rrf, sil) = risk_reduction_and_sil(0.12, 0.0012).unwrap();
        assert!((rrf - 100.0).abs() < 1e-10);
        assert_eq!(sil, Sil::Sil2);
        assert_eq!(risk_reduction_and_sil(0.12, 0.12).unwrap(), (1.0, Sil::None));
        assert_eq!(risk_reduction_and_sil(0.5, 0.0).unwrap(), (f64::INFINITY, Sil::Sil4));
        assert_eq!(Sil::from_rrf(9.99), Sil::None);
        assert_eq!(Sil::from_rrf(1_000.0), Sil::Sil3);
        assert_eq!(Sil::from_rrf(99_999.0), Sil::Sil4);
        assert!(risk_reduction_and_sil(0.0, 0.1).is_err());
        assert!(risk_reduction_and_sil(0.1, -0.1).is_err());
    }

    #[test]
    fn matrix_cells() {
        let cell = |s, o| risk_matrix_level(s, o);
        assert_eq!(
            cell(Severity::Critical, O::Probable),
            RiskLevel { class: Intolerable, tolerable: false }
        );
        assert_eq!(
            cell(Severity::Negligible, O::Improbable),
            RiskLevel { class: Low, tolerable: true }
        );
        assert_eq!(
            cell(Severity::Critical, O::Remote),
            RiskLevel { class: Medium, tolerable: true }
        );
        assert_eq!(cell(Severity::Critical, O::Probable.lowered(1)).class, High);
        assert_eq!(cell(Severity::Critical, O::Probable.lowered(2)).class, Medium);
        assert_eq!(O::Remote.lowered(5), O::Improbable);
    }

    #[test]
    fn matrix_is_monotone() {
        for s in 0..4 {
            for o in 0..5 {
                if s + 1 < 4 {
                    assert!(RISK_MATRIX[s][o] <= RISK_MATRIX[s + 1][o]);
                }
                if o + 1 < 5 {
                    assert!(RISK_MATRIX[s][o] <= RISK_MATRIX[s][o + 1]);
                }
            }
        }
    }

    #[test]
    fn registry() {
        let h = hazard("F-G5").unwrap();
        assert_eq!(h.assess().class, Intolerable);
        assert!(!h.assess().tolerable);
        assert!(hazard("F-G6").is_none());
        let codes: Vec<_> = hazard_registry().iter().map(|h| h.code).collect();
        let mut unique = codes.clone();
        unique.dedup();
        assert_eq!(codes, unique);
    }
}
