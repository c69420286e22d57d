//! Report rendering and the step-function summary.

use std::fmt::{self, Display, Write as _};
use std::fs;
use std::path::Path;

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{tail_probability, WeightVector};
use crate::surd::Surd;

use super::cases::{CaseId, CaseReport, StepVerdict, Verdict};

pub(crate) fn display<T: Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub(crate) fn display_all<T: Display, S: Serializer>(v: &[T], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn verdict_word(v: StepVerdict) -> &'static str {
    match v {
        StepVerdict::Pass => "pass",
        StepVerdict::Fail => "FAIL",
        StepVerdict::Imported => "imported",
        StepVerdict::Info => "info",
        StepVerdict::Inconclusive => "inconclusive",
    }
}

impl Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

pub fn render_text(r: &CaseReport) -> String {
    let mut out = format!("case {}: {}\n", r.id, r.title);
    for s in &r.steps {
        let _ = write!(out, "  [{:<12}] {}: {}", verdict_word(s.verdict), s.name, s.computed);
        if let Some(e) = &s.expected {
            let _ = write!(out, " (expected {e})");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "verdict: {}", r.verdict);
    out
}

pub fn to_json(r: &CaseReport) -> String {
    serde_json::to_string_pretty(r).expect("reports serialize")
}

/// Writes `<id>.txt` and `<id>.json` into `dir`.
pub fn write_report(dir: &Path, r: &CaseReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{}.txt", r.id)), render_text(r))?;
    fs::write(dir.join(format!("{}.json", r.id)), to_json(r) + "\n")?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<CaseReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { pos: e.column(), msg: format!("{}: {e}", path.display()) })
}

/// Status of one plateau of the step function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlateauStatus {
    /// No certificate needed.
    Trivial,
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plateau {
    pub range: &'static str,
    #[serde(serialize_with = "display")]
    pub value: BigRational,
    pub witness: String,
    /// Two-sided tail of the witness at the right end of the range.
    #[serde(serialize_with = "display")]
    pub witness_value: BigRational,
    pub witness_ok: bool,
    pub cases: Vec<CaseId>,
    pub imported_steps: usize,
    pub status: PlateauStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub plateaus: Vec<Plateau>,
    pub cases: Vec<(CaseId, Verdict)>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.plateaus.iter().all(|p| p.witness_ok && matches!(p.status, PlateauStatus::Pass | PlateauStatus::Trivial))
    }

    pub fn inconclusive(&self) -> bool {
        !self.plateaus.iter().any(|p| p.status == PlateauStatus::Fail || !p.witness_ok)
            && self.plateaus.iter().any(|p| p.status == PlateauStatus::Inconclusive)
    }
}

/// `P(|Σ_{i≤n} εᵢ/√n| ≥ y)` with `y = √y_sq`.
pub fn equal_weight_tail(n: usize, y_sq: &BigRational) -> Result<BigRational> {
    let w = WeightVector::from_integers(&vec![1; n])?;
    let x = Surd::sqrt(&(BigRational::from_integer(n.into()) * y_sq))?;
    Ok(tail_probability(&w, &x, false, true)?.value)
}

struct PlateauSpec {
    range: &'static str,
    value: &'static str,
    n: usize,
    /// `y²` at the right end of the range (inside it for the last one).
    y_sq: &'static str,
    cases: &'static [CaseId],
}

const PLATEAUS: [PlateauSpec; 6] = [
    PlateauSpec { range: "(0, 1/sqrt(7)]", value: "1/2", n: 2, y_sq: "1/7", cases: &[CaseId::Sqrt7] },
    PlateauSpec { range: "(1/sqrt(7), 1/sqrt(5)]", value: "29/64", n: 7, y_sq: "1/5", cases: &[CaseId::Sqrt5] },
    PlateauSpec { range: "(1/sqrt(5), 1/sqrt(3)]", value: "3/8", n: 5, y_sq: "1/3", cases: &[CaseId::Sqrt3] },
    PlateauSpec { range: "(1/sqrt(3), 2/sqrt(6)]", value: "1/4", n: 3, y_sq: "2/3", cases: &[CaseId::TwoSqrt6] },
    PlateauSpec {
        range: "(2/sqrt(6), 1]",
        value: "7/32",
        n: 6,
        y_sq: "1",
        cases: &[CaseId::A, CaseId::B, CaseId::C, CaseId::D, CaseId::E, CaseId::F, CaseId::G, CaseId::H],
    },
    PlateauSpec { range: "(1, inf)", value: "0", n: 1, y_sq: "4", cases: &[] },
];

/// The six plateau witnesses: `(n, y², value)`.
pub fn plateau_witnesses() -> Vec<(usize, BigRational, BigRational)> {
    PLATEAUS.iter().map(|p| (p.n, rat(p.y_sq), rat(p.value))).collect()
}

fn rat(t: &str) -> BigRational {
    crate::surd::parse_rational(t).expect("literal")
}

/// Builds the summary from case reports; every case must be present.
pub fn summarize(reports: &[CaseReport]) -> Result<Summary> {
    let missing: Vec<&str> = CaseId::ALL
        .iter()
        .filter(|id| !reports.iter().any(|r| r.id == **id))
        .map(|id| id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Precondition(format!("missing case reports: {}", missing.join(", "))));
    }
    let find = |id: CaseId| reports.iter().find(|r| r.id == id).expect("checked above");
    let mut plateaus = vec![Plateau {
        range: "{0}",
        value: BigRational::from_integer(1.into()),
        witness: "any".into(),
        witness_value: BigRational::from_integer(1.into()),
        witness_ok: true,
        cases: Vec::new(),
        imported_steps: 0,
        status: PlateauStatus::Trivial,
    }];
    for p in &PLATEAUS {
        let value = rat(p.value);
        let witness_value = equal_weight_tail(p.n, &rat(p.y_sq))?;
        let verdicts: Vec<Verdict> = p.cases.iter().map(|&c| find(c).verdict).collect();
        let status = if p.cases.is_empty() {
            PlateauStatus::Trivial
        } else if verdicts.contains(&Verdict::Fail) {
            PlateauStatus::Fail
        } else if verdicts.contains(&Verdict::Inconclusive) {
            PlateauStatus::Inconclusive
        } else {
            PlateauStatus::Pass
        };
        let imported_steps = p
            .cases
            .iter()
            .map(|&c| find(c).steps.iter().filter(|s| s.verdict == StepVerdict::Imported).count())
            .sum();
        plateaus.push(Plateau {
            range: p.range,
            witness_ok: witness_value == value,
            value,
            witness: format!("{} x 1/sqrt({})", p.n, p.n),
            witness_value,
            cases: p.cases.to_vec(),
            imported_steps,
            status,
        });
    }
    let cases = CaseId::ALL.iter().map(|&id| (id, find(id).verdict)).collect();
    Ok(Summary { plateaus, cases })
}

/// Reads `<id>.json` for every case in `dir` and summarizes.
pub fn summarize_dir(dir: &Path) -> Result<Summary> {
    let mut reports = Vec::new();
    let mut missing = Vec::new();
    for id in CaseId::ALL {
        let path = dir.join(format!("{id}.json"));
        if path.exists() {
            reports.push(read_report(&path)?);
        } else {
            missing.push(id.as_str());
        }
    }
    if !missing.is_empty() {
        return Err(Error::Precondition(format!(
            "missing case reports in {}: {}",
            dir.display(),
            missing.join(", ")
        )));
    }
    summarize(&reports)
}

pub fn render_summary(s: &Summary) -> String {
    let mut out = String::from("range                    f(y)   witness          witness value  cases                  imports  status\n");
    for p in &s.plateaus {
        let cases = if p.cases.is_empty() {
            "-".to_string()
        } else {
            p.cases.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(",")
        };
        let status = match p.status {
            PlateauStatus::Trivial => "trivial",
            PlateauStatus::Pass => "pass",
            PlateauStatus::Fail => "FAIL",
            PlateauStatus::Inconclusive => "inconclusive",
        };
        let witness = format!("{}{}", p.witness_value, if p.witness_ok { "" } else { " (MISMATCH)" });
        let _ = writeln!(
            out,
            "{:<24} {:<6} {:<16} {:<14} {:<22} {:<8} {}",
            p.range, p.value, p.witness, witness, cases, p.imported_steps, status
        );
    }
    out.push_str("\ncases:");
    for (id, v) in &s.cases {
        let _ = write!(out, " {id}={v}");
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witnesses_reproduce_plateaus() {
        for (n, y_sq, value) in plateau_witnesses() {
            assert_eq!(equal_weight_tail(n, &y_sq).unwrap(), value, "n = {n}");
        }
    }

    #[test]
    fn missing_reports_are_named() {
        let e = summarize(&[]).unwrap_err().to_string();
        for id in CaseId::ALL {
            assert!(e.contains(id.as_str()), "{e}");
        }
        let dir = tempfile::tempdir().unwrap();
        let e = summarize_dir(dir.path()).unwrap_err().to_string();
        assert!(e.contains("2sqrt6") && e.contains("sqrt7"), "{e}");
    }
}
