//! Line-oriented search case files.
//!
//! ```text
//! # comment
//! name            sqrt7
//! threshold       1/sqrt(7)
//! target          1/4
//! depth           7
//! grid            16
//! rounds          7
//! budget          2000000
//! constraint      1 0 0 < 1/sqrt(7) @a1-below-threshold
//! prior           2 0.1 0.5
//! expect-envelope * 0.328 0.428
//! expect-retain   0.5 0.5 0.5
//! ```
//!
//! `constraint` takes one coefficient per leading weight followed by a
//! relation (`<`, `<=`, `>`, `>=`) and a bound. Coordinates in `prior` and
//! `expect-envelope` count from 1; `*` means every coordinate.

use std::fs;
use std::path::Path;

use num_rational::BigRational;

use crate::constraint::LinearConstraint;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::search::{unit_prior, ConstraintSet, SearchConfig, SearchResult};
use crate::surd::{parse_rational, Surd};

#[derive(Clone, Debug, PartialEq)]
pub struct CaseFile {
    pub name: String,
    pub threshold: Surd,
    pub target: BigRational,
    pub depth: usize,
    pub grid: usize,
    pub rounds: usize,
    pub budget: u64,
    pub constraints: Vec<LinearConstraint>,
    pub prior: Vec<Interval>,
    pub expect_envelope: Vec<(usize, f64, f64)>,
    pub expect_retain: Vec<Vec<f64>>,
}

/// Outcome of checking a search result against a case's expectations.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    pub description: String,
    pub met: bool,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::CaseFile { line, msg: msg.into() }
}

fn float(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| err(line, format!("expected a number, got {tok:?}")))
}

fn coordinate(tok: &str, depth: usize, line: usize) -> Result<Vec<usize>> {
    if tok == "*" {
        return Ok((0..depth).collect());
    }
    let i: usize = tok.parse().map_err(|_| err(line, format!("expected a coordinate, got {tok:?}")))?;
    if i == 0 || i > depth {
        return Err(err(line, format!("coordinate {i} outside 1..={depth}")));
    }
    Ok(vec![i - 1])
}

impl CaseFile {
    pub fn load(path: &Path) -> Result<CaseFile> {
        let text = fs::read_to_string(path)?;
        let mut case = CaseFile::parse(&text)?;
        if case.name.is_empty() {
            case.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        Ok(case)
    }

    pub fn parse(text: &str) -> Result<CaseFile> {
        let mut name = String::new();
        let mut threshold = None;
        let mut target = None;
        let mut depth = None;
        let mut grid = 16;
        let mut rounds = 1;
        let mut budget = 10_000_000;
        // depth-dependent directives are resolved once depth is known
        let mut deferred: Vec<(usize, Vec<&str>)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let arg = |i: usize| toks.get(i).copied().ok_or_else(|| err(line, format!("{} needs more arguments", toks[0])));
            let count = |tok: &str| tok.parse::<usize>().map_err(|_| err(line, format!("expected a count, got {tok:?}")));
            match toks[0] {
                "name" => name = toks[1..].join(" "),
                "threshold" => {
                    threshold = Some(Surd::parse(&toks[1..].join("")).map_err(|e| err(line, e.to_string()))?)
                }
                "target" => target = Some(parse_rational(arg(1)?).map_err(|e| err(line, e.to_string()))?),
                "depth" => depth = Some(count(arg(1)?)?),
                "grid" => grid = count(arg(1)?)?,
                "rounds" => rounds = count(arg(1)?)?,
                "budget" => budget = count(arg(1)?)? as u64,
                "constraint" | "prior" | "expect-envelope" | "expect-retain" => deferred.push((line, toks)),
                other => return Err(err(line, format!("unknown directive {other:?}"))),
            }
        }

        let threshold = threshold.ok_or_else(|| err(0, "missing threshold"))?;
        let target = target.ok_or_else(|| err(0, "missing target"))?;
        let depth = depth.ok_or_else(|| err(0, "missing depth"))?;
        if depth == 0 || grid == 0 || rounds == 0 {
            return Err(err(0, "depth, grid and rounds must be positive"));
        }

        let mut constraints = Vec::new();
        let mut prior = unit_prior(depth);
        let mut expect_envelope = Vec::new();
        let mut expect_retain = Vec::new();
        for (line, toks) in deferred {
            match toks[0] {
                "constraint" => {
                    let op_at = toks
                        .iter()
                        .position(|t| matches!(*t, "<" | "<=" | ">" | ">="))
                        .ok_or_else(|| err(line, "constraint needs a relation"))?;
                    let coeffs = toks[1..op_at]
                        .iter()
                        .map(|t| t.parse::<i8>().map_err(|_| err(line, format!("bad coefficient {t:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    if coeffs.is_empty() || coeffs.len() > depth {
                        return Err(err(line, format!("need 1..={depth} coefficients")));
                    }
                    let rest = &toks[op_at + 1..];
                    let prov_at = rest.iter().position(|t| t.starts_with('@')).unwrap_or(rest.len());
                    let bound = Surd::parse(&rest[..prov_at].join("")).map_err(|e| err(line, e.to_string()))?;
                    let provenance = rest.get(prov_at).map(|t| t.trim_start_matches('@').to_string());
                    let provenance = provenance.ok_or_else(|| err(line, "constraint needs an @provenance tag"))?;
                    let c = LinearConstraint::from_relation(coeffs, toks[op_at], bound, provenance)
                        .map_err(|e| err(line, e.to_string()))?;
                    constraints.push(c);
                }
                "prior" | "expect-envelope" => {
                    if toks.len() != 4 {
                        return Err(err(line, format!("{} takes a coordinate and two bounds", toks[0])));
                    }
                    let (lo, hi) = (float(toks[2], line)?, float(toks[3], line)?);
                    if !(lo <= hi) {
                        return Err(err(line, "empty interval"));
                    }
                    for i in coordinate(toks[1], depth, line)? {
                        if toks[0] == "prior" {
                            prior[i] = Interval::new(lo, hi);
                        } else {
                            expect_envelope.push((i, lo, hi));
                        }
                    }
                }
                _ => {
                    let pt = toks[1..].iter().map(|t| float(t, line)).collect::<Result<Vec<_>>>()?;
                    if pt.is_empty() || pt.len() > depth {
                        return Err(err(line, format!("expect-retain takes 1..={depth} coordinates")));
                    }
                    expect_retain.push(pt);
                }
            }
        }

        Ok(CaseFile {
            name,
            threshold,
            target,
            depth,
            grid,
            rounds,
            budget,
            constraints,
            prior,
            expect_envelope,
            expect_retain,
        })
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            s: self.threshold.clone(),
            p: self.target.clone(),
            k: self.depth,
            d: self.grid,
            budget: self.budget,
        }
    }

    pub fn constraint_set(&self) -> ConstraintSet {
        ConstraintSet::new(self.constraints.clone())
    }

    /// Checks the final result of a run against the stated expectations.
    /// Nothing passes on an inconclusive result.
    pub fn check(&self, result: &SearchResult) -> Vec<Expectation> {
        let mut out = vec![Expectation { description: "search is conclusive".into(), met: result.conclusive }];
        for &(i, lo, hi) in &self.expect_envelope {
            let met = match &result.envelope {
                None => true,
                Some(env) => env[i].lo >= lo && env[i].hi <= hi,
            };
            out.push(Expectation { description: format!("envelope of a{} within [{lo}, {hi}]", i + 1), met });
        }
        for pt in &self.expect_retain {
            out.push(Expectation {
                description: format!("retains prefix {pt:?}"),
                met: result.retains(pt),
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
        # leading weight below the threshold
        name sample
        threshold 1/sqrt(7)
        target 1/4
        depth 3
        grid 8
        rounds 2
        constraint 1 < 1/sqrt(7) @a1
        constraint 1 1 >= 1/2 @pair
        prior 2 0.1 0.5
        expect-envelope * 0.2 0.5
        expect-retain 0.37 0.37
    ";

    #[test]
    fn parses_all_directives() {
        let c = CaseFile::parse(SAMPLE).unwrap();
        assert_eq!(c.name, "sample");
        assert_eq!(c.depth, 3);
        assert_eq!(c.rounds, 2);
        assert_eq!(c.constraints.len(), 2);
        assert_eq!(c.constraints[1].to_string(), "-a1 - a2 <= -1/2");
        assert_eq!(c.constraints[0].provenance, "a1");
        assert_eq!(c.prior[1], Interval::new(0.1, 0.5));
        assert_eq!(c.expect_envelope.len(), 3);
        assert_eq!(c.expect_retain, vec![vec![0.37, 0.37]]);
    }

    #[test]
    fn errors_name_the_line() {
        let bad = SAMPLE.replace("prior 2 0.1 0.5", "prior 9 0.1 0.5");
        match CaseFile::parse(&bad) {
            Err(Error::CaseFile { line, .. }) => assert_eq!(line, 11),
            other => panic!("unexpected {other:?}"),
        }
        assert!(CaseFile::parse("depth 2\ntarget 1/4").is_err());
        assert!(CaseFile::parse("threshold 1\ntarget 1/4\ndepth 1\nfrobnicate").is_err());
    }
}
