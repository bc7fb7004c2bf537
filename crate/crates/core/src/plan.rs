//! Coverage plan files: the power genome plus one `S` line per served
//! receiver, so a plan can be re-verified without the solver.
//!
//! ```text
//! PLAN 1
//! DIM <|B|> <|T|> <|F|> <|H|>
//! COVERED <count>
//! P <b> <f> <level>        # one per locus, level index 1..=|levels|
//! S <t> <b> <f> <h>        # one per served receiver
//! END
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{
    verify_claims, CoverageReport, Dimensions, Instance, PowerVector, Service, Violation,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("plan dimensions {plan:?} do not match instance {instance:?}")]
    DimensionMismatch {
        plan: Dimensions,
        instance: Dimensions,
    },
}

fn malformed(line: usize, message: impl Into<String>) -> PlanError {
    PlanError::Malformed {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanFile {
    pub dims: Dimensions,
    /// Zero-based level index per locus, transmitter-major.
    pub levels: Vec<u32>,
    /// `(receiver, service)`, zero-based, in file order.
    pub services: Vec<(usize, Service)>,
    pub covered: usize,
}

impl PlanFile {
    pub fn from_report(instance: &Instance, genome: &PowerVector, report: &CoverageReport) -> Self {
        Self {
            dims: instance.dims(),
            levels: genome.levels().to_vec(),
            services: report.assignment.served().collect(),
            covered: report.covered_count,
        }
    }

    pub fn to_text(&self) -> String {
        let d = self.dims;
        let mut out = String::from("PLAN 1\n");
        let _ = writeln!(
            out,
            "DIM {} {} {} {}",
            d.transmitters, d.receivers, d.frequencies, d.burst_profiles
        );
        let _ = writeln!(out, "COVERED {}", self.covered);
        for (i, &level) in self.levels.iter().enumerate() {
            let (b, f) = (i / d.frequencies, i % d.frequencies);
            let _ = writeln!(out, "P {} {} {}", b + 1, f + 1, level + 1);
        }
        for (t, s) in &self.services {
            let _ = writeln!(
                out,
                "S {} {} {} {}",
                t + 1,
                s.transmitter + 1,
                s.frequency + 1,
                s.burst_profile + 1
            );
        }
        out.push_str("END\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self, PlanError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "PLAN 1")) => {}
            Some((n, _)) => return Err(malformed(n, "expected header 'PLAN 1'")),
            None => return Err(malformed(0, "empty plan")),
        }
        let ints = |n: usize, rest: &mut std::str::SplitWhitespace<'_>, count: usize| {
            let v = rest
                .by_ref()
                .take(count)
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| malformed(n, format!("invalid integer '{tok}'")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if v.len() != count || rest.next().is_some() {
                return Err(malformed(n, format!("expected {count} integers")));
            }
            Ok(v)
        };
        let (dim_line, dims) = match lines.next() {
            Some((n, l)) if l.starts_with("DIM ") => {
                let v = ints(n, &mut l[4..].split_whitespace(), 4)?;
                (n, Dimensions::new(v[0], v[1], v[2], v[3]))
            }
            Some((n, _)) => return Err(malformed(n, "expected DIM record")),
            None => return Err(malformed(0, "missing DIM record")),
        };
        if dims.frequencies == 0 {
            return Err(malformed(dim_line, "frequency count must be positive"));
        }
        let mut covered = None;
        let mut levels: Vec<Option<u32>> = vec![None; dims.loci()];
        let mut services = Vec::new();
        let one_based = |n: usize, v: usize, bound: usize, what: &str| {
            if v == 0 || v > bound {
                Err(malformed(n, format!("{what} {v} out of range 1..={bound}")))
            } else {
                Ok(v - 1)
            }
        };
        let mut ended = false;
        for (n, l) in lines.by_ref() {
            let mut tok = l.split_whitespace();
            match tok.next() {
                Some("COVERED") => {
                    let v = ints(n, &mut tok, 1)?;
                    if covered.replace(v[0]).is_some() {
                        return Err(malformed(n, "duplicate COVERED record"));
                    }
                }
                Some("P") => {
                    let v = ints(n, &mut tok, 3)?;
                    let b = one_based(n, v[0], dims.transmitters, "transmitter")?;
                    let f = one_based(n, v[1], dims.frequencies, "frequency")?;
                    if v[2] == 0 {
                        return Err(malformed(n, "level index must be at least 1"));
                    }
                    let level = u32::try_from(v[2] - 1)
                        .map_err(|_| malformed(n, "level index too large"))?;
                    if levels[b * dims.frequencies + f].replace(level).is_some() {
                        return Err(malformed(n, "duplicate P record"));
                    }
                }
                Some("S") => {
                    // Range checks on S records are left to verification so
                    // a tampered plan is reported, not rejected.
                    let v = ints(n, &mut tok, 4)?;
                    if v.contains(&0) {
                        return Err(malformed(n, "indices are one-based"));
                    }
                    services.push((v[0] - 1, Service::new(v[1] - 1, v[2] - 1, v[3] - 1)));
                }
                Some("END") => {
                    ended = true;
                    break;
                }
                Some(other) => return Err(malformed(n, format!("unknown record type '{other}'"))),
                None => unreachable!("blank lines are filtered"),
            }
        }
        if !ended {
            return Err(malformed(0, "missing END"));
        }
        let levels = levels
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| malformed(0, "missing P record for some locus"))?;
        Ok(Self {
            dims,
            levels,
            services,
            covered: covered.ok_or_else(|| malformed(0, "missing COVERED record"))?,
        })
    }

    /// Checks the plan against `instance` from scratch.
    pub fn verify(&self, instance: &Instance) -> Result<Vec<Violation>, PlanError> {
        if self.dims != instance.dims() {
            return Err(PlanError::DimensionMismatch {
                plan: self.dims,
                instance: instance.dims(),
            });
        }
        let genome = match PowerVector::from_levels(instance, self.levels.clone()) {
            Ok(g) => g,
            Err(_) => {
                let n = instance.num_power_levels();
                return Ok(self
                    .levels
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l as usize >= n)
                    .map(|(locus, &level)| Violation::LevelOutOfRange { locus, level })
                    .collect());
            }
        };
        Ok(verify_claims(instance, &genome, &self.services))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate;
    use crate::model::tests::single_channel;

    #[test]
    fn round_trip_and_verify() {
        let inst = single_channel(
            vec![vec![0.9, 0.1], vec![0.1, 0.9]],
            vec![0.0, 1.0, 2.0],
            1.0,
            0.1,
            5.0,
        );
        let p = PowerVector::from_levels(&inst, vec![2, 1]).unwrap();
        let report = evaluate(&inst, &p);
        let plan = PlanFile::from_report(&inst, &p, &report);
        let text = plan.to_text();
        assert_eq!(
            text,
            "PLAN 1\nDIM 2 2 1 1\nCOVERED 2\nP 1 1 3\nP 2 1 2\nS 1 1 1 1\nS 2 2 1 1\nEND\n"
        );
        let back = PlanFile::parse(&text).unwrap();
        assert_eq!(back, plan);
        assert!(back.verify(&inst).unwrap().is_empty());
    }

    #[test]
    fn tampered_power_is_reported() {
        let inst = single_channel(vec![vec![0.9, 0.1]], vec![0.0, 1.0], 1.0, 0.1, 5.0);
        let plan =
            PlanFile::parse("PLAN 1\nDIM 2 1 1 1\nCOVERED 1\nP 1 1 1\nP 2 1 1\nS 1 1 1 1\nEND\n")
                .unwrap();
        let v = plan.verify(&inst).unwrap();
        assert!(matches!(v.as_slice(), [Violation::Sir { .. }]));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let inst = single_channel(vec![vec![0.9]], vec![0.0, 1.0], 1.0, 0.1, 5.0);
        let plan =
            PlanFile::parse("PLAN 1\nDIM 2 1 1 1\nCOVERED 0\nP 1 1 1\nP 2 1 1\nEND\n").unwrap();
        assert!(matches!(
            plan.verify(&inst),
            Err(PlanError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn malformed_plans() {
        for text in [
            "",
            "PLAN 2\n",
            "PLAN 1\nDIM 1 1 1\n",
            "PLAN 1\nDIM 1 1 1 1\nCOVERED 0\nEND\n",
            "PLAN 1\nDIM 1 1 1 1\nCOVERED 0\nP 1 1 1\n",
            "PLAN 1\nDIM 1 1 1 1\nCOVERED 0\nP 2 1 1\nEND\n",
            "PLAN 1\nDIM 1 1 1 1\nCOVERED 0\nP 1 1 1\nS 0 1 1 1\nEND\n",
        ] {
            assert!(PlanFile::parse(text).is_err(), "{text:?}");
        }
    }
}
