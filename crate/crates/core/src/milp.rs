//! Natural big-M formulation of the assignment problem, written as a
//! CPLEX-style LP file for external MILP solvers.
//!
//! Variables are `p_b_f` (continuous power in `[0, P_max]`) and
//! `x_t_b_f_h` (binary service), with one-based indices. Rows:
//!
//! * `sir_t_b_f_h`: `a_tb p_b_f - delta_h sum_{b' != b} a_tb' p_b'_f - M x >= delta_h N - M`
//! * `assign_t`: `sum x_t_*_*_* <= 1`
//! * `cap_b_f`: `sum_t sum_h (d_t / s_h) x_t_b_f_h <= D`

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::instance_io::num;
use crate::model::{big_m, Assignment, Instance, PowerVector};

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("cannot write LP file {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Continuous { lower: f64, upper: f64 },
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    LessEq,
    GreaterEq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Sir,
    Assignment,
    Capacity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    /// `(variable index, coefficient)`.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Whether the row holds, allowing `tolerance` scaled by the magnitude of
    /// the right-hand side.
    pub fn holds(&self, values: &[f64], tolerance: f64) -> bool {
        let slack = tolerance * self.rhs.abs().max(1.0);
        let activity = self.activity(values);
        match self.sense {
            Sense::LessEq => activity <= self.rhs + slack,
            Sense::GreaterEq => activity >= self.rhs - slack,
        }
    }
}

/// Row and variable counts of an exported model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MilpSummary {
    pub continuous: usize,
    pub binary: usize,
    pub sir_rows: usize,
    pub assignment_rows: usize,
    pub capacity_rows: usize,
}

impl std::fmt::Display for MilpSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{} continuous variables", self.continuous)?;
        writeln!(f, "{} binary variables", self.binary)?;
        writeln!(f, "{} SIR rows", self.sir_rows)?;
        writeln!(f, "{} assignment rows", self.assignment_rows)?;
        write!(f, "{} capacity rows", self.capacity_rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    /// Maximized.
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<Row>,
    transmitters: usize,
    frequencies: usize,
    burst_profiles: usize,
}

impl MilpModel {
    pub fn build(instance: &Instance) -> Self {
        let d = instance.dims();
        let (nb, nt, nf, nh) = (d.transmitters, d.receivers, d.frequencies, d.burst_profiles);
        let p_max = instance.max_power();
        let mut model = MilpModel {
            variables: Vec::with_capacity(nb * nf + nt * nb * nf * nh),
            objective: Vec::new(),
            rows: Vec::new(),
            transmitters: nb,
            frequencies: nf,
            burst_profiles: nh,
        };
        for b in 0..nb {
            for f in 0..nf {
                model.variables.push(Variable {
                    name: format!("p_{}_{}", b + 1, f + 1),
                    kind: VarKind::Continuous {
                        lower: 0.0,
                        upper: p_max,
                    },
                });
            }
        }
        for t in 0..nt {
            for b in 0..nb {
                for f in 0..nf {
                    for h in 0..nh {
                        model.variables.push(Variable {
                            name: format!("x_{}_{}_{}_{}", t + 1, b + 1, f + 1, h + 1),
                            kind: VarKind::Binary,
                        });
                    }
                }
            }
        }

        for t in 0..nt {
            let revenue = instance.receiver(t).revenue;
            for b in 0..nb {
                for f in 0..nf {
                    for h in 0..nh {
                        if revenue != 0.0 {
                            model.objective.push((model.x(t, b, f, h), revenue));
                        }
                    }
                }
            }
        }

        for t in 0..nt {
            let gains = instance.fading_row(t);
            for server in 0..nb {
                for f in 0..nf {
                    for h in 0..nh {
                        let delta = instance.burst_profile(h).sir_threshold;
                        let m = big_m(instance, t, server, h);
                        let mut terms = Vec::with_capacity(nb + 1);
                        if gains[server] != 0.0 {
                            terms.push((model.p(server, f), gains[server]));
                        }
                        for (b, &a) in gains.iter().enumerate() {
                            if b != server && a != 0.0 {
                                terms.push((model.p(b, f), -delta * a));
                            }
                        }
                        terms.push((model.x(t, server, f, h), -m));
                        model.rows.push(Row {
                            name: format!("sir_{}_{}_{}_{}", t + 1, server + 1, f + 1, h + 1),
                            kind: RowKind::Sir,
                            terms,
                            sense: Sense::GreaterEq,
                            rhs: delta * instance.noise() - m,
                        });
                    }
                }
            }
        }

        for t in 0..nt {
            let mut terms = Vec::with_capacity(nb * nf * nh);
            for b in 0..nb {
                for f in 0..nf {
                    for h in 0..nh {
                        terms.push((model.x(t, b, f, h), 1.0));
                    }
                }
            }
            model.rows.push(Row {
                name: format!("assign_{}", t + 1),
                kind: RowKind::Assignment,
                terms,
                sense: Sense::LessEq,
                rhs: 1.0,
            });
        }

        for b in 0..nb {
            for f in 0..nf {
                let mut terms = Vec::new();
                for t in 0..nt {
                    let demand = instance.receiver(t).demand;
                    for h in 0..nh {
                        let c = demand / instance.burst_profile(h).spectral_efficiency;
                        if c != 0.0 {
                            terms.push((model.x(t, b, f, h), c));
                        }
                    }
                }
                model.rows.push(Row {
                    name: format!("cap_{}_{}", b + 1, f + 1),
                    kind: RowKind::Capacity,
                    terms,
                    sense: Sense::LessEq,
                    rhs: instance.bandwidth(),
                });
            }
        }
        model
    }

    /// Index of `p_b_f`.
    pub fn p(&self, b: usize, f: usize) -> usize {
        b * self.frequencies + f
    }

    /// Index of `x_t_b_f_h`.
    pub fn x(&self, t: usize, b: usize, f: usize, h: usize) -> usize {
        self.transmitters * self.frequencies
            + ((t * self.transmitters + b) * self.frequencies + f) * self.burst_profiles
            + h
    }

    pub fn summary(&self) -> MilpSummary {
        let count_rows = |k| self.rows.iter().filter(|r| r.kind == k).count();
        let binary = self
            .variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count();
        MilpSummary {
            continuous: self.variables.len() - binary,
            binary,
            sir_rows: count_rows(RowKind::Sir),
            assignment_rows: count_rows(RowKind::Assignment),
            capacity_rows: count_rows(RowKind::Capacity),
        }
    }

    /// Variable values for a discrete plan: real powers and the 0/1
    /// service indicators.
    pub fn solution_values(
        &self,
        instance: &Instance,
        p: &PowerVector,
        assignment: &Assignment,
    ) -> Vec<f64> {
        let mut values = vec![0.0; self.variables.len()];
        for b in 0..self.transmitters {
            for f in 0..self.frequencies {
                values[self.p(b, f)] = instance.power(p, b, f);
            }
        }
        for (t, s) in assignment.served() {
            values[self.x(t, s.transmitter, s.frequency, s.burst_profile)] = 1.0;
        }
        values
    }

    /// Names of rows and bounds violated by `values`.
    pub fn violations(&self, values: &[f64], tolerance: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (v, var) in self.variables.iter().enumerate() {
            let x = values[v];
            let ok = match var.kind {
                VarKind::Continuous { lower, upper } => x >= lower && x <= upper,
                VarKind::Binary => x == 0.0 || x == 1.0,
            };
            if !ok {
                out.push(var.name.clone());
            }
        }
        out.extend(
            self.rows
                .iter()
                .filter(|r| !r.holds(values, tolerance))
                .map(|r| r.name.clone()),
        );
        out
    }

    pub fn write_lp<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(
            out,
            "\\ Power, frequency and modulation assignment: big-M formulation"
        )?;
        writeln!(out, "Maximize")?;
        self.write_expression(out, "obj", &self.objective, None)?;
        writeln!(out, "Subject To")?;
        for row in &self.rows {
            let sense = match row.sense {
                Sense::LessEq => "<=",
                Sense::GreaterEq => ">=",
            };
            self.write_expression(out, &row.name, &row.terms, Some((sense, row.rhs)))?;
        }
        writeln!(out, "Bounds")?;
        for var in &self.variables {
            if let VarKind::Continuous { lower, upper } = var.kind {
                writeln!(out, " {} <= {} <= {}", num(lower), var.name, num(upper))?;
            }
        }
        writeln!(out, "Binaries")?;
        for var in self.variables.iter().filter(|v| v.kind == VarKind::Binary) {
            writeln!(out, " {}", var.name)?;
        }
        writeln!(out, "End")
    }

    pub fn to_lp_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_lp(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("LP text is ASCII")
    }

    fn write_expression<W: Write>(
        &self,
        out: &mut W,
        label: &str,
        terms: &[(usize, f64)],
        constraint: Option<(&str, f64)>,
    ) -> io::Result<()> {
        // LP readers cap line length, so long expressions wrap.
        const WRAP: usize = 200;
        let mut line = format!(" {label}:");
        let emit = |piece: String, line: &mut String, out: &mut W| -> io::Result<()> {
            if line.len() + piece.len() > WRAP {
                writeln!(out, "{line}")?;
                line.clear();
                line.push_str("   ");
            }
            line.push_str(&piece);
            Ok(())
        };
        if terms.is_empty() {
            // Keep the row syntactically valid; any variable works.
            let placeholder = &self.variables[self.variables.len() - 1].name;
            emit(format!(" 0 {placeholder}"), &mut line, out)?;
        }
        for (i, &(v, c)) in terms.iter().enumerate() {
            let name = &self.variables[v].name;
            let mut piece = String::new();
            if i == 0 {
                let _ = write!(piece, " {} {name}", num(c));
            } else if c < 0.0 {
                let _ = write!(piece, " - {} {name}", num(-c));
            } else {
                let _ = write!(piece, " + {} {name}", num(c));
            }
            emit(piece, &mut line, out)?;
        }
        if let Some((sense, rhs)) = constraint {
            emit(format!(" {sense} {}", num(rhs)), &mut line, out)?;
        }
        writeln!(out, "{line}")
    }
}

/// Writes the LP file for `instance` to `destination`.
pub fn export_lp(instance: &Instance, destination: &Path) -> Result<MilpSummary, MilpError> {
    let model = MilpModel::build(instance);
    let wrap = |source| MilpError::Write {
        path: destination.to_path_buf(),
        source,
    };
    let file = File::create(destination).map_err(wrap)?;
    let mut out = BufWriter::new(file);
    model.write_lp(&mut out).map_err(wrap)?;
    out.flush().map_err(wrap)?;
    Ok(model.summary())
}

/// Numeric spread of the fading matrix and the big-M coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningReport {
    /// Smallest and largest non-zero fading coefficient; `None` when all
    /// coefficients vanish.
    pub fading_range: Option<(f64, f64)>,
    pub big_m_range: (f64, f64),
}

impl ConditioningReport {
    /// Largest over smallest non-zero fading coefficient.
    pub fn dynamic_range(&self) -> Option<f64> {
        self.fading_range.map(|(lo, hi)| hi / lo)
    }
}

impl std::fmt::Display for ConditioningReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.fading_range {
            Some((lo, hi)) => writeln!(
                f,
                "fading: min {lo:e} max {hi:e} dynamic range {:e}",
                hi / lo
            )?,
            None => writeln!(f, "fading: all zero")?,
        }
        write!(
            f,
            "big-M: min {:e} max {:e}",
            self.big_m_range.0, self.big_m_range.1
        )
    }
}

pub fn conditioning_report(instance: &Instance) -> ConditioningReport {
    let d = instance.dims();
    let fading_range = instance.data().fading.iter().filter(|&&a| a != 0.0).fold(
        None,
        |acc: Option<(f64, f64)>, &a| match acc {
            None => Some((a, a)),
            Some((lo, hi)) => Some((lo.min(a), hi.max(a))),
        },
    );
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in 0..d.receivers {
        for b in 0..d.transmitters {
            for h in 0..d.burst_profiles {
                let m = big_m(instance, t, b, h);
                lo = lo.min(m);
                hi = hi.max(m);
            }
        }
    }
    ConditioningReport {
        fading_range,
        big_m_range: (lo, hi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::single_channel;
    use crate::model::{evaluate, Dimensions, InstanceData, Receiver};

    fn tiny() -> Instance {
        single_channel(vec![vec![0.8, 0.2]], vec![0.0, 1.0, 2.0], 4.0, 0.1, 5.0)
    }

    #[test]
    fn tiny_counts() {
        let s = MilpModel::build(&tiny()).summary();
        assert_eq!(
            s,
            MilpSummary {
                continuous: 2,
                binary: 2,
                sir_rows: 2,
                assignment_rows: 1,
                capacity_rows: 2
            }
        );
    }

    #[test]
    fn tiny_lp_text() {
        let text = MilpModel::build(&tiny()).to_lp_string();
        let expected = "\
\\ Power, frequency and modulation assignment: big-M formulation
Maximize
 obj: 1 x_1_1_1_1 + 1 x_1_2_1_1
Subject To
 sir_1_1_1_1: 0.8 p_1_1 - 0.8 p_2_1 - 2 x_1_1_1_1 >= -1.6
 sir_1_2_1_1: 0.2 p_2_1 - 3.2 p_1_1 - 6.800000000000001 x_1_2_1_1 >= -6.4
 assign_1: 1 x_1_1_1_1 + 1 x_1_2_1_1 <= 1
 cap_1_1: 1 x_1_1_1_1 <= 5
 cap_2_1: 1 x_1_2_1_1 <= 5
Bounds
 0 <= p_1_1 <= 2
 0 <= p_2_1 <= 2
Binaries
 x_1_1_1_1
 x_1_2_1_1
End
";
        assert_eq!(text, expected);
    }

    #[test]
    fn sir_rows_carry_big_m() {
        let inst = tiny();
        let model = MilpModel::build(&inst);
        let row = &model.rows[0];
        let m = big_m(&inst, 0, 0, 0);
        assert_eq!(row.terms.last(), Some(&(model.x(0, 0, 0, 0), -m)));
        assert_eq!(row.rhs, 4.0 * 0.1 - m);
    }

    #[test]
    fn long_rows_wrap() {
        let inst = single_channel(vec![vec![0.123456789; 40]], vec![0.0, 1.0], 4.0, 0.1, 5.0);
        let text = MilpModel::build(&inst).to_lp_string();
        assert!(text.lines().all(|l| l.len() <= 260));
        assert_eq!(text.lines().filter(|l| l.starts_with(" sir_")).count(), 40);
    }

    #[test]
    fn evaluator_plans_satisfy_rows() {
        let inst = single_channel(
            vec![
                vec![0.9, 0.1, 0.3],
                vec![0.2, 0.7, 0.1],
                vec![0.4, 0.4, 0.6],
            ],
            vec![0.0, 0.5, 1.0, 2.0],
            1.5,
            0.05,
            1.0,
        );
        let model = MilpModel::build(&inst);
        let mut checked = 0;
        for code in 0..64u32 {
            let levels = vec![code % 4, (code / 4) % 4, code / 16];
            let p = PowerVector::from_levels(&inst, levels).unwrap();
            let report = evaluate(&inst, &p);
            checked += report.covered_count;
            let values = model.solution_values(&inst, &p, &report.assignment);
            assert!(model.violations(&values, 1e-9).is_empty());
        }
        assert!(checked > 0);
    }

    #[test]
    fn row_evaluator_detects_broken_plan() {
        let inst = tiny();
        let model = MilpModel::build(&inst);
        let mut values = vec![0.0; model.variables.len()];
        values[model.x(0, 0, 0, 0)] = 1.0;
        assert_eq!(
            model.violations(&values, 1e-9),
            vec!["sir_1_1_1_1".to_string()]
        );
    }

    #[test]
    fn conditioning_examples() {
        let flat = single_channel(
            vec![vec![0.3, 0.3], vec![0.3, 0.3]],
            vec![0.0, 1.0],
            2.0,
            0.1,
            5.0,
        );
        assert_eq!(conditioning_report(&flat).dynamic_range(), Some(1.0));

        let wide = single_channel(vec![vec![1e-9, 1e-1]], vec![0.0, 1.0], 2.0, 0.1, 5.0);
        let r = conditioning_report(&wide);
        assert!((r.dynamic_range().unwrap() - 1e8).abs() < 1e-3);

        let inst = single_channel(
            vec![vec![0.9, 0.1, 0.3], vec![0.2, 0.7, 0.1]],
            vec![0.0, 1.0, 2.0],
            3.0,
            0.1,
            5.0,
        );
        let r = conditioning_report(&inst);
        let all: Vec<f64> = (0..2)
            .flat_map(|t| (0..3).map(move |b| (t, b)))
            .map(|(t, b)| big_m(&inst, t, b, 0))
            .collect();
        let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.big_m_range, (lo, hi));

        let dark = single_channel(vec![vec![0.0]], vec![0.0, 1.0], 2.0, 0.1, 5.0);
        assert_eq!(conditioning_report(&dark).fading_range, None);
    }

    #[test]
    fn empty_receiver_set_is_rejected() {
        let data = InstanceData {
            dims: Dimensions::new(1, 0, 1, 1),
            fading: vec![],
            noise: 0.1,
            bandwidth: 1.0,
            burst_profiles: tiny().burst_profiles().to_vec(),
            receivers: Vec::<Receiver>::new(),
            power_levels: vec![0.0, 1.0],
        };
        assert!(Instance::new(data).is_err());
    }

    #[test]
    fn export_reports_unwritable_destination() {
        let err = export_lp(&tiny(), Path::new("/nonexistent-dir/model.lp")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/model.lp"));
    }
}
