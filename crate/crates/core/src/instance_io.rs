//! WND1 text format for instances and a seeded synthetic instance generator.
//!
//! ```text
//! WND 1
//! DIM <|B|> <|T|> <|F|> <|H|>
//! D <bandwidth>
//! N <noise>
//! LEVELS <count> <P_1> ... <P_count>
//! BP <h> <sir_threshold> <spectral_efficiency>
//! RX <t> <demand> [<revenue>]
//! A <t> <b> <fading>
//! END
//! ```
//!
//! Indices are one-based. `A` records are sparse: absent entries are zero.
//! Blank lines and everything after `#` are ignored.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{BurstProfile, Dimensions, Instance, InstanceData, InstanceError, Receiver};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: InstanceError,
    },
    #[error("missing {0} record")]
    Missing(&'static str),
}

fn malformed(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Malformed {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(
    line: usize,
    what: &str,
    token: Option<&str>,
) -> Result<T, ParseError> {
    let token = token.ok_or_else(|| malformed(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| malformed(line, format!("invalid {what} '{token}'")))
}

fn index(line: usize, what: &str, token: Option<&str>, bound: usize) -> Result<usize, ParseError> {
    let i: usize = field(line, what, token)?;
    if i == 0 || i > bound {
        return Err(malformed(
            line,
            format!("{what} {i} out of range 1..={bound}"),
        ));
    }
    Ok(i - 1)
}

/// Parses WND1 text and validates the resulting instance.
pub fn parse(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, "WND 1")) => {}
        Some((n, other)) => {
            return Err(malformed(
                n,
                format!("expected header 'WND 1', found '{other}'"),
            ))
        }
        None => return Err(ParseError::Missing("WND header")),
    }

    let (dim_line, dims) = match lines.next() {
        Some((n, l)) => {
            let mut tok = l.split_whitespace();
            if tok.next() != Some("DIM") {
                return Err(malformed(n, "expected DIM record after header"));
            }
            let b = field(n, "transmitter count", tok.next())?;
            let t = field(n, "receiver count", tok.next())?;
            let f = field(n, "frequency count", tok.next())?;
            let h = field(n, "burst profile count", tok.next())?;
            if tok.next().is_some() {
                return Err(malformed(n, "trailing tokens in DIM record"));
            }
            (n, Dimensions::new(b, t, f, h))
        }
        None => return Err(ParseError::Missing("DIM")),
    };
    for (name, v) in [
        ("transmitter", dims.transmitters),
        ("receiver", dims.receivers),
        ("frequency", dims.frequencies),
        ("burst profile", dims.burst_profiles),
    ] {
        if v == 0 {
            return Err(malformed(
                dim_line,
                format!("{name} count must be positive"),
            ));
        }
    }

    let mut bandwidth = None;
    let mut noise = None;
    let mut levels: Option<(usize, Vec<f64>)> = None;
    let mut profiles: Vec<Option<BurstProfile>> = vec![None; dims.burst_profiles];
    let mut receivers: Vec<Option<Receiver>> = vec![None; dims.receivers];
    let mut fading = vec![0.0; dims.receivers * dims.transmitters];
    let mut seen_fading = HashSet::new();
    let mut ended = false;

    for (n, l) in lines.by_ref() {
        let mut tok = l.split_whitespace();
        let tag = tok.next().unwrap_or_default();
        match tag {
            "D" | "N" => {
                let v: f64 = field(n, tag, tok.next())?;
                let slot = if tag == "D" {
                    &mut bandwidth
                } else {
                    &mut noise
                };
                if slot.replace((n, v)).is_some() {
                    return Err(malformed(n, format!("duplicate {tag} record")));
                }
            }
            "LEVELS" => {
                let count: usize = field(n, "level count", tok.next())?;
                let values = (0..count)
                    .map(|i| field(n, &format!("power level {}", i + 1), tok.next()))
                    .collect::<Result<Vec<f64>, _>>()?;
                if levels.replace((n, values)).is_some() {
                    return Err(malformed(n, "duplicate LEVELS record"));
                }
            }
            "BP" => {
                let h = index(n, "burst profile", tok.next(), dims.burst_profiles)?;
                let sir_threshold = field(n, "SIR threshold", tok.next())?;
                let spectral_efficiency = field(n, "spectral efficiency", tok.next())?;
                let bp = BurstProfile {
                    sir_threshold,
                    spectral_efficiency,
                };
                if !(sir_threshold > 0.0) || !(spectral_efficiency > 0.0) {
                    return Err(ParseError::Invalid {
                        line: n,
                        source: InstanceError::InvalidBurstProfile {
                            profile: h,
                            field: if sir_threshold > 0.0 {
                                "spectral efficiency"
                            } else {
                                "SIR threshold"
                            },
                            value: if sir_threshold > 0.0 {
                                spectral_efficiency
                            } else {
                                sir_threshold
                            },
                        },
                    });
                }
                if profiles[h].replace(bp).is_some() {
                    return Err(malformed(
                        n,
                        format!("duplicate BP record for profile {}", h + 1),
                    ));
                }
            }
            "RX" => {
                let t = index(n, "receiver", tok.next(), dims.receivers)?;
                let demand: f64 = field(n, "demand", tok.next())?;
                let revenue: f64 = match tok.next() {
                    Some(r) => field(n, "revenue", Some(r))?,
                    None => 1.0,
                };
                for (name, v) in [("demand", demand), ("revenue", revenue)] {
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(ParseError::Invalid {
                            line: n,
                            source: InstanceError::InvalidReceiver {
                                receiver: t,
                                field: name,
                                value: v,
                            },
                        });
                    }
                }
                if receivers[t].replace(Receiver { demand, revenue }).is_some() {
                    return Err(malformed(
                        n,
                        format!("duplicate RX record for receiver {}", t + 1),
                    ));
                }
            }
            "A" => {
                let t = index(n, "receiver", tok.next(), dims.receivers)?;
                let b = index(n, "transmitter", tok.next(), dims.transmitters)?;
                let a: f64 = field(n, "fading coefficient", tok.next())?;
                if !(0.0..=1.0).contains(&a) {
                    return Err(ParseError::Invalid {
                        line: n,
                        source: InstanceError::FadingOutOfRange {
                            receiver: t,
                            transmitter: b,
                            value: a,
                        },
                    });
                }
                if !seen_fading.insert((t, b)) {
                    return Err(malformed(
                        n,
                        format!(
                            "duplicate A record for receiver {} transmitter {}",
                            t + 1,
                            b + 1
                        ),
                    ));
                }
                fading[t * dims.transmitters + b] = a;
            }
            "END" => {
                ended = true;
                if tok.next().is_some() {
                    return Err(malformed(n, "trailing tokens after END"));
                }
                break;
            }
            "WND" | "DIM" => return Err(malformed(n, format!("unexpected {tag} record"))),
            other => return Err(malformed(n, format!("unknown record type '{other}'"))),
        }
        if let Some(extra) = tok.next() {
            return Err(malformed(n, format!("unexpected trailing token '{extra}'")));
        }
    }
    if !ended {
        return Err(ParseError::Missing("END"));
    }
    if let Some((n, _)) = lines.next() {
        return Err(malformed(n, "content after END"));
    }

    let (d_line, bandwidth) = bandwidth.ok_or(ParseError::Missing("D"))?;
    let (n_line, noise) = noise.ok_or(ParseError::Missing("N"))?;
    let (l_line, power_levels) = levels.ok_or(ParseError::Missing("LEVELS"))?;
    let burst_profiles = profiles
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(ParseError::Missing("BP"))?;
    let receivers = receivers
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(ParseError::Missing("RX"))?;

    let data = InstanceData {
        dims,
        fading,
        noise,
        bandwidth,
        burst_profiles,
        receivers,
        power_levels,
    };
    Instance::new(data).map_err(|source| {
        let line = match source {
            InstanceError::NonPositiveNoise(_) => n_line,
            InstanceError::NonPositiveBandwidth(_) => d_line,
            InstanceError::TooFewPowerLevels(_)
            | InstanceError::FirstLevelNotZero(_)
            | InstanceError::PowerLevelsNotIncreasing { .. } => l_line,
            _ => dim_line,
        };
        ParseError::Invalid { line, source }
    })
}

/// Canonical WND1 text for `instance`. Numbers use the shortest decimal that
/// round-trips to the same `f64`.
pub fn serialize(instance: &Instance) -> String {
    let d = instance.dims();
    let mut out = String::new();
    let _ = writeln!(out, "WND 1");
    let _ = writeln!(
        out,
        "DIM {} {} {} {}",
        d.transmitters, d.receivers, d.frequencies, d.burst_profiles
    );
    let _ = writeln!(out, "D {}", num(instance.bandwidth()));
    let _ = writeln!(out, "N {}", num(instance.noise()));
    let _ = write!(out, "LEVELS {}", instance.num_power_levels());
    for &p in instance.power_levels() {
        let _ = write!(out, " {}", num(p));
    }
    out.push('\n');
    for (h, bp) in instance.burst_profiles().iter().enumerate() {
        let _ = writeln!(
            out,
            "BP {} {} {}",
            h + 1,
            num(bp.sir_threshold),
            num(bp.spectral_efficiency)
        );
    }
    for (t, rx) in instance.receivers().iter().enumerate() {
        let _ = writeln!(out, "RX {} {} {}", t + 1, num(rx.demand), num(rx.revenue));
    }
    for t in 0..d.receivers {
        for (b, &a) in instance.fading_row(t).iter().enumerate() {
            if a != 0.0 {
                let _ = writeln!(out, "A {} {} {}", t + 1, b + 1, num(a));
            }
        }
    }
    out.push_str("END\n");
    out
}

/// Shortest round-trip decimal, with negative zero normalized.
pub(crate) fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Instance dimensions of the fifteen reference WiMAX scenarios.
pub const PRESETS: [(&str, Dimensions); 15] = [
    ("S1", dims(12, 100, 1, 1)),
    ("S2", dims(12, 169, 1, 1)),
    ("S3", dims(12, 196, 1, 1)),
    ("S4", dims(12, 225, 1, 1)),
    ("S5", dims(12, 289, 1, 1)),
    ("S6", dims(12, 361, 1, 1)),
    ("S7", dims(18, 400, 1, 1)),
    ("R1", dims(18, 400, 3, 4)),
    ("R2", dims(18, 441, 3, 4)),
    ("R3", dims(27, 484, 3, 4)),
    ("R4", dims(27, 529, 3, 4)),
    ("Q1", dims(36, 400, 1, 4)),
    ("Q2", dims(36, 441, 1, 4)),
    ("Q3", dims(36, 484, 1, 4)),
    ("Q4", dims(36, 529, 1, 4)),
];

const fn dims(
    transmitters: usize,
    receivers: usize,
    frequencies: usize,
    burst_profiles: usize,
) -> Dimensions {
    Dimensions {
        transmitters,
        receivers,
        frequencies,
        burst_profiles,
    }
}

/// Looks up a preset by name (case-insensitive).
pub fn preset(name: &str) -> Option<Dimensions> {
    PRESETS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|&(_, d)| d)
}

/// SIR thresholds (dB) and spectral efficiencies of the default burst
/// profile ladder: QPSK 1/2, QPSK 3/4, 16-QAM 3/4, 64-QAM 3/4.
const DEFAULT_PROFILES: [(f64, f64); 4] = [(6.4, 1.0), (9.4, 1.5), (16.4, 3.0), (22.7, 4.5)];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("at least two power levels are required, got {0}")]
    TooFewPowerLevels(usize),
    #[error("level ratio must lie in (0, 1), got {0}")]
    LevelRatio(f64),
    #[error("demand range [{0}, {1}] is invalid")]
    DemandRange(f64, f64),
    #[error("{what} has {actual} entries, expected one per burst profile ({expected})")]
    ProfileTable {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Parameters of the synthetic generator.
///
/// Transmitters and receivers are dropped uniformly in a square; fading
/// follows a log-distance law `min(1, (d0 / dist)^eta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub dims: Dimensions,
    /// Side of the square deployment area, meters.
    pub area_side: f64,
    pub pathloss_exponent: f64,
    /// Distance below which fading saturates at 1, meters.
    pub reference_distance: f64,
    pub noise: f64,
    pub bandwidth: f64,
    pub demand_min: f64,
    pub demand_max: f64,
    /// Total number of power levels, including the switched-off level.
    pub power_levels: usize,
    pub max_power: f64,
    /// Ratio between consecutive non-zero levels.
    pub level_ratio: f64,
    /// Linear SIR thresholds; empty selects the default ladder.
    pub sir_thresholds: Vec<f64>,
    /// Spectral efficiencies; empty selects the default ladder.
    pub spectral_efficiencies: Vec<f64>,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            dims: dims(12, 100, 1, 1),
            area_side: 2000.0,
            pathloss_exponent: 3.5,
            reference_distance: 10.0,
            noise: 1e-9,
            bandwidth: 20.0,
            demand_min: 1.0,
            demand_max: 3.0,
            power_levels: 6,
            max_power: 1.0,
            level_ratio: 0.5,
            sir_thresholds: Vec::new(),
            spectral_efficiencies: Vec::new(),
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_dims(dims: Dimensions, seed: u64) -> Self {
        Self {
            dims,
            seed,
            ..Self::default()
        }
    }

    /// Power ladder `[0, P_max r^(L-2), ..., P_max r, P_max]`.
    pub fn power_ladder(&self) -> Vec<f64> {
        let mut levels = vec![0.0];
        for i in (0..self.power_levels - 1).rev() {
            levels.push(self.max_power * self.level_ratio.powi(i as i32));
        }
        levels
    }

    /// Burst profiles: explicit tables if given, otherwise the first `|H|`
    /// entries of the default ladder, extended geometrically past four.
    pub fn profiles(&self) -> Result<Vec<BurstProfile>, GeneratorError> {
        let h = self.dims.burst_profiles;
        let explicit = !self.sir_thresholds.is_empty() || !self.spectral_efficiencies.is_empty();
        if explicit {
            for (what, v) in [
                ("sir_thresholds", &self.sir_thresholds),
                ("spectral_efficiencies", &self.spectral_efficiencies),
            ] {
                if v.len() != h {
                    return Err(GeneratorError::ProfileTable {
                        what,
                        expected: h,
                        actual: v.len(),
                    });
                }
            }
            return Ok(self
                .sir_thresholds
                .iter()
                .zip(&self.spectral_efficiencies)
                .map(|(&sir_threshold, &spectral_efficiency)| BurstProfile {
                    sir_threshold,
                    spectral_efficiency,
                })
                .collect());
        }
        Ok((0..h)
            .map(|i| {
                let (db, s) = if i < DEFAULT_PROFILES.len() {
                    DEFAULT_PROFILES[i]
                } else {
                    let (db, s) = DEFAULT_PROFILES[DEFAULT_PROFILES.len() - 1];
                    let extra = (i + 1 - DEFAULT_PROFILES.len()) as f64;
                    (db + 3.0 * extra, s + 0.5 * extra)
                };
                BurstProfile {
                    sir_threshold: 10f64.powf(db / 10.0),
                    spectral_efficiency: s,
                }
            })
            .collect())
    }

    fn validate(&self) -> Result<(), GeneratorError> {
        let d = self.dims;
        for (name, v) in [
            ("transmitter count", d.transmitters),
            ("receiver count", d.receivers),
            ("frequency count", d.frequencies),
            ("burst profile count", d.burst_profiles),
        ] {
            if v == 0 {
                return Err(GeneratorError::NonPositive(name));
            }
        }
        for (name, v) in [
            ("area side", self.area_side),
            ("path-loss exponent", self.pathloss_exponent),
            ("reference distance", self.reference_distance),
            ("noise", self.noise),
            ("bandwidth", self.bandwidth),
            ("maximum power", self.max_power),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(GeneratorError::NonPositive(name));
            }
        }
        if self.power_levels < 2 {
            return Err(GeneratorError::TooFewPowerLevels(self.power_levels));
        }
        if !(self.level_ratio > 0.0 && self.level_ratio < 1.0) {
            return Err(GeneratorError::LevelRatio(self.level_ratio));
        }
        if !(self.demand_min >= 0.0
            && self.demand_max >= self.demand_min
            && self.demand_max.is_finite())
        {
            return Err(GeneratorError::DemandRange(
                self.demand_min,
                self.demand_max,
            ));
        }
        Ok(())
    }
}

/// Builds a synthetic instance, fully determined by `config`.
///
/// Random draws happen in a fixed order: transmitter positions, receiver
/// positions, then demands. Propagation parameters never affect the stream.
pub fn generate(config: &GeneratorConfig) -> Result<Instance, GeneratorError> {
    config.validate()?;
    let d = config.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut drop = |n: usize| -> Vec<(f64, f64)> {
        (0..n)
            .map(|_| {
                let x = rng.random::<f64>() * config.area_side;
                let y = rng.random::<f64>() * config.area_side;
                (x, y)
            })
            .collect()
    };
    let transmitters = drop(d.transmitters);
    let receivers_at = drop(d.receivers);

    let mut fading = Vec::with_capacity(d.receivers * d.transmitters);
    for &(rx, ry) in &receivers_at {
        for &(tx, ty) in &transmitters {
            let dist = (rx - tx).hypot(ry - ty).max(config.reference_distance);
            let a = (config.reference_distance / dist).powf(config.pathloss_exponent);
            fading.push(a.min(1.0));
        }
    }

    let receivers = (0..d.receivers)
        .map(|_| {
            let u: f64 = rng.random();
            Receiver::new(config.demand_min + u * (config.demand_max - config.demand_min))
        })
        .collect();

    let data = InstanceData {
        dims: d,
        fading,
        noise: config.noise,
        bandwidth: config.bandwidth,
        burst_profiles: config.profiles()?,
        receivers,
        power_levels: config.power_ladder(),
    };
    Ok(Instance::new(data)?)
}
