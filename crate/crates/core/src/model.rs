//! Network instance, SIR arithmetic and the receiver-assignment evaluator.
//!
//! All indices are zero-based in memory. File formats use one-based indices
//! and convert at the boundary.

use std::fmt;

use thiserror::Error;

/// Violated [`Instance`] invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("dimension {0} must be positive")]
    EmptyDimension(&'static str),
    #[error("{what} has {actual} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("at least two power levels are required, got {0}")]
    TooFewPowerLevels(usize),
    #[error("first power level must be 0 (switched off), got {0}")]
    FirstLevelNotZero(f64),
    #[error("power levels not strictly increasing at level {index}")]
    PowerLevelsNotIncreasing { index: usize },
    #[error("fading coefficient a[{receiver}][{transmitter}] = {value} outside [0, 1]")]
    FadingOutOfRange {
        receiver: usize,
        transmitter: usize,
        value: f64,
    },
    #[error("noise must be positive, got {0}")]
    NonPositiveNoise(f64),
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("burst profile {profile}: {field} must be positive, got {value}")]
    InvalidBurstProfile {
        profile: usize,
        field: &'static str,
        value: f64,
    },
    #[error("receiver {receiver}: {field} must be finite and non-negative, got {value}")]
    InvalidReceiver {
        receiver: usize,
        field: &'static str,
        value: f64,
    },
}

/// Sizes of the four index sets of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimensions {
    pub transmitters: usize,
    pub receivers: usize,
    pub frequencies: usize,
    pub burst_profiles: usize,
}

impl Dimensions {
    pub fn new(
        transmitters: usize,
        receivers: usize,
        frequencies: usize,
        burst_profiles: usize,
    ) -> Self {
        Self {
            transmitters,
            receivers,
            frequencies,
            burst_profiles,
        }
    }

    /// Number of (transmitter, frequency) loci in a power vector.
    pub fn loci(&self) -> usize {
        self.transmitters * self.frequencies
    }
}

/// Transmission scheme: SIR threshold and spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstProfile {
    pub sir_threshold: f64,
    /// Served demand per unit of bandwidth; a receiver with demand `d`
    /// consumes `d / spectral_efficiency` of the frequency bandwidth.
    pub spectral_efficiency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Receiver {
    pub demand: f64,
    pub revenue: f64,
}

impl Receiver {
    pub fn new(demand: f64) -> Self {
        Self {
            demand,
            revenue: 1.0,
        }
    }
}

/// Raw instance data, validated by [`Instance::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceData {
    pub dims: Dimensions,
    /// Row-major by receiver: entry `t * transmitters + b` is `a_tb`.
    pub fading: Vec<f64>,
    pub noise: f64,
    pub bandwidth: f64,
    pub burst_profiles: Vec<BurstProfile>,
    pub receivers: Vec<Receiver>,
    pub power_levels: Vec<f64>,
}

/// A validated wireless network. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    data: InstanceData,
}

impl Instance {
    pub fn new(data: InstanceData) -> Result<Self, InstanceError> {
        let dims = data.dims;
        for (name, n) in [
            ("transmitters", dims.transmitters),
            ("receivers", dims.receivers),
            ("frequencies", dims.frequencies),
            ("burst profiles", dims.burst_profiles),
        ] {
            if n == 0 {
                return Err(InstanceError::EmptyDimension(name));
            }
        }
        let check_len = |what, expected, actual| {
            if expected == actual {
                Ok(())
            } else {
                Err(InstanceError::LengthMismatch {
                    what,
                    expected,
                    actual,
                })
            }
        };
        check_len(
            "fading matrix",
            dims.receivers * dims.transmitters,
            data.fading.len(),
        )?;
        check_len(
            "burst profile table",
            dims.burst_profiles,
            data.burst_profiles.len(),
        )?;
        check_len("receiver table", dims.receivers, data.receivers.len())?;

        let levels = &data.power_levels;
        if levels.len() < 2 {
            return Err(InstanceError::TooFewPowerLevels(levels.len()));
        }
        if levels[0] != 0.0 {
            return Err(InstanceError::FirstLevelNotZero(levels[0]));
        }
        for i in 1..levels.len() {
            if !(levels[i] > levels[i - 1]) || !levels[i].is_finite() {
                return Err(InstanceError::PowerLevelsNotIncreasing { index: i + 1 });
            }
        }
        if !(data.noise > 0.0) || !data.noise.is_finite() {
            return Err(InstanceError::NonPositiveNoise(data.noise));
        }
        if !(data.bandwidth > 0.0) || !data.bandwidth.is_finite() {
            return Err(InstanceError::NonPositiveBandwidth(data.bandwidth));
        }
        for (h, bp) in data.burst_profiles.iter().enumerate() {
            if !(bp.sir_threshold > 0.0) || !bp.sir_threshold.is_finite() {
                return Err(InstanceError::InvalidBurstProfile {
                    profile: h,
                    field: "SIR threshold",
                    value: bp.sir_threshold,
                });
            }
            if !(bp.spectral_efficiency > 0.0) || !bp.spectral_efficiency.is_finite() {
                return Err(InstanceError::InvalidBurstProfile {
                    profile: h,
                    field: "spectral efficiency",
                    value: bp.spectral_efficiency,
                });
            }
        }
        for (t, rx) in data.receivers.iter().enumerate() {
            if !(rx.demand >= 0.0) || !rx.demand.is_finite() {
                return Err(InstanceError::InvalidReceiver {
                    receiver: t,
                    field: "demand",
                    value: rx.demand,
                });
            }
            if !(rx.revenue >= 0.0) || !rx.revenue.is_finite() {
                return Err(InstanceError::InvalidReceiver {
                    receiver: t,
                    field: "revenue",
                    value: rx.revenue,
                });
            }
        }
        for (i, &a) in data.fading.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return Err(InstanceError::FadingOutOfRange {
                    receiver: i / dims.transmitters,
                    transmitter: i % dims.transmitters,
                    value: a,
                });
            }
        }
        Ok(Self { data })
    }

    pub fn dims(&self) -> Dimensions {
        self.data.dims
    }

    pub fn num_transmitters(&self) -> usize {
        self.data.dims.transmitters
    }

    pub fn num_receivers(&self) -> usize {
        self.data.dims.receivers
    }

    pub fn num_frequencies(&self) -> usize {
        self.data.dims.frequencies
    }

    pub fn num_burst_profiles(&self) -> usize {
        self.data.dims.burst_profiles
    }

    #[inline]
    pub fn fading(&self, receiver: usize, transmitter: usize) -> f64 {
        self.data.fading[receiver * self.data.dims.transmitters + transmitter]
    }

    /// Fading coefficients seen by one receiver, indexed by transmitter.
    pub fn fading_row(&self, receiver: usize) -> &[f64] {
        let n = self.data.dims.transmitters;
        &self.data.fading[receiver * n..(receiver + 1) * n]
    }

    pub fn noise(&self) -> f64 {
        self.data.noise
    }

    pub fn bandwidth(&self) -> f64 {
        self.data.bandwidth
    }

    pub fn burst_profile(&self, h: usize) -> &BurstProfile {
        &self.data.burst_profiles[h]
    }

    pub fn burst_profiles(&self) -> &[BurstProfile] {
        &self.data.burst_profiles
    }

    pub fn receiver(&self, t: usize) -> &Receiver {
        &self.data.receivers[t]
    }

    pub fn receivers(&self) -> &[Receiver] {
        &self.data.receivers
    }

    pub fn power_levels(&self) -> &[f64] {
        &self.data.power_levels
    }

    pub fn num_power_levels(&self) -> usize {
        self.data.power_levels.len()
    }

    pub fn max_power(&self) -> f64 {
        *self.data.power_levels.last().expect("validated non-empty")
    }

    pub fn data(&self) -> &InstanceData {
        &self.data
    }

    pub fn into_data(self) -> InstanceData {
        self.data
    }

    /// Emitted power of transmitter `b` on frequency `f` under `p`.
    #[inline]
    pub fn power(&self, p: &PowerVector, b: usize, f: usize) -> f64 {
        self.data.power_levels[p.level(b, f) as usize]
    }
}

/// Power vector genome: one level index per (transmitter, frequency) locus,
/// laid out transmitter-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PowerVector {
    levels: Vec<u32>,
    frequencies: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PowerVectorError {
    #[error("power vector has {actual} loci, instance needs {expected}")]
    WrongLength { expected: usize, actual: usize },
    #[error("locus {locus} holds level index {level}, instance has {levels} levels")]
    LevelOutOfRange {
        locus: usize,
        level: u32,
        levels: usize,
    },
}

impl PowerVector {
    /// All transmitters switched off.
    pub fn zeros(instance: &Instance) -> Self {
        Self {
            levels: vec![0; instance.dims().loci()],
            frequencies: instance.num_frequencies(),
        }
    }

    pub fn from_levels(instance: &Instance, levels: Vec<u32>) -> Result<Self, PowerVectorError> {
        let expected = instance.dims().loci();
        if levels.len() != expected {
            return Err(PowerVectorError::WrongLength {
                expected,
                actual: levels.len(),
            });
        }
        let n = instance.num_power_levels();
        if let Some((locus, &level)) = levels.iter().enumerate().find(|(_, &l)| l as usize >= n) {
            return Err(PowerVectorError::LevelOutOfRange {
                locus,
                level,
                levels: n,
            });
        }
        Ok(Self {
            levels,
            frequencies: instance.num_frequencies(),
        })
    }

    #[inline]
    pub fn locus(&self, b: usize, f: usize) -> usize {
        b * self.frequencies + f
    }

    #[inline]
    pub fn level(&self, b: usize, f: usize) -> u32 {
        self.levels[self.locus(b, f)]
    }

    #[inline]
    pub fn set_level(&mut self, b: usize, f: usize, level: u32) {
        let i = self.locus(b, f);
        self.levels[i] = level;
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn levels_mut(&mut self) -> &mut [u32] {
        &mut self.levels
    }

    pub fn num_frequencies(&self) -> usize {
        self.frequencies
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Number of loci that are switched on.
    pub fn active_loci(&self) -> usize {
        self.levels.iter().filter(|&&l| l > 0).count()
    }
}

/// Serving triple for a covered receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Service {
    pub transmitter: usize,
    pub frequency: usize,
    pub burst_profile: usize,
}

impl Service {
    pub fn new(transmitter: usize, frequency: usize, burst_profile: usize) -> Self {
        Self {
            transmitter,
            frequency,
            burst_profile,
        }
    }
}

/// Per-receiver service decisions plus consumed bandwidth per
/// (transmitter, frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    services: Vec<Option<Service>>,
    load: Vec<f64>,
    frequencies: usize,
}

impl Assignment {
    /// No receiver served.
    pub fn empty(instance: &Instance) -> Self {
        Self {
            services: vec![None; instance.num_receivers()],
            load: vec![0.0; instance.dims().loci()],
            frequencies: instance.num_frequencies(),
        }
    }

    /// Builds an assignment from explicit service decisions, recomputing loads
    /// in ascending receiver order. Services are not checked; use [`verify`].
    pub fn from_services(instance: &Instance, services: Vec<Option<Service>>) -> Self {
        let mut a = Self::empty(instance);
        for (t, service) in services.iter().enumerate() {
            if let Some(s) = service {
                let loci = a.load.len();
                let i = s.transmitter * a.frequencies + s.frequency;
                if i < loci
                    && s.burst_profile < instance.num_burst_profiles()
                    && t < instance.num_receivers()
                {
                    a.load[i] += instance.receiver(t).demand
                        / instance.burst_profile(s.burst_profile).spectral_efficiency;
                }
            }
        }
        a.services = services;
        a
    }

    pub fn service(&self, receiver: usize) -> Option<Service> {
        self.services[receiver]
    }

    pub fn services(&self) -> &[Option<Service>] {
        &self.services
    }

    /// Consumed bandwidth of transmitter `b` on frequency `f`.
    pub fn load(&self, b: usize, f: usize) -> f64 {
        self.load[b * self.frequencies + f]
    }

    pub fn loads(&self) -> &[f64] {
        &self.load
    }

    pub fn served_count(&self) -> usize {
        self.services.iter().filter(|s| s.is_some()).count()
    }

    /// `(receiver, service)` pairs in ascending receiver order.
    pub fn served(&self) -> impl Iterator<Item = (usize, Service)> + '_ {
        self.services
            .iter()
            .enumerate()
            .filter_map(|(t, s)| s.map(|s| (t, s)))
    }
}

/// What the genetic algorithm maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Number of covered receivers.
    #[default]
    Coverage,
    /// Total revenue of covered receivers.
    Revenue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub covered_count: usize,
    pub covered_revenue: f64,
    pub assignment: Assignment,
}

impl CoverageReport {
    pub fn objective_value(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Coverage => self.covered_count as f64,
            Objective::Revenue => self.covered_revenue,
        }
    }
}

/// Power received by `t` from `b` on `f`.
#[inline]
pub fn received_power(instance: &Instance, p: &PowerVector, t: usize, b: usize, f: usize) -> f64 {
    instance.fading(t, b) * instance.power(p, b, f)
}

/// Sum of co-frequency powers at `t` from every transmitter other than `server`,
/// accumulated in ascending transmitter order.
#[inline]
fn interference(instance: &Instance, p: &PowerVector, t: usize, server: usize, f: usize) -> f64 {
    let row = instance.fading_row(t);
    let mut sum = 0.0;
    for (b, &a) in row.iter().enumerate() {
        if b != server {
            sum += a * instance.power(p, b, f);
        }
    }
    sum
}

/// Left-hand side of the linear SIR inequality for `(server, f, h)` at `t`.
pub fn sir_lhs(
    instance: &Instance,
    p: &PowerVector,
    t: usize,
    server: usize,
    f: usize,
    h: usize,
) -> f64 {
    let delta = instance.burst_profile(h).sir_threshold;
    received_power(instance, p, t, server, f) - delta * interference(instance, p, t, server, f)
}

/// Slack of the linear SIR inequality; `t` can be served by `(server, f, h)`
/// iff the result is non-negative.
pub fn sir_margin(
    instance: &Instance,
    p: &PowerVector,
    t: usize,
    server: usize,
    f: usize,
    h: usize,
) -> f64 {
    let delta = instance.burst_profile(h).sir_threshold;
    sir_lhs(instance, p, t, server, f, h) - delta * instance.noise()
}

/// Big-M coefficient that makes the SIR row of `(t, server, ·, h)` redundant
/// when the assignment variable is zero.
pub fn big_m(instance: &Instance, t: usize, server: usize, h: usize) -> f64 {
    let delta = instance.burst_profile(h).sir_threshold;
    let p_max = instance.max_power();
    let mut worst = 0.0;
    for (b, &a) in instance.fading_row(t).iter().enumerate() {
        if b != server {
            worst += a * p_max;
        }
    }
    delta * instance.noise() + delta * worst
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    frequency: usize,
    profile: usize,
    lhs: f64,
    frequency_key: f64,
    efficiency: f64,
}

/// Assigns every receiver under `p` and reports coverage.
///
/// Receivers are processed in ascending index. Each one is bound to the
/// transmitter delivering the strongest received power on any frequency
/// (ties to lower transmitter, then lower frequency). The feasible
/// `(frequency, profile)` pairs for that server are ranked by the best SIR
/// left-hand side reachable on the frequency, then by spectral efficiency,
/// then by index, and the first pair with residual bandwidth wins.
pub fn evaluate(instance: &Instance, p: &PowerVector) -> CoverageReport {
    let dims = instance.dims();
    let mut assignment = Assignment::empty(instance);
    let mut covered_count = 0;
    let mut covered_revenue = 0.0;
    let mut candidates: Vec<Candidate> = Vec::with_capacity(dims.frequencies * dims.burst_profiles);
    let bandwidth = instance.bandwidth();
    let noise = instance.noise();

    for t in 0..dims.receivers {
        let mut best_power = 0.0;
        let mut server = None;
        for b in 0..dims.transmitters {
            for f in 0..dims.frequencies {
                let rp = received_power(instance, p, t, b, f);
                if rp > best_power {
                    best_power = rp;
                    server = Some(b);
                }
            }
        }
        let Some(server) = server else {
            continue;
        };

        candidates.clear();
        for f in 0..dims.frequencies {
            let serving = received_power(instance, p, t, server, f);
            let interfering = interference(instance, p, t, server, f);
            let first = candidates.len();
            for (h, bp) in instance.burst_profiles().iter().enumerate() {
                let lhs = serving - bp.sir_threshold * interfering;
                if lhs - bp.sir_threshold * noise >= 0.0 {
                    candidates.push(Candidate {
                        frequency: f,
                        profile: h,
                        lhs,
                        frequency_key: f64::NEG_INFINITY,
                        efficiency: bp.spectral_efficiency,
                    });
                }
            }
            let key = candidates[first..]
                .iter()
                .map(|c| c.lhs)
                .fold(f64::NEG_INFINITY, f64::max);
            for c in &mut candidates[first..] {
                c.frequency_key = key;
            }
        }
        candidates.sort_by(|x, y| {
            y.frequency_key
                .total_cmp(&x.frequency_key)
                .then(y.efficiency.total_cmp(&x.efficiency))
                .then(x.frequency.cmp(&y.frequency))
                .then(x.profile.cmp(&y.profile))
        });

        let rx = instance.receiver(t);
        for c in &candidates {
            let slot = server * dims.frequencies + c.frequency;
            let after = assignment.load[slot] + rx.demand / c.efficiency;
            if after <= bandwidth {
                assignment.load[slot] = after;
                assignment.services[t] = Some(Service::new(server, c.frequency, c.profile));
                covered_count += 1;
                covered_revenue += rx.revenue;
                break;
            }
        }
    }

    CoverageReport {
        covered_count,
        covered_revenue,
        assignment,
    }
}

/// A defect found in a coverage plan.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    GenomeLength {
        expected: usize,
        actual: usize,
    },
    LevelOutOfRange {
        locus: usize,
        level: u32,
    },
    ReceiverCount {
        expected: usize,
        actual: usize,
    },
    IndexOutOfRange {
        receiver: usize,
        service: Service,
    },
    MultipleServers {
        receiver: usize,
        count: usize,
    },
    Sir {
        receiver: usize,
        service: Service,
        margin: f64,
    },
    Capacity {
        transmitter: usize,
        frequency: usize,
        load: f64,
        bandwidth: f64,
    },
    LoadMismatch {
        transmitter: usize,
        frequency: usize,
        recorded: f64,
        actual: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // One-based indices, as in the file formats.
        match self {
            Violation::GenomeLength { expected, actual } => {
                write!(f, "genome has {actual} loci, expected {expected}")
            }
            Violation::LevelOutOfRange { locus, level } => {
                write!(f, "locus {} has invalid level index {}", locus + 1, level + 1)
            }
            Violation::ReceiverCount { expected, actual } => {
                write!(f, "plan covers {actual} receivers, instance has {expected}")
            }
            Violation::IndexOutOfRange { receiver, service } => write!(
                f,
                "receiver {}: service ({}, {}, {}) references an index out of range",
                receiver + 1,
                service.transmitter + 1,
                service.frequency + 1,
                service.burst_profile + 1
            ),
            Violation::MultipleServers { receiver, count } => {
                write!(f, "receiver {} is served {count} times", receiver + 1)
            }
            Violation::Sir {
                receiver,
                service,
                margin,
            } => write!(
                f,
                "SIR violation: receiver {} served by ({}, {}, {}) with margin {margin}",
                receiver + 1,
                service.transmitter + 1,
                service.frequency + 1,
                service.burst_profile + 1
            ),
            Violation::Capacity {
                transmitter,
                frequency,
                load,
                bandwidth,
            } => write!(
                f,
                "capacity violation: transmitter {} frequency {} carries {load} > {bandwidth}",
                transmitter + 1,
                frequency + 1
            ),
            Violation::LoadMismatch {
                transmitter,
                frequency,
                recorded,
                actual,
            } => write!(
                f,
                "load bookkeeping mismatch at transmitter {} frequency {}: recorded {recorded}, actual {actual}",
                transmitter + 1,
                frequency + 1
            ),
        }
    }
}

/// Re-checks a plan from scratch: SIR feasibility, the single-server rule and
/// bandwidth capacity. Returns an empty list iff the plan is valid.
pub fn verify(instance: &Instance, p: &PowerVector, assignment: &Assignment) -> Vec<Violation> {
    let dims = instance.dims();
    if assignment.services.len() != dims.receivers {
        return vec![Violation::ReceiverCount {
            expected: dims.receivers,
            actual: assignment.services.len(),
        }];
    }
    let claims: Vec<(usize, Service)> = assignment.served().collect();
    let mut violations = verify_claims(instance, p, &claims);
    if violations.is_empty() && assignment.load.len() == dims.loci() {
        let actual = claimed_loads(instance, &claims);
        for b in 0..dims.transmitters {
            for f in 0..dims.frequencies {
                let i = b * dims.frequencies + f;
                if assignment.load[i] != actual[i] {
                    violations.push(Violation::LoadMismatch {
                        transmitter: b,
                        frequency: f,
                        recorded: assignment.load[i],
                        actual: actual[i],
                    });
                }
            }
        }
    }
    violations
}

fn claimed_loads(instance: &Instance, claims: &[(usize, Service)]) -> Vec<f64> {
    let nf = instance.num_frequencies();
    let mut sorted: Vec<&(usize, Service)> = claims.iter().collect();
    sorted.sort_by_key(|(t, _)| *t);
    let mut load = vec![0.0; instance.dims().loci()];
    for (t, s) in sorted {
        load[s.transmitter * nf + s.frequency] += instance.receiver(*t).demand
            / instance.burst_profile(s.burst_profile).spectral_efficiency;
    }
    load
}

/// Checks a raw list of `(receiver, service)` claims, which may name a
/// receiver more than once (as a hand-edited plan file can).
pub fn verify_claims(
    instance: &Instance,
    p: &PowerVector,
    claims: &[(usize, Service)],
) -> Vec<Violation> {
    let dims = instance.dims();
    let mut violations = Vec::new();

    if p.len() != dims.loci() || p.num_frequencies() != dims.frequencies {
        violations.push(Violation::GenomeLength {
            expected: dims.loci(),
            actual: p.len(),
        });
        return violations;
    }
    let levels = instance.power_levels();
    for (locus, &level) in p.levels().iter().enumerate() {
        if level as usize >= levels.len() {
            violations.push(Violation::LevelOutOfRange { locus, level });
        }
    }
    if !violations.is_empty() {
        return violations;
    }

    let mut in_range = Vec::with_capacity(claims.len());
    for &(t, s) in claims {
        if t >= dims.receivers
            || s.transmitter >= dims.transmitters
            || s.frequency >= dims.frequencies
            || s.burst_profile >= dims.burst_profiles
        {
            violations.push(Violation::IndexOutOfRange {
                receiver: t,
                service: s,
            });
        } else {
            in_range.push((t, s));
        }
    }

    let mut times_served = vec![0usize; dims.receivers];
    for &(t, _) in &in_range {
        times_served[t] += 1;
    }
    for (t, &count) in times_served.iter().enumerate() {
        if count > 1 {
            violations.push(Violation::MultipleServers { receiver: t, count });
        }
    }

    for &(t, s) in &in_range {
        let delta = instance.burst_profile(s.burst_profile).sir_threshold;
        let gains = instance.fading_row(t);
        let power_on = |b: usize| levels[p.level(b, s.frequency) as usize];
        let useful = gains[s.transmitter] * power_on(s.transmitter);
        let mut other = 0.0;
        for b in (0..dims.transmitters).filter(|&b| b != s.transmitter) {
            other += gains[b] * power_on(b);
        }
        let margin = useful - delta * other - delta * instance.noise();
        if !(margin >= 0.0) {
            violations.push(Violation::Sir {
                receiver: t,
                service: s,
                margin,
            });
        }
    }

    let load = claimed_loads(instance, &in_range);
    for b in 0..dims.transmitters {
        for f in 0..dims.frequencies {
            let l = load[b * dims.frequencies + f];
            if l > instance.bandwidth() {
                violations.push(Violation::Capacity {
                    transmitter: b,
                    frequency: f,
                    load: l,
                    bandwidth: instance.bandwidth(),
                });
            }
        }
    }
    violations
}
