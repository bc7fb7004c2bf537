//! Exhaustive search over every discrete power vector.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{evaluate, CoverageReport, Instance, PowerVector};

pub const DEFAULT_MAX_ENUMERATION: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration bound exceeded: {levels}^{loci} power vectors > {limit}")]
    TooLarge {
        levels: usize,
        loci: usize,
        limit: u64,
    },
}

#[derive(Debug, Clone)]
pub struct Optimum {
    pub genome: PowerVector,
    pub report: CoverageReport,
    /// Number of power vectors evaluated.
    pub enumerated: u64,
}

/// `|levels|^loci`, or `None` on overflow.
pub fn search_space_size(instance: &Instance) -> Option<u64> {
    let loci = u32::try_from(instance.dims().loci()).ok()?;
    (instance.num_power_levels() as u64).checked_pow(loci)
}

/// Decodes `code` as a mixed-radix number whose most significant digit is
/// the first locus, so ascending codes are lexicographic genome order.
fn decode(code: u64, radix: u64, digits: &mut [u32]) {
    let mut rest = code;
    for d in digits.iter_mut().rev() {
        *d = (rest % radix) as u32;
        rest /= radix;
    }
}

/// Maximizes covered receivers over all power vectors, breaking ties by the
/// lexicographically smallest level-index array.
pub fn brute_force_optimum(
    instance: &Instance,
    max_enumeration: u64,
) -> Result<Optimum, OracleError> {
    let levels = instance.num_power_levels();
    let loci = instance.dims().loci();
    let total = search_space_size(instance)
        .filter(|&n| n <= max_enumeration)
        .ok_or(OracleError::TooLarge {
            levels,
            loci,
            limit: max_enumeration,
        })?;

    let radix = levels as u64;
    let chunk = 4096u64;
    let chunks = total.div_ceil(chunk);
    // (covered, code, count); reduction keeps max coverage, then min code.
    let (covered, code, enumerated) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut genome = PowerVector::zeros(instance);
            let mut best = (0usize, u64::MAX, 0u64);
            for code in c * chunk..((c + 1) * chunk).min(total) {
                decode(code, radix, genome.levels_mut());
                let covered = evaluate(instance, &genome).covered_count;
                if best.1 == u64::MAX || covered > best.0 {
                    best = (covered, code, best.2);
                }
                best.2 += 1;
            }
            best
        })
        .reduce(
            || (0, u64::MAX, 0),
            |a, b| {
                let better = if a.1 == u64::MAX {
                    b
                } else if b.1 == u64::MAX {
                    a
                } else if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                };
                (better.0, better.1, a.2 + b.2)
            },
        );

    let mut genome = PowerVector::zeros(instance);
    decode(code, radix, genome.levels_mut());
    let report = evaluate(instance, &genome);
    debug_assert_eq!(report.covered_count, covered);
    Ok(Optimum {
        genome,
        report,
        enumerated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::single_channel;

    #[test]
    fn enumerates_whole_space() {
        let inst = single_channel(vec![vec![0.9, 0.4]], vec![0.0, 1.0, 2.0], 1.0, 0.1, 5.0);
        let opt = brute_force_optimum(&inst, DEFAULT_MAX_ENUMERATION).unwrap();
        assert_eq!(opt.enumerated, 9);
    }

    #[test]
    fn uncoverable_instance_returns_all_off() {
        let inst = single_channel(
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![0.0, 1.0, 2.0],
            1.0,
            0.1,
            5.0,
        );
        let opt = brute_force_optimum(&inst, 100).unwrap();
        assert_eq!(opt.report.covered_count, 0);
        assert_eq!(opt.genome.levels(), &[0, 0]);
    }

    #[test]
    fn finds_single_server_optimum() {
        // 0.9 * P >= 0.1 needs P > 0.111; 0.4 gain alone never helps
        let inst = single_channel(vec![vec![0.9, 0.0]], vec![0.0, 0.1, 2.0], 1.0, 0.1, 5.0);
        let opt = brute_force_optimum(&inst, 100).unwrap();
        assert_eq!(opt.report.covered_count, 1);
        assert_eq!(opt.genome.levels(), &[2, 0]);
        assert_eq!(opt.enumerated, 9);
    }

    #[test]
    fn refuses_oversized_space() {
        let inst = single_channel(
            vec![vec![0.5; 12]],
            (0..6).map(f64::from).collect(),
            1.0,
            0.1,
            5.0,
        );
        let err = brute_force_optimum(&inst, DEFAULT_MAX_ENUMERATION).unwrap_err();
        assert_eq!(
            err,
            OracleError::TooLarge {
                levels: 6,
                loci: 12,
                limit: 1_000_000
            }
        );
        assert_eq!(search_space_size(&inst), Some(2_176_782_336));
    }

    #[test]
    fn decode_is_lexicographic() {
        let mut d = [0u32; 3];
        decode(0, 3, &mut d);
        assert_eq!(d, [0, 0, 0]);
        decode(5, 3, &mut d);
        assert_eq!(d, [0, 1, 2]);
        decode(26, 3, &mut d);
        assert_eq!(d, [2, 2, 2]);
    }
}
