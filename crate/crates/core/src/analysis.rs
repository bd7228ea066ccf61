//! Closed-form security quantities and the theory-versus-simulation harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::odd_prime_power;
use crate::protocol::{EveStrategy, Protocol, ProtocolConfig, Session};

/// Width of the acceptance band, in standard errors.
pub const SIGMA_GATE: f64 = 3.0;

/// Probability that a control round exposes Eve: `(d − 1)² / d²`.
pub fn detection_probability_closed(d: u64) -> Result<f64> {
    odd_prime_power(d)?;
    let d = d as f64;
    Ok((d - 1.0) * (d - 1.0) / (d * d))
}

/// Bits Eve learns from one attacked message round: `log₂ d`.
pub fn eve_information_closed(d: u64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("alphabet size must be at least 2, got {d}")));
    }
    Ok((d as f64).log2())
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("control probability must lie in (0, 1), got {c}")))
    }
}

fn check_pe(pe: f64) -> Result<()> {
    if (0.0..=1.0).contains(&pe) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("detection probability must lie in [0, 1], got {pe}")))
    }
}

/// Probability that Eve completes one message-round attack before a control
/// round catches her: `(1 − c) / (1 − c(1 − P_E))`.
pub fn single_attack_success(c: f64, pe: f64) -> Result<f64> {
    check_c(c)?;
    check_pe(pe)?;
    Ok((1.0 - c) / (1.0 - c * (1.0 - pe)))
}

/// Probability that Eve eavesdrops `info_bits` of information undetected,
/// gaining `info_per_attack` bits per attacked message round.
pub fn qdc_success_closed(c: f64, pe: f64, info_bits: f64, info_per_attack: f64) -> Result<f64> {
    if !(info_bits >= 0.0) || !info_bits.is_finite() {
        return Err(Error::InvalidParameter(format!("information must be non-negative, got {info_bits}")));
    }
    if !(info_per_attack > 0.0) || !info_per_attack.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "information per attack must be positive, got {info_per_attack}"
        )));
    }
    let base = single_attack_success(c, pe)?;
    if info_bits == 0.0 {
        return Ok(1.0);
    }
    Ok(base.powf(info_bits / info_per_attack))
}

/// Partial sums `(1 − c) Σ_{j<n} [c(1 − P_E)]^j` for `n = 1..=n_terms`.
pub fn geometric_partial_sums(c: f64, pe: f64, n_terms: usize) -> Result<Vec<f64>> {
    check_c(c)?;
    check_pe(pe)?;
    if n_terms == 0 {
        return Err(Error::InvalidParameter("need at least one term".into()));
    }
    let ratio = c * (1.0 - pe);
    let mut term = 1.0 - c;
    let mut acc = 0.0;
    Ok((0..n_terms)
        .map(|_| {
            acc += term;
            term *= ratio;
            acc
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub d: u64,
    pub detection_probability: f64,
}

/// Detection probability per odd prime power `d`, ascending in `d`.
pub fn fig2_table(d_list: &[u64]) -> Result<Vec<Fig2Row>> {
    let mut ds = d_list.to_vec();
    ds.sort_unstable();
    ds.dedup();
    ds.into_iter()
        .map(|d| Ok(Fig2Row { d, detection_probability: detection_probability_closed(d)? }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QdcCurvePoint {
    pub d: u64,
    pub c: f64,
    pub info_bits: f64,
    pub success_probability: f64,
}

/// Eavesdropping success probability on the grid `I = 0, step, 2·step, … ≤ max_bits`
/// for each `d`, rows grouped by ascending `d`.
pub fn fig3_table(c: f64, d_list: &[u64], max_bits: f64, step: f64) -> Result<Vec<QdcCurvePoint>> {
    check_c(c)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    if !(max_bits >= 0.0) || !max_bits.is_finite() {
        return Err(Error::InvalidParameter(format!("max bits must be non-negative, got {max_bits}")));
    }
    let n = (max_bits / step + 1e-9).floor() as usize;
    let mut out = Vec::new();
    for row in fig2_table(d_list)? {
        let ie = eve_information_closed(row.d)?;
        for j in 0..=n {
            let info_bits = j as f64 * step;
            out.push(QdcCurvePoint {
                d: row.d,
                c,
                info_bits,
                success_probability: qdc_success_closed(c, row.detection_probability, info_bits, ie)?,
            });
        }
    }
    Ok(out)
}

/// All odd prime powers in `[lo, hi]`.
pub fn odd_prime_powers(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..=hi).filter(|&d| odd_prime_power(d).is_ok()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub probability: f64,
    pub std_err: f64,
}

/// Event-level Monte Carlo of the attack-until-detected process: each round is
/// a control round with probability `c` (Eve caught with probability `P_E`) or
/// a message round (one more successful attack). A trial succeeds once
/// `attacks_needed` message rounds pass without detection.
pub fn qdc_success_monte_carlo(c: f64, pe: f64, attacks_needed: u64, trials: u64, seed: u64) -> Result<McEstimate> {
    check_c(c)?;
    check_pe(pe)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut successes = 0u64;
    for _ in 0..trials {
        let mut attacks = 0;
        let caught = loop {
            if attacks == attacks_needed {
                break false;
            }
            if rng.random::<f64>() < c {
                if rng.random::<f64>() < pe {
                    break true;
                }
            } else {
                attacks += 1;
            }
        };
        if !caught {
            successes += 1;
        }
    }
    let p = successes as f64 / trials as f64;
    Ok(McEstimate { trials, successes, probability: p, std_err: (p * (1.0 - p) / trials as f64).sqrt() })
}

/// One theory-versus-simulation comparison line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    /// Allowed `|observed − expected|`; zero means exact.
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, expected: f64, observed: f64, tolerance: f64) -> Self {
        let pass = (observed - expected).abs() <= tolerance;
        Check { name: name.into(), expected, observed, tolerance, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub d: u64,
    pub eve: EveStrategy,
    pub rounds: u64,
    pub control_rounds: u64,
    pub message_rounds: u64,
    pub closed_form_pe: f64,
    pub empirical_pe: f64,
    pub empirical_pe_std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub closed_form_ie_bits: f64,
    pub empirical_eve_accuracy: Option<f64>,
    pub empirical_eve_information_bits: Option<f64>,
    pub decode_accuracy: f64,
    pub checks: Vec<Check>,
    pub note: Option<String>,
    pub pass: bool,
}

/// Runs a session and gates its statistics against the closed forms at
/// [`SIGMA_GATE`] standard errors.
pub fn compare(cfg: &ProtocolConfig) -> Result<SecurityReport> {
    let protocol = Protocol::new(cfg.clone())?;
    let session = protocol.run_session()?;
    Ok(report_for(cfg, &session))
}

pub fn report_for(cfg: &ProtocolConfig, session: &Session) -> SecurityReport {
    let s = &session.stats;
    let d = s.d as u64;
    let df = d as f64;
    let pe_closed = match cfg.eve {
        EveStrategy::None => 0.0,
        _ => (df - 1.0) * (df - 1.0) / (df * df),
    };
    let band = SIGMA_GATE * s.detection_std_err;
    let mut checks = vec![];
    let mut note = None;
    match cfg.eve {
        EveStrategy::None => {
            note = Some("no adversary".to_string());
            checks.push(Check::new("detection rate", 0.0, s.detection_rate, 0.0));
            checks.push(Check::new("decode accuracy", 1.0, s.decode_accuracy, 0.0));
        }
        EveStrategy::ControlledShift => {
            checks.push(Check::new("detection rate", pe_closed, s.detection_rate, band));
            if let Some(k1) = s.basis(1) {
                checks.push(Check::new("detection rate | k = 1", 0.0, k1.rate, 0.0));
            }
            let (n, hits) = s
                .per_basis
                .iter()
                .filter(|b| b.k != 1)
                .fold((0, 0), |(n, h), b| (n + b.control_rounds, h + b.detections));
            if n > 0 {
                let r = hits as f64 / n as f64;
                let se = (r * (1.0 - r) / n as f64).sqrt();
                checks.push(Check::new("detection rate | k != 1", (df - 1.0) / df, r, SIGMA_GATE * se));
            }
            checks.push(Check::new("eve accuracy", 1.0, s.eve_correct_fraction.unwrap_or(0.0), 0.0));
            checks.push(Check::new("decode accuracy", 1.0, s.decode_accuracy, 0.0));
        }
        EveStrategy::InterceptResend => {
            checks.push(Check::new("detection rate", pe_closed, s.detection_rate, band));
            if cfg.independent_backward_basis {
                note = Some("independent backward basis: closed forms assume basis reuse".to_string());
            } else {
                checks.push(Check::new("eve accuracy", 1.0, s.eve_correct_fraction.unwrap_or(0.0), 0.0));
            }
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    SecurityReport {
        d,
        eve: cfg.eve,
        rounds: s.total_rounds,
        control_rounds: s.control_rounds,
        message_rounds: s.message_rounds,
        closed_form_pe: pe_closed,
        empirical_pe: s.detection_rate,
        empirical_pe_std_err: s.detection_std_err,
        ci_low: s.detection_rate - band,
        ci_high: s.detection_rate + band,
        closed_form_ie_bits: df.log2(),
        empirical_eve_accuracy: s.eve_correct_fraction,
        empirical_eve_information_bits: s.eve_information_bits,
        decode_accuracy: s.decode_accuracy,
        checks,
        note,
        pass,
    }
}
