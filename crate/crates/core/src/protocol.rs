//! Round-level simulation of the two-way protocol.
//!
//! One round:
//!
//! 1. Bob prepares `|v_t^k>` with `(k, t)` uniform over `{1..d} × GF(d)`.
//! 2. Eve interposes on the forward path (if present).
//! 3. Alice applies `W` with probability `c` (control mode), otherwise the
//!    shift `V₀ᵃ` for a uniform symbol `a` (message mode).
//! 4. Eve interposes on the backward path.
//! 5. Bob measures in basis `k`. A control round detects Eve when his outcome
//!    differs from `⊖t`; a message round decodes `a = t ⊖ outcome`.
//!
//! Alice only ever announces which rounds were control rounds.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::mub::{build_mub, MubTable};
use crate::qudit::{
    apply_on_subsystem, control_operator, controlled_shift, encoding_operator, measure_in_basis,
    measure_subsystem, Direction, PureState, Subsystem, UnitaryOp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EveStrategy {
    None,
    /// Measure the travelling qudit in a random basis on both paths.
    InterceptResend,
    /// Entangle an ancilla through controlled shifts on both paths.
    ControlledShift,
}

impl fmt::Display for EveStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EveStrategy::None => "none",
            EveStrategy::InterceptResend => "intercept-resend",
            EveStrategy::ControlledShift => "controlled-shift",
        })
    }
}

impl FromStr for EveStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(EveStrategy::None),
            "intercept-resend" | "intercept_resend" => Ok(EveStrategy::InterceptResend),
            "controlled-shift" | "controlled_shift" => Ok(EveStrategy::ControlledShift),
            other => Err(Error::InvalidParameter(format!("unknown eavesdropping strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Control,
    Message,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub p: u32,
    pub m: u32,
    /// Probability `c` that Alice runs a control round; strictly inside (0, 1).
    pub control_prob: f64,
    pub eve: EveStrategy,
    pub rounds: u64,
    pub seed: u64,
    /// Intercept-resend only: draw a fresh basis for the backward measurement
    /// instead of reusing the forward one.
    #[serde(default)]
    pub independent_backward_basis: bool,
}

impl ProtocolConfig {
    pub fn new(p: u32, m: u32, control_prob: f64, eve: EveStrategy, rounds: u64, seed: u64) -> Self {
        ProtocolConfig { p, m, control_prob, eve, rounds, seed, independent_backward_basis: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.control_prob > 0.0 && self.control_prob < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "control probability must lie strictly between 0 and 1, got {}",
                self.control_prob
            )));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidParameter("rounds must be positive".into()));
        }
        Ok(())
    }
}

/// Everything observable about one round, including what only a simulator
/// can see (Eve's guess and basis).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_index: u64,
    pub mode: Mode,
    pub k: usize,
    pub t: usize,
    /// Encoded symbol, message rounds only.
    pub a: Option<usize>,
    pub bob_outcome: usize,
    /// `t ⊖ bob_outcome`, message rounds only.
    pub decoded: Option<usize>,
    /// `bob_outcome ≠ ⊖t`, control rounds only.
    pub detected: Option<bool>,
    pub eve_guess: Option<usize>,
    pub eve_basis: Option<usize>,
}

/// What intercept-resend Eve remembers from the forward path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterceptMemory {
    pub basis: usize,
    pub outcome: usize,
}

/// Forward half of intercept-resend: measure in a uniformly random protocol
/// basis and resend the eigenstate found.
pub fn eve_intercept_resend_forward<R: Rng + ?Sized>(
    state: &PureState,
    table: &MubTable,
    rng: &mut R,
) -> Result<(PureState, InterceptMemory)> {
    let basis = rng.random_range(1..=table.dim());
    let (outcome, post) = measure_in_basis(state, table, basis, rng)?;
    Ok((post, InterceptMemory { basis, outcome }))
}

/// Backward half of intercept-resend. Returns the resent state and Eve's
/// symbol guess `t'_fwd ⊖ t'_bwd`.
pub fn eve_intercept_resend_backward<R: Rng + ?Sized>(
    state: &PureState,
    table: &MubTable,
    memory: InterceptMemory,
    basis: usize,
    rng: &mut R,
) -> Result<(PureState, usize)> {
    let (outcome, post) = measure_in_basis(state, table, basis, rng)?;
    Ok((post, table.spec().sub_idx(memory.outcome, outcome)))
}

/// The two attack gates of the controlled-shift strategy plus Eve's ancilla.
#[derive(Debug, Clone)]
pub struct ControlledShiftAttack {
    forward: UnitaryOp,
    backward: UnitaryOp,
    ancilla: PureState,
}

impl ControlledShiftAttack {
    /// Ancilla prepared in `|v¹₀>`.
    pub fn new(table: &MubTable) -> Self {
        let ancilla = PureState::basis(table, 1, 0).expect("dual basis exists");
        Self::with_ancilla(table, ancilla)
    }

    pub fn with_ancilla(table: &MubTable, ancilla: PureState) -> Self {
        ControlledShiftAttack {
            forward: controlled_shift(table, Direction::Forward),
            backward: controlled_shift(table, Direction::Backward),
            ancilla,
        }
    }

    /// Entangles the travelling qudit with the ancilla.
    pub fn forward(&self, state: &PureState) -> Result<PureState> {
        if self.ancilla.dim() != state.dim() {
            return Err(Error::DimensionMismatch { expected: self.ancilla.dim(), actual: state.dim() });
        }
        self.forward.apply(&PureState::product(state, &self.ancilla))
    }

    /// Applies the backward gate, then measures the ancilla in the dual basis.
    /// Returns Bob's collapsed qudit and Eve's outcome.
    pub fn backward_and_measure<R: Rng + ?Sized>(
        &self,
        joint: &PureState,
        table: &MubTable,
        rng: &mut R,
    ) -> Result<(PureState, usize)> {
        let after = self.backward.apply(joint)?;
        let (guess, bob) = measure_subsystem(&after, table, 1, Subsystem::Second, rng)?;
        Ok((bob, guess))
    }

    pub fn backward_gate(&self) -> &UnitaryOp {
        &self.backward
    }

    pub fn forward_gate(&self) -> &UnitaryOp {
        &self.forward
    }
}

/// Shorthand for [`ControlledShiftAttack::forward`] with a fresh `|v¹₀>` ancilla.
pub fn eve_controlled_shift_forward(state: &PureState, table: &MubTable) -> Result<PureState> {
    ControlledShiftAttack::new(table).forward(state)
}

/// Shorthand for [`ControlledShiftAttack::backward_and_measure`].
pub fn eve_controlled_shift_backward_and_measure<R: Rng + ?Sized>(
    joint: &PureState,
    table: &MubTable,
    rng: &mut R,
) -> Result<(PureState, usize)> {
    ControlledShiftAttack::new(table).backward_and_measure(joint, table, rng)
}

/// The random stream for one round: independent of every other round and of
/// execution order.
pub fn round_rng(seed: u64, round_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round_index);
    rng
}

enum Carrier {
    Single(PureState),
    Joint(PureState),
}

/// A configured protocol instance with its bases and operators prebuilt.
#[derive(Debug, Clone)]
pub struct Protocol {
    cfg: ProtocolConfig,
    table: MubTable,
    control: UnitaryOp,
    encoders: Vec<UnitaryOp>,
    attack: Option<ControlledShiftAttack>,
}

impl Protocol {
    pub fn new(cfg: ProtocolConfig) -> Result<Self> {
        cfg.validate()?;
        let spec = FieldSpec::new(cfg.p, cfg.m)?;
        let table = build_mub(&spec)?;
        let encoders = spec
            .elements()
            .map(|a| encoding_operator(&table, a))
            .collect::<Result<Vec<_>>>()?;
        let attack = (cfg.eve == EveStrategy::ControlledShift).then(|| ControlledShiftAttack::new(&table));
        Ok(Protocol { control: control_operator(&table), encoders, attack, table, cfg })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.cfg
    }

    pub fn table(&self) -> &MubTable {
        &self.table
    }

    pub fn run_round<R: Rng + ?Sized>(&self, rng: &mut R, round_index: u64) -> Result<RoundRecord> {
        let d = self.table.dim();
        let spec = self.table.spec();
        let k = rng.random_range(1..=d);
        let t = rng.random_range(0..d);
        let prepared = PureState::basis(&self.table, k, t)?;

        let mut memory = None;
        let carrier = match self.cfg.eve {
            EveStrategy::None => Carrier::Single(prepared),
            EveStrategy::InterceptResend => {
                let (resent, mem) = eve_intercept_resend_forward(&prepared, &self.table, rng)?;
                memory = Some(mem);
                Carrier::Single(resent)
            }
            EveStrategy::ControlledShift => {
                Carrier::Joint(self.attack.as_ref().expect("attack built").forward(&prepared)?)
            }
        };

        let mode = if rng.random::<f64>() < self.cfg.control_prob {
            Mode::Control
        } else {
            Mode::Message
        };
        let (op, a) = match mode {
            Mode::Control => (&self.control, None),
            Mode::Message => {
                let a = rng.random_range(0..d);
                (&self.encoders[a], Some(a))
            }
        };
        let carrier = match carrier {
            Carrier::Single(s) => Carrier::Single(op.apply(&s)?),
            Carrier::Joint(j) => Carrier::Joint(apply_on_subsystem(op, &j, Subsystem::First)?),
        };

        let (returned, eve_guess, eve_basis) = match (carrier, memory) {
            (Carrier::Single(s), Some(mem)) => {
                let basis = if self.cfg.independent_backward_basis {
                    rng.random_range(1..=d)
                } else {
                    mem.basis
                };
                let (resent, guess) = eve_intercept_resend_backward(&s, &self.table, mem, basis, rng)?;
                (resent, Some(guess), Some(mem.basis))
            }
            (Carrier::Single(s), None) => (s, None, None),
            (Carrier::Joint(j), _) => {
                let attack = self.attack.as_ref().expect("attack built");
                let (bob, guess) = attack.backward_and_measure(&j, &self.table, rng)?;
                (bob, Some(guess), Some(1))
            }
        };

        let (bob_outcome, _) = measure_in_basis(&returned, &self.table, k, rng)?;
        let (decoded, detected) = match mode {
            Mode::Message => (Some(spec.sub_idx(t, bob_outcome)), None),
            Mode::Control => (None, Some(bob_outcome != spec.neg_idx(t))),
        };
        Ok(RoundRecord { round_index, mode, k, t, a, bob_outcome, decoded, detected, eve_guess, eve_basis })
    }

    /// Runs every round in parallel; the result is identical to sequential
    /// execution.
    pub fn run_session(&self) -> Result<Session> {
        let seed = self.cfg.seed;
        let records = (0..self.cfg.rounds)
            .into_par_iter()
            .map(|i| self.run_round(&mut round_rng(seed, i), i))
            .collect::<Result<Vec<_>>>()?;
        let stats = SessionStats::from_records(&records, self.table.dim());
        Ok(Session { stats, records })
    }

    /// Sequential reference execution of the same session.
    pub fn run_session_sequential(&self) -> Result<Session> {
        let seed = self.cfg.seed;
        let records = (0..self.cfg.rounds)
            .map(|i| self.run_round(&mut round_rng(seed, i), i))
            .collect::<Result<Vec<_>>>()?;
        let stats = SessionStats::from_records(&records, self.table.dim());
        Ok(Session { stats, records })
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    pub stats: SessionStats,
    pub records: Vec<RoundRecord>,
}

pub fn run_session(cfg: &ProtocolConfig) -> Result<Session> {
    Protocol::new(cfg.clone())?.run_session()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDetection {
    pub k: usize,
    pub control_rounds: u64,
    pub detections: u64,
    pub rate: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    pub d: usize,
    pub total_rounds: u64,
    pub control_rounds: u64,
    pub message_rounds: u64,
    pub detections: u64,
    /// Empirical detection probability per control round.
    pub detection_rate: f64,
    pub detection_std_err: f64,
    /// Fraction of message rounds Bob decoded correctly.
    pub decode_accuracy: f64,
    pub decode_errors: u64,
    /// Fraction of message rounds where Eve's guess equals the encoded symbol.
    pub eve_correct_fraction: Option<f64>,
    /// Plug-in estimate of the mutual information between the encoded symbol
    /// and Eve's guess, in bits.
    pub eve_information_bits: Option<f64>,
    pub per_basis: Vec<BasisDetection>,
}

fn rate_and_err(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let r = hits as f64 / n as f64;
    (r, (r * (1.0 - r) / n as f64).sqrt())
}

impl SessionStats {
    pub fn from_records(records: &[RoundRecord], d: usize) -> Self {
        let mut control = 0u64;
        let mut detections = 0u64;
        let mut message = 0u64;
        let mut decode_ok = 0u64;
        let mut eve_seen = 0u64;
        let mut eve_ok = 0u64;
        let mut per_k = vec![(0u64, 0u64); d + 1];
        let mut joint = vec![0u64; d * d];
        for r in records {
            match r.mode {
                Mode::Control => {
                    control += 1;
                    per_k[r.k].0 += 1;
                    if r.detected == Some(true) {
                        detections += 1;
                        per_k[r.k].1 += 1;
                    }
                }
                Mode::Message => {
                    message += 1;
                    if r.decoded == r.a {
                        decode_ok += 1;
                    }
                    if let (Some(a), Some(g)) = (r.a, r.eve_guess) {
                        eve_seen += 1;
                        if a == g {
                            eve_ok += 1;
                        }
                        joint[a * d + g] += 1;
                    }
                }
            }
        }
        let (detection_rate, detection_std_err) = rate_and_err(detections, control);
        let per_basis = (1..=d)
            .map(|k| {
                let (n, hits) = per_k[k];
                let (rate, std_err) = rate_and_err(hits, n);
                BasisDetection { k, control_rounds: n, detections: hits, rate, std_err }
            })
            .collect();
        let (eve_correct_fraction, eve_information_bits) = if eve_seen > 0 {
            (Some(eve_ok as f64 / eve_seen as f64), Some(plug_in_mutual_information(&joint, d)))
        } else {
            (None, None)
        };
        SessionStats {
            d,
            total_rounds: records.len() as u64,
            control_rounds: control,
            message_rounds: message,
            detections,
            detection_rate,
            detection_std_err,
            decode_accuracy: if message > 0 { decode_ok as f64 / message as f64 } else { 1.0 },
            decode_errors: message - decode_ok,
            eve_correct_fraction,
            eve_information_bits,
            per_basis,
        }
    }

    pub fn basis(&self, k: usize) -> Option<&BasisDetection> {
        self.per_basis.iter().find(|b| b.k == k)
    }
}

fn plug_in_mutual_information(joint: &[u64], d: usize) -> f64 {
    let n: u64 = joint.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let rows: Vec<f64> = (0..d).map(|x| joint[x * d..(x + 1) * d].iter().sum::<u64>() as f64).collect();
    let cols: Vec<f64> = (0..d).map(|y| (0..d).map(|x| joint[x * d + y]).sum::<u64>() as f64).collect();
    let mut mi = 0.0;
    for x in 0..d {
        for y in 0..d {
            let c = joint[x * d + y] as f64;
            if c > 0.0 {
                mi += c / n * (c * n / (rows[x] * cols[y])).log2();
            }
        }
    }
    mi
}
