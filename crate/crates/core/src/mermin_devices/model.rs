use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::{passes_test, DeviceError, MerminInput, MerminOutput, Transcript, TranscriptEntry};

/// One of the four single-bit functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitFunction {
    Zero,
    One,
    Identity,
    Negation,
}

impl BitFunction {
    pub fn from_code(code: u8) -> BitFunction {
        match code & 3 {
            0 => BitFunction::Zero,
            1 => BitFunction::One,
            2 => BitFunction::Identity,
            _ => BitFunction::Negation,
        }
    }

    pub fn apply(self, bit: bool) -> bool {
        match self {
            BitFunction::Zero => false,
            BitFunction::One => true,
            BitFunction::Identity => bit,
            BitFunction::Negation => !bit,
        }
    }

    pub fn is_constant(self) -> bool {
        matches!(self, BitFunction::Zero | BitFunction::One)
    }
}

/// Deterministic local strategy `index = 16a + 4b + c`, where each digit picks
/// (const0, const1, id, not) for party A, B, C in turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LhvStrategy(u8);

impl LhvStrategy {
    pub const COUNT: u8 = 64;

    pub fn new(index: u8) -> Result<Self, DeviceError> {
        if index >= Self::COUNT {
            return Err(DeviceError::InvalidInput(format!(
                "LHV strategy index {index} outside 0..64"
            )));
        }
        Ok(LhvStrategy(index))
    }

    pub fn all() -> impl Iterator<Item = LhvStrategy> {
        (0..Self::COUNT).map(LhvStrategy)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn parties(self) -> [BitFunction; 3] {
        [
            BitFunction::from_code(self.0 >> 4),
            BitFunction::from_code(self.0 >> 2),
            BitFunction::from_code(self.0),
        ]
    }

    pub fn respond(self, input: MerminInput) -> MerminOutput {
        let [fa, fb, fc] = self.parties();
        MerminOutput::new(
            fa.apply(input.x()),
            fb.apply(input.y()),
            fc.apply(input.z()),
        )
    }

    /// Bit `s` set when the strategy passes setting `s`.
    pub fn pass_mask(self) -> u8 {
        (0..4)
            .filter(|&s| {
                passes_test(
                    super::encode_setting(s),
                    self.respond(super::encode_setting(s)),
                )
            })
            .fold(0, |m, s| m | 1 << s)
    }
}

/// Response rule of an adversarial device: an arbitrary deterministic
/// function of its own setting and the transcript of its predecessors.
pub trait AdversaryRule: Send + Sync {
    fn name(&self) -> &str;
    fn respond(&self, input: MerminInput, history: &Transcript) -> MerminOutput;
}

#[derive(Clone)]
pub enum DeviceModel {
    HonestGhz,
    DeterministicLhv(LhvStrategy),
    /// Honest, except that with probability `mu` the bit C is flipped.
    NoisyHonest {
        mu: f64,
    },
    MemoryAdversary(Arc<dyn AdversaryRule>),
}

impl fmt::Debug for DeviceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl PartialEq for DeviceModel {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

/// Round-trips through [`DeviceModel::parse`] for the built-in adversaries.
impl fmt::Display for DeviceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviceModel::HonestGhz => write!(f, "ghz"),
            DeviceModel::DeterministicLhv(s) => write!(f, "lhv:{}", s.index()),
            DeviceModel::NoisyHonest { mu } => write!(f, "noisy:{mu}"),
            DeviceModel::MemoryAdversary(rule) => write!(f, "adversary:{}", rule.name()),
        }
    }
}

impl DeviceModel {
    pub fn lhv(index: u8) -> Result<Self, DeviceError> {
        Ok(DeviceModel::DeterministicLhv(LhvStrategy::new(index)?))
    }

    pub fn noisy(mu: f64) -> Result<Self, DeviceError> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(DeviceError::InvalidInput(format!(
                "failure probability {mu} outside [0, 1]"
            )));
        }
        Ok(DeviceModel::NoisyHonest { mu })
    }

    /// `ghz`, `lhv:<index>`, `noisy:<mu>` or `adversary:<name>` with a
    /// built-in adversary name.
    pub fn parse(text: &str) -> Result<Self, DeviceError> {
        let text = text.trim();
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (text, None),
        };
        match (kind, arg) {
            ("ghz", None) => Ok(DeviceModel::HonestGhz),
            ("lhv", Some(a)) => {
                let idx = a
                    .parse::<u8>()
                    .map_err(|_| DeviceError::InvalidInput(format!("bad LHV index {a:?}")))?;
                Self::lhv(idx)
            }
            ("noisy", Some(a)) => {
                let mu = a.parse::<f64>().map_err(|_| {
                    DeviceError::InvalidInput(format!("bad failure probability {a:?}"))
                })?;
                Self::noisy(mu)
            }
            ("adversary", Some(name)) => builtin_adversary(name).map(DeviceModel::MemoryAdversary),
            _ => Err(DeviceError::InvalidInput(format!(
                "unknown device {text:?}; expected ghz, lhv:<0..63>, noisy:<mu> or adversary:<name>"
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        if let DeviceModel::NoisyHonest { mu } = self {
            if !(0.0..=1.0).contains(mu) {
                return Err(DeviceError::InvalidInput(format!(
                    "failure probability {mu} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Output of `model` on `input`, given the transcript of every earlier device.
///
/// Randomness is drawn only for honest and noisy devices: two bits for A and
/// B, then one Bernoulli draw for the noise.
pub fn respond<R: Rng + ?Sized>(
    model: &DeviceModel,
    input: MerminInput,
    history: &Transcript,
    rng: &mut R,
) -> MerminOutput {
    match model {
        DeviceModel::HonestGhz => honest(input, rng),
        DeviceModel::DeterministicLhv(s) => s.respond(input),
        DeviceModel::NoisyHonest { mu } => {
            let mut out = honest(input, rng);
            if rng.random_bool(*mu) {
                out.c = !out.c;
            }
            out
        }
        DeviceModel::MemoryAdversary(rule) => rule.respond(input, history),
    }
}

fn honest<R: Rng + ?Sized>(input: MerminInput, rng: &mut R) -> MerminOutput {
    let a: bool = rng.random();
    let b: bool = rng.random();
    MerminOutput::new(a, b, a ^ b ^ input.product())
}

/// A single-use device. `use_once` consumes it, so no instance can answer
/// twice.
#[derive(Debug)]
pub struct Device {
    id: u64,
    model: DeviceModel,
}

impl Device {
    pub fn new(id: u64, model: DeviceModel) -> Result<Self, DeviceError> {
        model.validate()?;
        Ok(Device { id, model })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Answers `input` and appends the exchange to `history`, which must
    /// hold only earlier devices.
    pub fn use_once<R: Rng + ?Sized>(
        self,
        input: MerminInput,
        history: &mut Transcript,
        rng: &mut R,
    ) -> Result<TranscriptEntry, DeviceError> {
        if let Some(last) = history.last_id() {
            if last >= self.id {
                return Err(DeviceError::Contract(format!(
                    "device {} queried after device {last} already answered",
                    self.id
                )));
            }
        }
        let output = respond(&self.model, input, history, rng);
        let entry = TranscriptEntry {
            device_id: self.id,
            input,
            output,
        };
        history.push(entry)?;
        Ok(entry)
    }
}

/// Passes three of the four settings (A constant, B = 0, C chosen to match)
/// and sets A to the parity of every earlier A, so the XOR of all A bits of
/// an unaborted run is always 0.
#[derive(Debug, Clone, Copy)]
pub struct ParitySteer;

impl AdversaryRule for ParitySteer {
    fn name(&self) -> &str {
        "parity-steer"
    }
    fn respond(&self, input: MerminInput, history: &Transcript) -> MerminOutput {
        let a = history
            .entries()
            .iter()
            .fold(false, |acc, e| acc ^ e.output.a);
        // A = a, B = 0, C = Z ^ a passes 111, 100, 010 and fails 001
        MerminOutput::new(a, false, input.z() ^ a)
    }
}

/// Cycles through the 64 deterministic strategies by transcript length.
#[derive(Debug, Clone, Copy)]
pub struct RotatingLhv;

impl AdversaryRule for RotatingLhv {
    fn name(&self) -> &str {
        "rotating-lhv"
    }
    fn respond(&self, input: MerminInput, history: &Transcript) -> MerminOutput {
        LhvStrategy((history.len() % 64) as u8).respond(input)
    }
}

pub const BUILTIN_ADVERSARIES: [&str; 2] = ["parity-steer", "rotating-lhv"];

pub fn builtin_adversary(name: &str) -> Result<Arc<dyn AdversaryRule>, DeviceError> {
    match name {
        "parity-steer" => Ok(Arc::new(ParitySteer)),
        "rotating-lhv" => Ok(Arc::new(RotatingLhv)),
        _ => Err(DeviceError::InvalidInput(format!(
            "unknown adversary {name:?}; built-in: {}",
            BUILTIN_ADVERSARIES.join(", ")
        ))),
    }
}
