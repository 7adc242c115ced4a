use serde::{Deserialize, Serialize};

use super::DeviceError;

/// Settings `(X, Y, Z)` with `X ^ Y ^ Z = 1`: 111, 100, 010, 001.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u8; 3]", into = "[u8; 3]")]
pub struct MerminInput {
    x: bool,
    y: bool,
    z: bool,
}

impl MerminInput {
    pub fn new(x: bool, y: bool, z: bool) -> Result<Self, DeviceError> {
        if !(x ^ y ^ z) {
            return Err(DeviceError::Contract(format!(
                "inadmissible setting {}{}{}: X^Y^Z must be 1",
                x as u8, y as u8, z as u8
            )));
        }
        Ok(MerminInput { x, y, z })
    }

    pub fn x(self) -> bool {
        self.x
    }
    pub fn y(self) -> bool {
        self.y
    }
    pub fn z(self) -> bool {
        self.z
    }

    /// `X * Y * Z`, the parity the outputs must reproduce.
    pub fn product(self) -> bool {
        self.x && self.y && self.z
    }

    /// Inverse of [`encode_setting`].
    pub fn setting(self) -> u8 {
        match (self.x, self.y, self.z) {
            (true, true, true) => 0,
            (true, false, false) => 1,
            (false, true, false) => 2,
            _ => 3,
        }
    }
}

impl TryFrom<[u8; 3]> for MerminInput {
    type Error = DeviceError;
    fn try_from(b: [u8; 3]) -> Result<Self, DeviceError> {
        if b.iter().any(|&v| v > 1) {
            return Err(DeviceError::Contract(format!(
                "setting bits {b:?} are not bits"
            )));
        }
        MerminInput::new(b[0] == 1, b[1] == 1, b[2] == 1)
    }
}

impl From<MerminInput> for [u8; 3] {
    fn from(i: MerminInput) -> [u8; 3] {
        [i.x as u8, i.y as u8, i.z as u8]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u8; 3]", into = "[u8; 3]")]
pub struct MerminOutput {
    pub a: bool,
    pub b: bool,
    pub c: bool,
}

impl MerminOutput {
    pub fn new(a: bool, b: bool, c: bool) -> Self {
        MerminOutput { a, b, c }
    }
}

impl From<[u8; 3]> for MerminOutput {
    fn from(b: [u8; 3]) -> Self {
        MerminOutput {
            a: b[0] & 1 == 1,
            b: b[1] & 1 == 1,
            c: b[2] & 1 == 1,
        }
    }
}

impl From<MerminOutput> for [u8; 3] {
    fn from(o: MerminOutput) -> [u8; 3] {
        [o.a as u8, o.b as u8, o.c as u8]
    }
}

/// `0 -> 111, 1 -> 100, 2 -> 010, 3 -> 001`.
///
/// # Panics
/// If `s > 3`; hash outputs are always in range.
pub fn encode_setting(s: u8) -> MerminInput {
    let (x, y, z) = match s {
        0 => (true, true, true),
        1 => (true, false, false),
        2 => (false, true, false),
        3 => (false, false, true),
        _ => panic!("setting symbol {s} outside 0..=3"),
    };
    MerminInput { x, y, z }
}

/// `A ^ B ^ C == X * Y * Z`.
pub fn passes_test(input: MerminInput, output: MerminOutput) -> bool {
    (output.a ^ output.b ^ output.c) == input.product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub device_id: u64,
    pub input: MerminInput,
    pub output: MerminOutput,
}

/// Append-only record of every device used so far, in causal order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_id(&self) -> Option<u64> {
        self.entries.last().map(|e| e.device_id)
    }

    /// Device ids must strictly increase.
    pub fn push(&mut self, entry: TranscriptEntry) -> Result<(), DeviceError> {
        if let Some(last) = self.last_id() {
            if entry.device_id <= last {
                return Err(DeviceError::Contract(format!(
                    "device {} recorded after device {last}",
                    entry.device_id
                )));
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings() {
        assert_eq!(
            encode_setting(0),
            MerminInput::new(true, true, true).unwrap()
        );
        assert_eq!(
            encode_setting(1),
            MerminInput::new(true, false, false).unwrap()
        );
        assert_eq!(
            encode_setting(3),
            MerminInput::new(false, false, true).unwrap()
        );
        for s in 0..4 {
            assert_eq!(encode_setting(s).setting(), s);
        }
        assert!(MerminInput::new(true, true, false).is_err());
        assert!(MerminInput::new(false, false, false).is_err());
    }

    #[test]
    fn test_predicate() {
        let o = |a, b, c| MerminOutput::new(a, b, c);
        assert!(passes_test(encode_setting(0), o(true, false, false)));
        assert!(passes_test(encode_setting(1), o(false, false, false)));
        assert!(!passes_test(encode_setting(0), o(false, false, false)));
    }

    #[test]
    fn transcript_is_causal() {
        let mut t = Transcript::new();
        let e = |id| TranscriptEntry {
            device_id: id,
            input: encode_setting(0),
            output: MerminOutput::new(true, false, false),
        };
        t.push(e(0)).unwrap();
        t.push(e(3)).unwrap();
        assert!(t.push(e(3)).is_err());
        assert!(t.push(e(1)).is_err());
        let lines = t.to_json_lines();
        assert_eq!(lines.lines().count(), 2);
        let back: TranscriptEntry = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
        assert_eq!(back, e(0));
        assert!(serde_json::from_str::<MerminInput>("[1,1,0]").is_err());
    }
}
