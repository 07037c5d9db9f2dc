use std::fmt;

/// Seed material: raw bytes with a lossless human-readable form.
///
/// The human form is the text itself when the bytes are printable UTF-8 not
/// starting with `0x`, and `0x` followed by lowercase hex otherwise.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Seed {
    bytes: Vec<u8>,
}

impl Seed {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Seed { bytes }
    }

    pub fn from_text(text: &str) -> Self {
        Seed {
            bytes: text.as_bytes().to_vec(),
        }
    }

    /// Inverse of [`Seed::to_human`].
    pub fn from_human(text: &str) -> Self {
        if let Some(hex_digits) = text.strip_prefix("0x") {
            if let Ok(bytes) = hex::decode(hex_digits) {
                return Seed { bytes };
            }
        }
        Seed::from_text(text)
    }

    /// Parses a seed file: the single non-comment line, trimmed. Lines
    /// starting with `#` and blank lines are ignored.
    pub fn from_file_contents(contents: &str) -> Option<Self> {
        let mut lines = contents
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let line = lines.next()?;
        if lines.next().is_some() {
            return None;
        }
        Some(Seed::from_human(line))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn to_human(&self) -> String {
        match std::str::from_utf8(&self.bytes) {
            Ok(text)
                if !text.starts_with("0x")
                    && !text.is_empty()
                    && text.chars().all(|c| !c.is_control())
                    && text.trim() == text =>
            {
                text.to_string()
            }
            _ => format!("0x{}", hex::encode(&self.bytes)),
        }
    }

    /// Numeric reading: decimal text, or `0x` bytes read big-endian (at most 8).
    pub fn as_u64(&self) -> Option<u64> {
        let human = self.to_human();
        if human.starts_with("0x") {
            if self.bytes.len() > 8 || self.bytes.is_empty() {
                return None;
            }
            return Some(self.bytes.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64));
        }
        human.parse().ok()
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({})", self.to_human())
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_human())
    }
}
