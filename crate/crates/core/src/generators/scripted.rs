use std::str::FromStr;

use super::{GeneratorError, WordSource};

/// Replays a fixed word list, then fails with [`GeneratorError::Exhausted`].
///
/// File format: a header line `width=<w>` followed by one unsigned decimal
/// word per line. Blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scripted {
    width: u32,
    words: Vec<u64>,
    position: usize,
}

impl Scripted {
    pub fn new(width: u32, words: Vec<u64>) -> Result<Self, GeneratorError> {
        if width == 0 || width > 64 {
            return Err(GeneratorError::InvalidParams(format!(
                "word width must lie in 1..=64, got {width}"
            )));
        }
        if let Some(bad) = words.iter().find(|&&w| width < 64 && w >> width != 0) {
            return Err(GeneratorError::InvalidParams(format!(
                "word {bad} does not fit in {width} bits"
            )));
        }
        Ok(Scripted {
            width,
            words,
            position: 0,
        })
    }

    /// One word per bit, so bit patterns can be scripted directly.
    pub fn from_bits(bits: &[u8]) -> Result<Self, GeneratorError> {
        Self::new(1, bits.iter().map(|&b| b as u64).collect())
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn remaining(&self) -> usize {
        self.words.len() - self.position
    }

    pub fn to_file_string(&self) -> String {
        let mut out = format!("width={}\n", self.width);
        for w in &self.words {
            out.push_str(&w.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromStr for Scripted {
    type Err = GeneratorError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut width = None;
        let mut words = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |reason: String| GeneratorError::Parse {
                line: idx + 1,
                reason,
            };
            match width {
                None => {
                    let value = line
                        .strip_prefix("width=")
                        .ok_or_else(|| parse_err("expected header `width=<w>`".into()))?;
                    width = Some(
                        value
                            .trim()
                            .parse::<u32>()
                            .map_err(|e| parse_err(format!("bad width: {e}")))?,
                    );
                }
                Some(_) => words.push(
                    line.parse::<u64>()
                        .map_err(|e| parse_err(format!("bad word {line:?}: {e}")))?,
                ),
            }
        }
        let width = width.ok_or(GeneratorError::Parse {
            line: 1,
            reason: "missing header `width=<w>`".into(),
        })?;
        Scripted::new(width, words)
    }
}

impl WordSource for Scripted {
    fn width(&self) -> u32 {
        self.width
    }

    fn next_word(&mut self) -> Result<u64, GeneratorError> {
        let word = *self
            .words
            .get(self.position)
            .ok_or(GeneratorError::Exhausted {
                emitted: self.position as u64,
            })?;
        self.position += 1;
        Ok(word)
    }

    fn words_emitted(&self) -> u64 {
        self.position as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emits_script_then_errors() {
        let mut s = Scripted::new(4, vec![3, 15, 0]).unwrap();
        assert_eq!(s.next_word(), Ok(3));
        assert_eq!(s.next_word(), Ok(15));
        assert_eq!(s.next_word(), Ok(0));
        assert_eq!(s.next_word(), Err(GeneratorError::Exhausted { emitted: 3 }));
        assert_eq!(s.next_word(), Err(GeneratorError::Exhausted { emitted: 3 }));
    }

    #[test]
    fn parses_file_format() {
        let s: Scripted = "# test script\nwidth=3\n7\n\n0\n5\n".parse().unwrap();
        assert_eq!(s.width(), 3);
        assert_eq!(s.words(), &[7, 0, 5]);
        let again: Scripted = s.to_file_string().parse().unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(matches!(
            "7\n".parse::<Scripted>(),
            Err(GeneratorError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            "width=3\nx\n".parse::<Scripted>(),
            Err(GeneratorError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            "width=3\n8\n".parse::<Scripted>(),
            Err(GeneratorError::InvalidParams(_))
        ));
        assert!("".parse::<Scripted>().is_err());
    }
}
