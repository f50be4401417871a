//! Discrete message channel: fixed-length symbol sequences, the emission
//! schedule, and the single-slot buffer between sender and receiver.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Communication interval n: a message is emitted every n-th time step.
    pub interval_n: usize,
    /// Symbols per message (k).
    pub length_k: usize,
    /// Vocabulary size |V|.
    pub vocab_size: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        // k = 8 and |V| = 8 match the printed message strings (a..h, eight
        // characters); both stay configurable.
        Self {
            interval_n: 1,
            length_k: 8,
            vocab_size: 8,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.interval_n == 0 || self.length_k == 0 || self.vocab_size == 0 {
            return Err(ChannelError::InvalidConfig);
        }
        Ok(())
    }

    /// |M| = |V|^k, saturating on overflow.
    pub fn message_space_size(&self) -> u128 {
        (self.vocab_size as u128).saturating_pow(self.length_k as u32)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("channel parameters must all be >= 1")]
    InvalidConfig,
    #[error("message has wrong length: expected {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("symbol id {0} out of range for vocabulary size {1}")]
    SymbolOutOfRange(usize, usize),
    #[error("cannot parse message text {0:?}")]
    ParseFailed(String),
}

/// A fixed-length sequence of symbol ids, each in `[0, vocab_size)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub symbols: Vec<usize>,
}

impl Message {
    pub fn new(symbols: Vec<usize>, config: &ChannelConfig) -> Result<Self, ChannelError> {
        if symbols.len() != config.length_k {
            return Err(ChannelError::WrongLength {
                expected: config.length_k,
                got: symbols.len(),
            });
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= config.vocab_size) {
            return Err(ChannelError::SymbolOutOfRange(bad, config.vocab_size));
        }
        Ok(Self { symbols })
    }

    /// The all-zero placeholder read before any emission.
    pub fn zeros(config: &ChannelConfig) -> Self {
        Self {
            symbols: vec![0; config.length_k],
        }
    }
}

/// True at every step where the sender emits: t = 0, n, 2n, ...
pub fn should_emit(t: usize, config: &ChannelConfig) -> bool {
    t % config.interval_n == 0
}

/// Number of emissions in an episode of length `len`: ceil(len / n).
pub fn emissions_in_episode(len: usize, config: &ChannelConfig) -> usize {
    len.div_ceil(config.interval_n)
}

/// Letter rendering used in logs and tables: id 0 -> 'a', 1 -> 'b', ...
/// Vocabularies beyond 26 symbols fall back to dash-separated decimal ids.
pub fn render_message(m: &Message) -> String {
    if m.symbols.iter().all(|&s| s < 26) {
        m.symbols
            .iter()
            .map(|&s| (b'a' + s as u8) as char)
            .collect()
    } else {
        m.symbols
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Inverse of [`render_message`].
pub fn parse_message(text: &str) -> Result<Message, ChannelError> {
    if text.is_empty() {
        return Err(ChannelError::ParseFailed(text.to_string()));
    }
    if text.chars().all(|c| c.is_ascii_lowercase()) {
        Ok(Message {
            symbols: text.chars().map(|c| (c as u8 - b'a') as usize).collect(),
        })
    } else {
        let symbols = text
            .split('-')
            .map(|part| part.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ChannelError::ParseFailed(text.to_string()))?;
        Ok(Message { symbols })
    }
}

/// Single-slot buffer; each emission overwrites the previous message.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MessageBuffer {
    latest: Option<Message>,
}

impl MessageBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, m: Message) {
        self.latest = Some(m);
    }

    /// Current content; `None` before the first emission (readers substitute
    /// the all-zeros placeholder).
    pub fn read(&self) -> Option<&Message> {
        self.latest.as_ref()
    }

    pub fn clear(&mut self) {
        self.latest = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> ChannelConfig {
        ChannelConfig {
            interval_n: n,
            ..ChannelConfig::default()
        }
    }

    #[test]
    fn first_step_always_emits() {
        for n in [1, 2, 4, 8, 64] {
            assert!(should_emit(0, &cfg(n)));
        }
    }

    #[test]
    fn n64_emits_once_per_episode() {
        let c = cfg(64);
        let emissions = (0..64).filter(|&t| should_emit(t, &c)).count();
        assert_eq!(emissions, 1);
        for t in 1..64 {
            assert!(!should_emit(t, &c));
        }
    }

    #[test]
    fn n1_always_emits() {
        let c = cfg(1);
        assert!((0..64).all(|t| should_emit(t, &c)));
    }

    #[test]
    fn emission_count_is_ceil() {
        for n in [1usize, 2, 4, 8, 64] {
            let c = cfg(n);
            for len in 1..=64usize {
                let by_schedule = (0..len).filter(|&t| should_emit(t, &c)).count();
                assert_eq!(by_schedule, emissions_in_episode(len, &c));
                assert_eq!(by_schedule, len.div_ceil(n));
            }
        }
    }

    #[test]
    fn paper_message_strings_render() {
        let c = ChannelConfig::default();
        let m = Message::new(vec![1; 8], &c).unwrap();
        assert_eq!(render_message(&m), "bbbbbbbb");
        let m = Message::new(vec![0; 8], &c).unwrap();
        assert_eq!(render_message(&m), "aaaaaaaa");
        let m = Message::new(vec![5, 5, 5, 5, 7, 7, 7, 0], &c).unwrap();
        assert_eq!(render_message(&m), "ffffhhha");
    }

    #[test]
    fn large_ids_fall_back_to_decimal() {
        let m = Message {
            symbols: vec![30, 0, 2],
        };
        let text = render_message(&m);
        assert_eq!(text, "30-0-2");
        assert_eq!(parse_message(&text).unwrap(), m);
    }

    #[test]
    fn render_parse_round_trip_exhaustive_small() {
        for vocab in 1..=8usize {
            for k in 1..=3usize {
                let c = ChannelConfig {
                    interval_n: 1,
                    length_k: k,
                    vocab_size: vocab,
                };
                let mut symbols = vec![0usize; k];
                loop {
                    let m = Message::new(symbols.clone(), &c).unwrap();
                    assert_eq!(parse_message(&render_message(&m)).unwrap(), m);
                    // odometer increment
                    let mut i = 0;
                    loop {
                        if i == k {
                            break;
                        }
                        symbols[i] += 1;
                        if symbols[i] < vocab {
                            break;
                        }
                        symbols[i] = 0;
                        i += 1;
                    }
                    if i == k {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn message_validation() {
        let c = ChannelConfig::default();
        assert!(matches!(
            Message::new(vec![0; 7], &c),
            Err(ChannelError::WrongLength { .. })
        ));
        assert!(matches!(
            Message::new(vec![0, 0, 0, 0, 0, 0, 0, 8], &c),
            Err(ChannelError::SymbolOutOfRange(8, 8))
        ));
    }

    #[test]
    fn buffer_overwrites() {
        let c = ChannelConfig::default();
        let mut buf = MessageBuffer::new();
        assert!(buf.read().is_none());
        buf.write(Message::new(vec![1; 8], &c).unwrap());
        buf.write(Message::new(vec![2; 8], &c).unwrap());
        assert_eq!(buf.read().unwrap().symbols, vec![2; 8]);
    }

    #[test]
    fn message_space_size() {
        let c = ChannelConfig::default();
        assert_eq!(c.message_space_size(), 8u128.pow(8));
    }
}
