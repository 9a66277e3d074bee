use std::fmt;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::syntax::{ident, ClauseKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PickValue {
    Int(i64),
    Bool(bool),
}

impl PickValue {
    pub fn kind(&self) -> PickKind {
        match self {
            PickValue::Int(_) => PickKind::Int,
            PickValue::Bool(_) => PickKind::Bool,
        }
    }
}

impl fmt::Display for PickValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PickValue::Int(n) => write!(f, "{n}"),
            PickValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PickKind {
    Int,
    Bool,
}

/// What to do when a pick is not in the feed.
#[derive(Clone, Debug)]
pub enum Fallback {
    /// Draw from a seeded generator. Integers come from `range` when given,
    /// otherwise half the time from [-16, 16] and half from [-10^6, 10^6].
    Random { rng: ChaCha8Rng, range: Option<(i64, i64)> },
    /// 0 and false.
    Zero,
    /// Replay: a miss means the run diverged from the recording.
    FailOnMiss,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("feed has no value for {kind:?} pick at {key}")]
pub struct FeedMiss {
    pub key: ClauseKey,
    pub kind: PickKind,
}

/// Concrete values for pick sites, in insertion order.
#[derive(Clone, Debug)]
pub struct Feed {
    values: IndexMap<ClauseKey, PickValue>,
    fallback: Fallback,
}

impl Default for Feed {
    fn default() -> Self {
        Feed::zero()
    }
}

impl Feed {
    pub fn new(fallback: Fallback) -> Self {
        Feed {
            values: IndexMap::new(),
            fallback,
        }
    }

    pub fn random(seed: u64) -> Self {
        Feed::new(Fallback::Random {
            rng: ChaCha8Rng::seed_from_u64(seed),
            range: None,
        })
    }

    pub fn random_in(seed: u64, lo: i64, hi: i64) -> Self {
        Feed::new(Fallback::Random {
            rng: ChaCha8Rng::seed_from_u64(seed),
            range: Some((lo, hi)),
        })
    }

    pub fn zero() -> Self {
        Feed::new(Fallback::Zero)
    }

    pub fn replay() -> Self {
        Feed::new(Fallback::FailOnMiss)
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn into_replay(self) -> Self {
        self.with_fallback(Fallback::FailOnMiss)
    }

    pub fn insert(&mut self, key: ClauseKey, v: PickValue) {
        self.values.insert(key, v);
    }

    pub fn get(&self, key: &ClauseKey) -> Option<PickValue> {
        self.values.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ClauseKey, &PickValue)> {
        self.values.iter()
    }

    pub fn truncate(&mut self, n: usize) {
        self.values.truncate(n);
    }

    /// The value for a pick, consulting the fallback on a miss or a kind
    /// mismatch.
    pub fn resolve(&mut self, key: &ClauseKey, kind: PickKind) -> Result<PickValue, FeedMiss> {
        if let Some(v) = self.values.get(key) {
            if v.kind() == kind {
                return Ok(*v);
            }
        }
        Ok(match &mut self.fallback {
            Fallback::FailOnMiss => return Err(FeedMiss { key: key.clone(), kind }),
            Fallback::Zero => match kind {
                PickKind::Int => PickValue::Int(0),
                PickKind::Bool => PickValue::Bool(false),
            },
            Fallback::Random { rng, range } => match kind {
                PickKind::Bool => PickValue::Bool(rng.random()),
                PickKind::Int => PickValue::Int(match range {
                    Some((lo, hi)) => rng.random_range(*lo..=*hi),
                    None if rng.random::<bool>() => rng.random_range(-16..=16),
                    None => rng.random_range(-1_000_000..=1_000_000),
                }),
            },
        })
    }

    /// One `clause_id depth kind value` line per entry.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            let kind = match v.kind() {
                PickKind::Int => "int",
                PickKind::Bool => "bool",
            };
            s.push_str(&format!("{} {} {kind} {v}\n", k.id, k.depth));
        }
        s
    }

    /// Parses [`Feed::to_text`] output. Blank lines and `#` comments are
    /// skipped. The result fails on misses.
    pub fn parse(text: &str) -> Result<Feed, FeedParseError> {
        let mut feed = Feed::replay();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| FeedParseError {
                line: i + 1,
                msg: msg.to_string(),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [id, depth, kind, value] = parts.as_slice() else {
                return Err(err("expected `clause_id depth kind value`"));
            };
            let depth: u32 = depth.parse().map_err(|_| err("bad depth"))?;
            let v = match *kind {
                "int" => PickValue::Int(value.parse().map_err(|_| err("bad integer"))?),
                "bool" => PickValue::Bool(value.parse().map_err(|_| err("bad boolean"))?),
                _ => return Err(err("kind must be int or bool")),
            };
            feed.insert(ClauseKey::new(&ident(id), depth), v);
        }
        Ok(feed)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("feed line {line}: {msg}")]
pub struct FeedParseError {
    pub line: usize,
    pub msg: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut f = Feed::replay();
        f.insert(ClauseKey::new(&ident("pick_i$3"), 0), PickValue::Int(-32768));
        f.insert(ClauseKey::new(&ident("pick_b$9"), 12), PickValue::Bool(true));
        let text = f.to_text();
        assert_eq!(text, "pick_i$3 0 int -32768\npick_b$9 12 bool true\n");
        let g = Feed::parse(&format!("# witness\n\n{text}")).unwrap();
        assert_eq!(g.to_text(), text);
        assert!(Feed::parse("x 1 float 2").is_err());
        assert!(Feed::parse("x one int 2").is_err());
    }

    #[test]
    fn fallbacks() {
        let k = ClauseKey::new(&ident("p"), 0);
        assert!(Feed::replay().resolve(&k, PickKind::Int).is_err());
        assert_eq!(Feed::zero().resolve(&k, PickKind::Bool), Ok(PickValue::Bool(false)));
        let draws = |seed| {
            let mut f = Feed::random(seed);
            (0..20)
                .map(|_| f.resolve(&k, PickKind::Int).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draws(7), draws(7));
        let mut f = Feed::random_in(1, -2, 2);
        for _ in 0..100 {
            let PickValue::Int(n) = f.resolve(&k, PickKind::Int).unwrap() else {
                panic!()
            };
            assert!((-2..=2).contains(&n));
        }
    }
}
