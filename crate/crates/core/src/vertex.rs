//! Symbolic vertex identifiers.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::ParseError;

pub type Params = SmallVec<[i64; 3]>;

/// A vertex name with integer parameters, e.g. `t[3]` or `g[2,5]`.
///
/// Ordering is by name first, then lexicographically by parameters, which
/// is the order every tie-break in the crate refers to.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    name: Arc<str>,
    params: Params,
}

impl VertexId {
    pub fn new(name: &str, params: &[i64]) -> Self {
        debug_assert!(valid_name(name), "invalid vertex name {name:?}");
        VertexId {
            name: Arc::from(name),
            params: params.iter().copied().collect(),
        }
    }

    pub fn named(name: &str) -> Self {
        Self::new(name, &[])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[i64] {
        &self.params
    }

    pub fn param(&self, idx: usize) -> i64 {
        self.params[idx]
    }

    pub fn is(&self, name: &str) -> bool {
        &*self.name == name
    }

    pub fn with_params(&self, name: &str, extra: &[i64]) -> Self {
        let mut params = self.params.clone();
        params.extend_from_slice(extra);
        VertexId {
            name: Arc::from(name),
            params,
        }
    }
}

pub(crate) fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '@' | '.'))
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            f.write_str("[")?;
            for (i, p) in self.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for VertexId {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::new(0, format!("invalid vertex id `{s}`"));
        let s = s.trim();
        let (name, params) = match s.find('[') {
            None => (s, Params::new()),
            Some(open) => {
                let inner = s[open + 1..].strip_suffix(']').ok_or_else(bad)?;
                let params = if inner.trim().is_empty() {
                    Params::new()
                } else {
                    inner
                        .split(',')
                        .map(|p| p.trim().parse::<i64>().map_err(|_| bad()))
                        .collect::<Result<Params, _>>()?
                };
                (&s[..open], params)
            }
        };
        if !valid_name(name) {
            return Err(bad());
        }
        Ok(VertexId {
            name: Arc::from(name),
            params,
        })
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn from_code(code: &str) -> Option<Player> {
        match code {
            "1" => Some(Player::One),
            "2" => Some(Player::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}
