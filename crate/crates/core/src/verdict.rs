//! Verdicts, cascade nodes and the trail of transformations between them.

use serde::{Deserialize, Serialize};

use crate::global::GlobalCertificate;
use crate::local::LocalVerdict;
use crate::oracle::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Solvable,
    Unsolvable,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StarKind {
    Star,
    Tildestar,
}

/// Level t of u = x + f sqrt(-B0) y at p (exact divisibility by p^t for
/// `Star`, the odd-x odd-fy type at 2 for `Tildestar`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StarCondition {
    #[serde(with = "crate::verdict::int_str")]
    pub p: i128,
    pub kind: StarKind,
    pub t: u32,
}

impl StarCondition {
    pub fn star0(p: i128) -> Self {
        StarCondition { p, kind: StarKind::Star, t: 0 }
    }

    pub fn tilde0() -> Self {
        StarCondition { p: 2, kind: StarKind::Tildestar, t: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    SquareStrip,
    ObsPNdivY,
    CascadeF,
    CascadeF2,
    CascadeY,
    CascadeY2,
    FcOdd,
    Fc2,
}

/// One transformation. A point (x', y', z') of the target gives the point
/// (x_mul x', y_mul y', z_mul z') of the source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrailStep {
    pub lemma: LemmaId,
    #[serde(with = "crate::verdict::int_str")]
    pub p: i128,
    pub t: u32,
    #[serde(with = "crate::verdict::pair_str")]
    pub source: (i128, i128),
    #[serde(with = "crate::verdict::int_str")]
    pub x_mul: i128,
    #[serde(with = "crate::verdict::int_str")]
    pub y_mul: i128,
    #[serde(with = "crate::verdict::int_str")]
    pub z_mul: i128,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CascadeNode {
    #[serde(with = "crate::verdict::int_str")]
    pub bp: i128,
    #[serde(with = "crate::verdict::int_str")]
    pub cp: i128,
    pub star_conditions: Vec<StarCondition>,
    #[serde(with = "crate::verdict::vec_str")]
    pub y_coprime: Vec<i128>,
    /// Product of the primes z must avoid.
    #[serde(with = "crate::verdict::int_str")]
    pub z_coprime: i128,
    pub trail: Vec<TrailStep>,
}

impl CascadeNode {
    pub fn root(b: i128, c: i128) -> Self {
        CascadeNode { bp: b, cp: c, star_conditions: Vec::new(), y_coprime: Vec::new(), z_coprime: 1, trail: Vec::new() }
    }

    pub fn has_tilde(&self) -> bool {
        self.star_conditions.iter().any(|s| s.kind == StarKind::Tildestar)
    }

    /// Maps a point of this node back to the root instance.
    pub fn replay(&self, (x, y, z): Point) -> Option<Point> {
        let (mut x, mut y, mut z) = (x, y, z);
        for s in self.trail.iter().rev() {
            x = x.checked_mul(s.x_mul)?;
            y = y.checked_mul(s.y_mul)?;
            z = z.checked_mul(s.z_mul)?;
        }
        Some((x, y, z))
    }
}

/// Per-leaf record for traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeReport {
    pub node: CascadeNode,
    pub status: Status,
    pub reason: String,
    #[serde(with = "crate::verdict::opt_point_str")]
    pub witness: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(with = "crate::verdict::opt_point_str")]
    pub witness: Option<Point>,
    pub certificate: Option<GlobalCertificate>,
    pub open_nodes: Vec<CascadeNode>,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub local_failure: Option<LocalVerdict>,
    /// Prime p | n putting the instance in the excluded set.
    #[serde(skip_serializing_if = "Option::is_none", default, with = "crate::verdict::opt_int_str")]
    pub excluded_prime: Option<i128>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub nodes: Vec<NodeReport>,
}

impl Verdict {
    pub fn new(status: Status, reason: impl Into<String>) -> Self {
        Verdict {
            status,
            witness: None,
            certificate: None,
            open_nodes: Vec::new(),
            reason: reason.into(),
            local_failure: None,
            excluded_prime: None,
            nodes: Vec::new(),
        }
    }

    pub fn solvable(reason: impl Into<String>) -> Self {
        Self::new(Status::Solvable, reason)
    }

    pub fn unsolvable(reason: impl Into<String>) -> Self {
        Self::new(Status::Unsolvable, reason)
    }

    pub fn with_witness(mut self, w: Point) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_certificate(mut self, c: GlobalCertificate) -> Self {
        self.certificate = Some(c);
        self
    }
}

// Integers go over JSON as decimal strings so that i128 survives.
pub(crate) mod int_str {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &i128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i128, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

pub(crate) mod opt_int_str {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<i128>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<i128>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| s.parse().map_err(D::Error::custom)).transpose()
    }
}

pub(crate) mod vec_str {
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[i128], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<i128>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|s| s.parse().map_err(D::Error::custom)).collect()
    }
}

pub(crate) mod pair_str {
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &(i128, i128), s: S) -> Result<S::Ok, S::Error> {
        [v.0.to_string(), v.1.to_string()].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(i128, i128), D::Error> {
        let [a, b] = <[String; 2]>::deserialize(d)?;
        Ok((a.parse().map_err(D::Error::custom)?, b.parse().map_err(D::Error::custom)?))
    }
}

pub(crate) mod opt_point_str {
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<(i128, i128, i128)>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|(x, y, z)| [x.to_string(), y.to_string(), z.to_string()]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<(i128, i128, i128)>, D::Error> {
        match Option::<[String; 3]>::deserialize(d)? {
            None => Ok(None),
            Some([x, y, z]) => Ok(Some((
                x.parse().map_err(D::Error::custom)?,
                y.parse().map_err(D::Error::custom)?,
                z.parse().map_err(D::Error::custom)?,
            ))),
        }
    }
}
