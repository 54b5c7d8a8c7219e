use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Registered block sizes `n_t >= 1`. Unregistered indices form the infinite
/// tail and behave as the scalar part of each element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionTable {
    dims: BTreeMap<usize, usize>,
}

impl DimensionTable {
    /// `None` if some size is zero.
    pub fn new(dims: BTreeMap<usize, usize>) -> Option<Self> {
        dims.values().all(|&n| n >= 1).then_some(Self { dims })
    }

    pub fn from_sizes(sizes: &[usize]) -> Option<Self> {
        Self::new(sizes.iter().copied().enumerate().collect())
    }

    /// Indices `0..8` with sizes `[1, 2, 2, 3, 3, 4, 4, 5]`.
    pub fn default_profile() -> Self {
        Self::from_sizes(&[1, 2, 2, 3, 3, 4, 4, 5]).unwrap()
    }

    pub fn dim(&self, t: usize) -> Option<usize> {
        self.dims.get(&t).copied()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.dims.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dims.iter().map(|(&t, &n)| (t, n))
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
}

impl<'de> Deserialize<'de> for DimensionTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            dims: BTreeMap<usize, usize>,
        }
        let repr = Repr::deserialize(deserializer)?;
        DimensionTable::new(repr.dims).ok_or_else(|| serde::de::Error::custom("block sizes must be at least 1"))
    }
}

/// A dual ideal `J`, identified with the set of block indices it contains.
///
/// `All` covers every registered index; tail indices never belong to an
/// ideal, which keeps `J` proper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DualIdeal {
    All,
    Indices(BTreeSet<usize>),
}

impl DualIdeal {
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self::Indices(indices.into_iter().collect())
    }

    pub fn zero() -> Self {
        Self::Indices(BTreeSet::new())
    }

    pub fn contains(&self, t: usize) -> bool {
        match self {
            Self::All => true,
            Self::Indices(s) => s.contains(&t),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        match (self, other) {
            (Self::All, x) | (x, Self::All) => x.clone(),
            (Self::Indices(a), Self::Indices(b)) => Self::Indices(a.intersection(b).copied().collect()),
        }
    }

    /// Concrete index set relative to a dimension table.
    pub fn indices(&self, dims: &DimensionTable) -> BTreeSet<usize> {
        match self {
            Self::All => dims.indices().collect(),
            Self::Indices(s) => s.clone(),
        }
    }

    /// Every listed index must be registered.
    pub fn is_valid_for(&self, dims: &DimensionTable) -> bool {
        match self {
            Self::All => true,
            Self::Indices(s) => s.iter().all(|&t| dims.dim(t).is_some()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SupportRepr {
    Word(String),
    List(Vec<usize>),
}

#[derive(Serialize, Deserialize)]
struct IdealRepr {
    support: SupportRepr,
}

impl Serialize for DualIdeal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let support = match self {
            Self::All => SupportRepr::Word("all".into()),
            Self::Indices(s) => SupportRepr::List(s.iter().copied().collect()),
        };
        IdealRepr { support }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DualIdeal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match IdealRepr::deserialize(deserializer)?.support {
            SupportRepr::Word(w) if w == "all" => Ok(Self::All),
            SupportRepr::Word(w) => {
                Err(serde::de::Error::custom(format!("support must be a list or \"all\", got \"{w}\"")))
            }
            SupportRepr::List(v) => Ok(Self::Indices(v.into_iter().collect())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_json() {
        let all: DualIdeal = serde_json::from_str(r#"{"support":"all"}"#).unwrap();
        assert_eq!(all, DualIdeal::All);
        let some: DualIdeal = serde_json::from_str(r#"{"support":[3,1]}"#).unwrap();
        assert_eq!(some, DualIdeal::from_indices([1, 3]));
        assert_eq!(serde_json::to_string(&some).unwrap(), r#"{"support":[1,3]}"#);
        assert!(serde_json::from_str::<DualIdeal>(r#"{"support":"most"}"#).is_err());
    }

    #[test]
    fn dims_json() {
        let d: DimensionTable = serde_json::from_str(r#"{"dims":{"0":2,"5":1}}"#).unwrap();
        assert_eq!(d.dim(5), Some(1));
        assert_eq!(d.dim(1), None);
        assert!(serde_json::from_str::<DimensionTable>(r#"{"dims":{"0":0}}"#).is_err());
    }

    #[test]
    fn intersections() {
        let a = DualIdeal::from_indices([1, 2, 3]);
        let b = DualIdeal::from_indices([3, 4]);
        assert_eq!(a.intersection(&b), DualIdeal::from_indices([3]));
        assert_eq!(DualIdeal::All.intersection(&b), b);
    }
}
