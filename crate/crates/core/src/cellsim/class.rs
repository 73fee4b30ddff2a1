use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Sorting taxonomy. Declaration order is the fixed reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GarmentClass {
    Shirt,
    Sock,
    Trousers,
    Underwear,
    Other,
    /// Label of a scene with nothing in it; never the class of a physical item.
    Empty,
}

impl GarmentClass {
    pub const ALL: [GarmentClass; 6] = [
        GarmentClass::Shirt,
        GarmentClass::Sock,
        GarmentClass::Trousers,
        GarmentClass::Underwear,
        GarmentClass::Other,
        GarmentClass::Empty,
    ];

    /// Classes a physical item can carry.
    pub const ITEM_CLASSES: [GarmentClass; 5] = [
        GarmentClass::Shirt,
        GarmentClass::Sock,
        GarmentClass::Trousers,
        GarmentClass::Underwear,
        GarmentClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GarmentClass::Shirt => "shirt",
            GarmentClass::Sock => "sock",
            GarmentClass::Trousers => "trousers",
            GarmentClass::Underwear => "underwear",
            GarmentClass::Other => "other",
            GarmentClass::Empty => "empty",
        }
    }

    /// Position in the fixed reporting order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_item_class(self) -> bool {
        self != GarmentClass::Empty
    }
}

impl fmt::Display for GarmentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown class label '{0}'")]
pub struct UnknownClass(pub String);

/// Exact canonical (lowercase) names only.
impl FromStr for GarmentClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GarmentClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_names_round_trip() {
        for c in GarmentClass::ALL {
            assert_eq!(c.as_str().parse::<GarmentClass>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.as_str()));
        }
        assert_eq!(GarmentClass::ALL.len(), 6);
        assert!("socks".parse::<GarmentClass>().is_err());
        assert!("Sock".parse::<GarmentClass>().is_err());
    }

    #[test]
    fn index_follows_reporting_order() {
        for (i, c) in GarmentClass::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
        }
        assert!(!GarmentClass::ITEM_CLASSES.contains(&GarmentClass::Empty));
    }
}
