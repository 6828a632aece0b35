//! Coordinate axes and signed projection directions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// An unsigned coordinate axis. Used as the cut axis of a segmentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Self::ALL.get(i).copied()
    }

    /// The two remaining axes in increasing index order.
    #[inline]
    pub fn others(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::X, Axis::Z),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }

    /// The axis orthogonal to both `self` and `other`. `None` if they are equal.
    pub fn third(self, other: Axis) -> Option<Axis> {
        if self == other {
            return None;
        }
        Axis::from_index(3 - self.index() - other.index())
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        })
    }
}

/// One of the six axis-aligned directions (±X, ±Y, ±Z).
///
/// As a projection plane, the positive direction means the viewer sits on the
/// low side of the axis and depth grows with the coordinate; the negative
/// direction mirrors that.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedAxis {
    pub axis: Axis,
    pub positive: bool,
}

impl SignedAxis {
    pub const POS_X: SignedAxis = SignedAxis::new(Axis::X, true);
    pub const NEG_X: SignedAxis = SignedAxis::new(Axis::X, false);
    pub const POS_Y: SignedAxis = SignedAxis::new(Axis::Y, true);
    pub const NEG_Y: SignedAxis = SignedAxis::new(Axis::Y, false);
    pub const POS_Z: SignedAxis = SignedAxis::new(Axis::Z, true);
    pub const NEG_Z: SignedAxis = SignedAxis::new(Axis::Z, false);

    /// Canonical order: +X, -X, +Y, -Y, +Z, -Z.
    pub const ALL: [SignedAxis; 6] = [
        Self::POS_X,
        Self::NEG_X,
        Self::POS_Y,
        Self::NEG_Y,
        Self::POS_Z,
        Self::NEG_Z,
    ];

    pub const fn new(axis: Axis, positive: bool) -> Self {
        SignedAxis { axis, positive }
    }

    /// Wire code 0..6 following [`SignedAxis::ALL`].
    pub fn code(self) -> u8 {
        (self.axis.index() * 2 + usize::from(!self.positive)) as u8
    }

    pub fn from_code(code: u8) -> Option<SignedAxis> {
        Self::ALL.get(code as usize).copied()
    }

    /// Candidate planes with `first` leading, followed by the other five in
    /// canonical order.
    pub fn candidates_from(first: SignedAxis) -> Vec<SignedAxis> {
        std::iter::once(first)
            .chain(Self::ALL.into_iter().filter(|&s| s != first))
            .collect()
    }
}

impl Default for SignedAxis {
    fn default() -> Self {
        Self::POS_Z
    }
}

impl fmt::Display for SignedAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.positive { '+' } else { '-' }, self.axis)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid axis `{0}` (expected one of X, Y, Z, optionally signed)")]
pub struct ParseAxisError(pub String);

impl FromStr for Axis {
    type Err = ParseAxisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "X" => Ok(Axis::X),
            "Y" => Ok(Axis::Y),
            "Z" => Ok(Axis::Z),
            _ => Err(ParseAxisError(s.to_string())),
        }
    }
}

impl FromStr for SignedAxis {
    type Err = ParseAxisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (positive, rest) = match t.as_bytes().first() {
            Some(b'+') => (true, &t[1..]),
            Some(b'-') => (false, &t[1..]),
            _ => (true, t),
        };
        let axis = rest.parse::<Axis>().map_err(|_| ParseAxisError(s.to_string()))?;
        Ok(SignedAxis::new(axis, positive))
    }
}
