//! Robot types and per-type counts.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Index, IndexMut};

/// The three robot types fielded in a mission: one ground type and two aerial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotType {
    Ugv,
    UavA,
    UavB,
}

impl RobotType {
    pub const ALL: [RobotType; 3] = [RobotType::Ugv, RobotType::UavA, RobotType::UavB];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> RobotType {
        Self::ALL[i]
    }

    pub fn is_aerial(self) -> bool {
        !matches!(self, RobotType::Ugv)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RobotType::Ugv => "ugv",
            RobotType::UavA => "uav_a",
            RobotType::UavB => "uav_b",
        }
    }
}

impl fmt::Display for RobotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A count per robot type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeCounts {
    pub ugv: usize,
    pub uav_a: usize,
    pub uav_b: usize,
}

impl TypeCounts {
    pub const fn new(ugv: usize, uav_a: usize, uav_b: usize) -> Self {
        Self { ugv, uav_a, uav_b }
    }

    pub fn total(&self) -> usize {
        self.ugv + self.uav_a + self.uav_b
    }

    pub fn min(&self, other: &TypeCounts) -> TypeCounts {
        TypeCounts::new(
            self.ugv.min(other.ugv),
            self.uav_a.min(other.uav_a),
            self.uav_b.min(other.uav_b),
        )
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.ugv, self.uav_a, self.uav_b]
    }
}

impl Index<RobotType> for TypeCounts {
    type Output = usize;
    fn index(&self, t: RobotType) -> &usize {
        match t {
            RobotType::Ugv => &self.ugv,
            RobotType::UavA => &self.uav_a,
            RobotType::UavB => &self.uav_b,
        }
    }
}

impl IndexMut<RobotType> for TypeCounts {
    fn index_mut(&mut self, t: RobotType) -> &mut usize {
        match t {
            RobotType::Ugv => &mut self.ugv,
            RobotType::UavA => &mut self.uav_a,
            RobotType::UavB => &mut self.uav_b,
        }
    }
}

impl fmt::Display for TypeCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.ugv, self.uav_a, self.uav_b)
    }
}
