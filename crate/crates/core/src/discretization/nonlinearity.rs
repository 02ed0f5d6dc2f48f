use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pointwise scalar nonlinearities used for `g(u)` and `h(w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Nonlinearity {
    Zero,
    /// `sin x`
    Sin,
    /// `x|x|`
    XAbsX,
    /// `-x|x|`
    NegXAbsX,
    /// `x³`
    Cube,
    /// `-5x³`
    NegFiveCube,
    /// `|x|`
    Abs,
    /// `-x|x|³`
    NegXAbsXCubed,
    /// `x²`
    Square,
}

impl Nonlinearity {
    pub const ALL: [Nonlinearity; 9] = [
        Nonlinearity::Zero,
        Nonlinearity::Sin,
        Nonlinearity::XAbsX,
        Nonlinearity::NegXAbsX,
        Nonlinearity::Cube,
        Nonlinearity::NegFiveCube,
        Nonlinearity::Abs,
        Nonlinearity::NegXAbsXCubed,
        Nonlinearity::Square,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Nonlinearity::Zero => "zero",
            Nonlinearity::Sin => "sin",
            Nonlinearity::XAbsX => "x_abs_x",
            Nonlinearity::NegXAbsX => "neg_x_abs_x",
            Nonlinearity::Cube => "cube",
            Nonlinearity::NegFiveCube => "neg5_cube",
            Nonlinearity::Abs => "abs",
            Nonlinearity::NegXAbsXCubed => "neg_x_abs_x3",
            Nonlinearity::Square => "square",
        }
    }

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Sin => x.sin(),
            Nonlinearity::XAbsX => x * x.abs(),
            Nonlinearity::NegXAbsX => -x * x.abs(),
            Nonlinearity::Cube => x * x * x,
            Nonlinearity::NegFiveCube => -5.0 * x * x * x,
            Nonlinearity::Abs => x.abs(),
            Nonlinearity::NegXAbsXCubed => {
                let a = x.abs();
                -x * a * a * a
            }
            Nonlinearity::Square => x * x,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Nonlinearity::Zero
    }
}

impl FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Nonlinearity::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| Error::UnknownNonlinearity(s.to_string()))
    }
}

impl TryFrom<String> for Nonlinearity {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Nonlinearity> for String {
    fn from(g: Nonlinearity) -> String {
        g.as_str().to_string()
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
