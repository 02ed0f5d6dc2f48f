//! Butcher tableaus of the exponential Runge-Kutta schemes.
//!
//! Coefficients are kept symbolically as lists of `(k, w)` pairs meaning
//! `Σ w·φ_k`, with each weight of the form `p + q·c2 + r/c2` over exact
//! rationals, so the consistency identities can be checked without rounding.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SchemeId {
    E1,
    Sw21,
    Sw22,
    K4,
    Sw4,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [SchemeId::E1, SchemeId::Sw21, SchemeId::Sw22, SchemeId::K4, SchemeId::Sw4];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::E1 => "EI-E1",
            SchemeId::Sw21 => "EI-SW21",
            SchemeId::Sw22 => "EI-SW22",
            SchemeId::K4 => "EI-K4",
            SchemeId::Sw4 => "EI-SW4",
        }
    }

    /// Classical (non-stiff) order.
    pub fn order(self) -> u32 {
        match self {
            SchemeId::E1 => 1,
            SchemeId::Sw21 | SchemeId::Sw22 => 2,
            SchemeId::K4 | SchemeId::Sw4 => 4,
        }
    }

    pub fn needs_c2(self) -> bool {
        matches!(self, SchemeId::Sw21 | SchemeId::Sw22)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let t = t.strip_prefix("EI-").unwrap_or(&t);
        match t {
            "E1" => Ok(SchemeId::E1),
            "SW21" => Ok(SchemeId::Sw21),
            "SW22" => Ok(SchemeId::Sw22),
            "K4" => Ok(SchemeId::K4),
            "SW4" => Ok(SchemeId::Sw4),
            _ => Err(Error::UnknownScheme(s.to_string())),
        }
    }
}

impl TryFrom<String> for SchemeId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SchemeId> for String {
    fn from(s: SchemeId) -> String {
        s.as_str().to_string()
    }
}

/// `p + q·c2 + r/c2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Weight {
    pub p: Rational64,
    pub q: Rational64,
    pub r: Rational64,
}

impl Weight {
    pub fn constant(num: i64, den: i64) -> Self {
        Weight { p: Rational64::new(num, den), ..Default::default() }
    }

    pub fn c2(num: i64, den: i64) -> Self {
        Weight { q: Rational64::new(num, den), ..Default::default() }
    }

    pub fn inv_c2(num: i64, den: i64) -> Self {
        Weight { r: Rational64::new(num, den), ..Default::default() }
    }

    pub fn is_zero(&self) -> bool {
        *self == Weight::default()
    }

    pub fn eval(&self, c2: f64) -> f64 {
        let f = |x: Rational64| *x.numer() as f64 / *x.denom() as f64;
        let mut v = f(self.p);
        if self.q != Rational64::default() {
            v += f(self.q) * c2;
        }
        if self.r != Rational64::default() {
            v += f(self.r) / c2;
        }
        v
    }
}

impl std::ops::Add for Weight {
    type Output = Weight;

    fn add(self, o: Weight) -> Weight {
        Weight { p: self.p + o.p, q: self.q + o.q, r: self.r + o.r }
    }
}

/// `Σ w·φ_k` as `(k, w)` pairs.
pub type PhiCombination = Vec<(usize, Weight)>;

/// Tableau with symbolic weights. `a[i][j]` holds stage `i`'s coefficient
/// of `F(Y_j)` for `j < i`; its φ-functions are taken at `c_i·τA`, those in
/// `b` at `τA`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicTableau {
    pub id: SchemeId,
    pub c: Vec<Weight>,
    pub a: Vec<Vec<PhiCombination>>,
    pub b: Vec<PhiCombination>,
}

impl SymbolicTableau {
    pub fn stages(&self) -> usize {
        self.c.len()
    }
}

/// Combines terms with equal `k` and drops zero weights.
pub fn normalize(terms: &[(usize, Weight)]) -> BTreeMap<usize, Weight> {
    let mut out: BTreeMap<usize, Weight> = BTreeMap::new();
    for &(k, w) in terms {
        let e = out.entry(k).or_default();
        *e = *e + w;
    }
    out.retain(|_, w| !w.is_zero());
    out
}

pub fn symbolic_tableau(id: SchemeId) -> SymbolicTableau {
    let k = |n, d| Weight::constant(n, d);
    let one = k(1, 1);
    let half = k(1, 2);
    match id {
        SchemeId::E1 => SymbolicTableau { id, c: vec![Weight::default()], a: vec![vec![]], b: vec![vec![(1, one)]] },
        SchemeId::Sw21 => SymbolicTableau {
            id,
            c: vec![Weight::default(), Weight::c2(1, 1)],
            a: vec![vec![], vec![vec![(1, Weight::c2(1, 1))]]],
            b: vec![vec![(1, one), (2, Weight::inv_c2(-1, 1))], vec![(2, Weight::inv_c2(1, 1))]],
        },
        SchemeId::Sw22 => SymbolicTableau {
            id,
            c: vec![Weight::default(), Weight::c2(1, 1)],
            a: vec![vec![], vec![vec![(1, Weight::c2(1, 1))]]],
            b: vec![vec![(1, one + Weight::inv_c2(-1, 2))], vec![(1, Weight::inv_c2(1, 2))]],
        },
        SchemeId::K4 => SymbolicTableau {
            id,
            c: vec![Weight::default(), half, half, one],
            a: vec![
                vec![],
                vec![vec![(1, half)]],
                vec![vec![(1, half), (2, k(-1, 1))], vec![(2, one)]],
                vec![vec![(1, one), (2, k(-2, 1))], vec![], vec![(2, k(2, 1))]],
            ],
            b: vec![
                vec![(1, one), (2, k(-3, 1)), (3, k(4, 1))],
                vec![(2, k(2, 1)), (3, k(-4, 1))],
                vec![(2, k(2, 1)), (3, k(-4, 1))],
                vec![(2, k(-1, 1)), (3, k(4, 1))],
            ],
        },
        SchemeId::Sw4 => SymbolicTableau {
            id,
            c: vec![Weight::default(), half, half, one],
            a: vec![
                vec![],
                vec![vec![(1, half)]],
                vec![vec![(1, half), (2, k(-1, 2))], vec![(2, half)]],
                vec![vec![(1, one), (2, k(-2, 1))], vec![(2, k(-2, 1))], vec![(2, k(4, 1))]],
            ],
            b: vec![
                vec![(1, one), (2, k(-3, 1)), (3, k(4, 1))],
                vec![],
                vec![(2, k(4, 1)), (3, k(-8, 1))],
                vec![(2, k(-1, 1)), (3, k(4, 1))],
            ],
        },
    }
}

/// Which consistency identity failed, and where.
#[derive(Clone, Debug, PartialEq)]
pub enum IdentityFailure {
    RowSum { stage: usize },
    WeightSum,
    FirstNodeNonzero,
}

/// Checks `c_1 = 0`, `Σ_j a_ij = c_i·φ_1` for every stage and `Σ_i b_i = φ_1`,
/// all in exact arithmetic.
pub fn check_identities(t: &SymbolicTableau) -> std::result::Result<(), IdentityFailure> {
    if !t.c[0].is_zero() {
        return Err(IdentityFailure::FirstNodeNonzero);
    }
    for i in 1..t.stages() {
        let terms: Vec<_> = t.a[i].iter().flatten().copied().collect();
        let expected = normalize(&[(1, t.c[i])]);
        if normalize(&terms) != expected {
            return Err(IdentityFailure::RowSum { stage: i + 1 });
        }
    }
    let terms: Vec<_> = t.b.iter().flatten().copied().collect();
    if normalize(&terms) != normalize(&[(1, Weight::constant(1, 1))]) {
        return Err(IdentityFailure::WeightSum);
    }
    Ok(())
}

/// Tableau with weights evaluated at a concrete `c2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeTableau {
    pub name: SchemeId,
    pub c2: Option<f64>,
    pub c: Vec<f64>,
    pub a: Vec<Vec<Vec<(usize, f64)>>>,
    pub b: Vec<Vec<(usize, f64)>>,
}

impl SchemeTableau {
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// Largest φ index used anywhere in the tableau.
    pub fn max_k(&self) -> usize {
        self.a.iter().flatten().chain(&self.b).flatten().map(|&(k, _)| k).max().unwrap_or(0)
    }
}

pub fn build_tableau(name: SchemeId, c2: Option<f64>) -> Result<SchemeTableau> {
    let c2v = if name.needs_c2() {
        match c2 {
            Some(v) if v > 0.0 && v <= 1.0 => v,
            Some(v) => return Err(Error::InvalidParameter(format!("c2 must lie in (0, 1], got {v}"))),
            None => return Err(Error::MissingC2(name.to_string())),
        }
    } else {
        f64::NAN
    };
    let sym = symbolic_tableau(name);
    let eval = |terms: &PhiCombination| -> Vec<(usize, f64)> {
        normalize(terms).into_iter().map(|(k, w)| (k, w.eval(c2v))).collect()
    };
    Ok(SchemeTableau {
        name,
        c2: if name.needs_c2() { Some(c2v) } else { None },
        c: sym.c.iter().map(|w| w.eval(c2v)).collect(),
        a: sym.a.iter().map(|row| row.iter().map(eval).collect()).collect(),
        b: sym.b.iter().map(eval).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("EI-K4".parse::<SchemeId>().unwrap(), SchemeId::K4);
        assert_eq!("sw21".parse::<SchemeId>().unwrap(), SchemeId::Sw21);
        assert!(matches!("EI-RK5".parse::<SchemeId>(), Err(Error::UnknownScheme(_))));
        for id in SchemeId::ALL {
            assert_eq!(id.as_str().parse::<SchemeId>().unwrap(), id);
        }
    }

    #[test]
    fn identities_hold_for_all_schemes() {
        for id in SchemeId::ALL {
            assert_eq!(check_identities(&symbolic_tableau(id)), Ok(()), "{id}");
        }
    }

    #[test]
    fn broken_tableau_is_detected() {
        let mut t = symbolic_tableau(SchemeId::K4);
        t.a[2][1] = vec![(2, Weight::constant(-1, 1))];
        assert_eq!(check_identities(&t), Err(IdentityFailure::RowSum { stage: 3 }));
        let mut t = symbolic_tableau(SchemeId::Sw21);
        t.b[1] = vec![(2, Weight::c2(1, 1))];
        assert_eq!(check_identities(&t), Err(IdentityFailure::WeightSum));
    }

    #[test]
    fn e1() {
        let t = build_tableau(SchemeId::E1, None).unwrap();
        assert_eq!(t.stages(), 1);
        assert_eq!(t.b, vec![vec![(1, 1.0)]]);
    }

    #[test]
    fn sw21_weights() {
        let t = build_tableau(SchemeId::Sw21, Some(0.75)).unwrap();
        assert_eq!(t.c, vec![0.0, 0.75]);
        assert_eq!(t.a[1][0], vec![(1, 0.75)]);
        assert_eq!(t.b[0].len(), 2);
        assert_eq!(t.b[0][0], (1, 1.0));
        assert!((t.b[0][1].1 + 4.0 / 3.0).abs() < 1e-15);
        assert!((t.b[1][0].1 - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn k4_weights() {
        let t = build_tableau(SchemeId::K4, None).unwrap();
        assert_eq!(t.c, vec![0.0, 0.5, 0.5, 1.0]);
        assert_eq!(
            t.b,
            vec![
                vec![(1, 1.0), (2, -3.0), (3, 4.0)],
                vec![(2, 2.0), (3, -4.0)],
                vec![(2, 2.0), (3, -4.0)],
                vec![(2, -1.0), (3, 4.0)],
            ]
        );
        assert!(t.a[3][1].is_empty());
        assert_eq!(t.max_k(), 3);
    }

    #[test]
    fn c2_validation() {
        assert!(matches!(build_tableau(SchemeId::Sw21, None), Err(Error::MissingC2(_))));
        assert!(matches!(build_tableau(SchemeId::Sw22, Some(0.0)), Err(Error::InvalidParameter(_))));
        assert!(matches!(build_tableau(SchemeId::Sw22, Some(1.5)), Err(Error::InvalidParameter(_))));
        assert_eq!(build_tableau(SchemeId::K4, Some(0.3)).unwrap().c2, None);
    }

    #[test]
    fn sw22_weights_sum_to_phi1() {
        for c2 in [0.2, 0.5, 0.9, 1.0] {
            let t = build_tableau(SchemeId::Sw22, Some(c2)).unwrap();
            let s: f64 = t.b.iter().flatten().map(|&(_, w)| w).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }
}
