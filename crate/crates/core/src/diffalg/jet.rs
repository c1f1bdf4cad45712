use std::fmt;

use super::DiffAlgError;

/// Highest jet order a variable may reach before derivation is refused.
pub const JET_ORDER_GUARD: u32 = 64;

/// Which symbol table a jet variable belongs to.
///
/// The declaration order is the canonical order: free fields sort before
/// W-fields, which sort before fiber coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Free fields `a_j`.
    FreeField,
    /// W-fields `w_i` (with `T` stored as `w_2`).
    WField,
    /// Affine fiber coordinates `u_m` on the big cell. Never differentiated.
    Coordinate,
}

impl Family {
    fn letter(self) -> char {
        match self {
            Family::FreeField => 'a',
            Family::WField => 'w',
            Family::Coordinate => 'u',
        }
    }
}

/// A jet variable `∂^order x_index`.
///
/// Ordered by family, then index, then order; the derived `Ord` relies on the
/// field declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    family: Family,
    index: u32,
    order: u32,
}

impl JetVar {
    pub fn new(family: Family, index: u32, order: u32) -> Result<Self, DiffAlgError> {
        if index == 0 {
            return Err(DiffAlgError::InvalidVariable(format!(
                "{}0: indices start at 1",
                family.letter()
            )));
        }
        if family == Family::Coordinate && order != 0 {
            return Err(DiffAlgError::InvalidVariable(format!(
                "u{index} with jet order {order}: coordinates carry order 0 only"
            )));
        }
        if order > JET_ORDER_GUARD {
            return Err(DiffAlgError::JetOrderExceeded { guard: JET_ORDER_GUARD });
        }
        Ok(JetVar { family, index, order })
    }

    /// Free field `a_j`.
    pub fn a(j: u32) -> Self {
        Self::a_jet(j, 0)
    }

    /// `∂^k a_j`.
    pub fn a_jet(j: u32, k: u32) -> Self {
        Self::new(Family::FreeField, j, k).expect("valid free-field jet")
    }

    /// W-field `w_i`.
    pub fn w(i: u32) -> Self {
        Self::w_jet(i, 0)
    }

    /// `∂^k w_i`.
    pub fn w_jet(i: u32, k: u32) -> Self {
        Self::new(Family::WField, i, k).expect("valid W-field jet")
    }

    /// The stress tensor `T`, stored as `w_2`.
    pub fn t() -> Self {
        Self::w(2)
    }

    /// Coordinate `u_m`.
    pub fn u(m: u32) -> Self {
        Self::new(Family::Coordinate, m, 0).expect("valid coordinate")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_coordinate(&self) -> bool {
        self.family == Family::Coordinate
    }

    /// The next jet, `∂(∂^k x) = ∂^{k+1} x`.
    pub fn derived(&self) -> Result<Self, DiffAlgError> {
        if self.is_coordinate() {
            return Err(DiffAlgError::CoordinateInDerivative(*self));
        }
        if self.order >= JET_ORDER_GUARD {
            return Err(DiffAlgError::JetOrderExceeded { guard: JET_ORDER_GUARD });
        }
        Ok(JetVar { order: self.order + 1, ..*self })
    }

    /// Canonical name with `T` in place of `w2` (and `DT`, `D2T`, ...).
    pub fn alias_name(&self) -> String {
        if self.family == Family::WField && self.index == 2 {
            match self.order {
                0 => "T".to_string(),
                1 => "DT".to_string(),
                k => format!("D{k}T"),
            }
        } else {
            self.to_string()
        }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            0 => {}
            1 => f.write_str("D")?,
            k => write!(f, "D{k}")?,
        }
        write!(f, "{}{}", self.family.letter(), self.index)
    }
}

impl std::str::FromStr for JetVar {
    type Err = DiffAlgError;

    /// Parses `a1`, `Da1`, `D2a1`, `w2`, `T`, `DT`, `u3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DiffAlgError::InvalidVariable(s.to_string());
        let (order, rest) = match s.strip_prefix('D') {
            Some(rest) => {
                let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
                let order = if digits == 0 {
                    1
                } else {
                    rest[..digits].parse::<u32>().map_err(|_| bad())?
                };
                (order, &rest[digits..])
            }
            None => (0, s),
        };
        if rest == "T" {
            return JetVar::new(Family::WField, 2, order);
        }
        let mut chars = rest.chars();
        let family = match chars.next() {
            Some('a') => Family::FreeField,
            Some('w') => Family::WField,
            Some('u') => Family::Coordinate,
            _ => return Err(bad()),
        };
        let digits = chars.as_str();
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let index = digits.parse::<u32>().map_err(|_| bad())?;
        JetVar::new(family, index, order)
    }
}
