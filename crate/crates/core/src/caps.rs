//! Enumeration limits shared by every exponential routine in the crate.

use crate::error::{Error, Result};

/// Environment variable that overrides [`Caps::cells`].
pub const CAP_CELLS_ENV: &str = "ENTROLAB_CAP_CELLS";

/// Largest point set handed to the exact separated/spanning solvers.
pub const EXACT_POINT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of elements produced by a ball or product set.
    pub group_elements: usize,
    /// Maximum number of labelings / joined cells enumerated in one call.
    pub cells: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            group_elements: 1_000_000,
            cells: 1 << 24,
        }
    }
}

impl Caps {
    /// Defaults, with the cell cap taken from `ENTROLAB_CAP_CELLS` when set.
    pub fn from_env() -> Result<Self> {
        let mut caps = Caps::default();
        if let Ok(raw) = std::env::var(CAP_CELLS_ENV) {
            caps.cells = raw.trim().parse().map_err(|_| {
                Error::Argument(format!("{CAP_CELLS_ENV}={raw:?} is not a positive integer"))
            })?;
            if caps.cells == 0 {
                return Err(Error::Argument(format!("{CAP_CELLS_ENV} must be positive")));
            }
        }
        Ok(caps)
    }

    pub(crate) fn check_cells(
        &self,
        what: &'static str,
        base: usize,
        exponent: usize,
    ) -> Result<u64> {
        match checked_pow(base as u64, exponent) {
            Some(total) if total <= self.cells => Ok(total),
            total => Err(Error::Resource {
                what,
                requested: match total {
                    Some(t) => t.to_string(),
                    None => format!("{base}^{exponent}"),
                },
                cap: self.cells,
            }),
        }
    }
}

pub(crate) fn checked_pow(base: u64, exponent: usize) -> Option<u64> {
    let exponent = u32::try_from(exponent).ok()?;
    base.checked_pow(exponent)
}
