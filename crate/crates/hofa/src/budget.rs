//! Operation-count budgets for the exhaustive code paths.

use crate::error::{Error, Result};

/// Cap on the number of elementary operations an exhaustive routine may
/// attempt. Routines estimate their cost up front and refuse to start when
/// the estimate exceeds the cap, naming both numbers in the error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(2_000_000_000)
    }
}

impl Budget {
    pub fn new(cap: u64) -> Self {
        Budget(cap)
    }

    /// Fail with a cost error if `attempted` exceeds the cap.
    pub fn check(&self, attempted: u128, what: &str) -> Result<()> {
        if attempted > self.0 as u128 {
            Err(Error::BudgetExceeded {
                attempted,
                budget: self.0,
                what: what.to_string(),
            })
        } else {
            Ok(())
        }
    }
}
