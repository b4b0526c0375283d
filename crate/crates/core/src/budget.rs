//! Desk-scale guards shared by every module.

/// Largest group exponent handled by dense transforms and bitmaps.
pub const MAX_GROUP_EXPONENT: u32 = 24;

/// Default cap on the number of elements produced by a subspace enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 24;

/// Default cap on candidate combinations visited by witness and degeneracy searches.
pub const DEFAULT_SEARCH_LIMIT: u64 = 1 << 22;

/// Environment variable overriding [`Budget::max_group_exponent`].
pub const BUDGET_ENV: &str = "CLOSURELAB_BUDGET_EXP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_group_exponent: u32,
    pub enumeration_limit: u64,
    pub search_limit: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_group_exponent: MAX_GROUP_EXPONENT,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            search_limit: DEFAULT_SEARCH_LIMIT,
        }
    }
}

impl Budget {
    /// Default budget with the group exponent taken from `CLOSURELAB_BUDGET_EXP` when set.
    /// The exponent is never raised above [`MAX_GROUP_EXPONENT`].
    pub fn from_env() -> Self {
        let mut b = Budget::default();
        if let Some(exp) = std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse::<u32>().ok()) {
            b.max_group_exponent = exp.min(MAX_GROUP_EXPONENT);
        }
        b
    }

    pub fn check_exponent(&self, n: u32) -> crate::Result<()> {
        if n > self.max_group_exponent {
            return Err(crate::Error::budget("group exponent", n, self.max_group_exponent));
        }
        Ok(())
    }
}
