//! Process-wide size limits.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default cap on the number of amplitudes held by a dense state.
pub const DEFAULT_MAX_AMPLITUDES: u64 = 1 << 27;
/// Default cap on the number of branches explored by enumeration.
pub const DEFAULT_MAX_BRANCHES: usize = 1 << 16;

static MAX_AMPLITUDES: AtomicU64 = AtomicU64::new(DEFAULT_MAX_AMPLITUDES);

pub fn max_amplitudes() -> u64 {
    MAX_AMPLITUDES.load(Ordering::Relaxed)
}

pub fn set_max_amplitudes(n: u64) {
    MAX_AMPLITUDES.store(n.max(1), Ordering::Relaxed);
}

pub(crate) fn check_amplitudes(what: &str, needed: u128) -> Result<()> {
    let limit = max_amplitudes() as u128;
    if needed > limit {
        return Err(Error::Capacity { what: what.to_string(), needed, limit });
    }
    Ok(())
}
