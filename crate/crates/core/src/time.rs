//! Integer-nanosecond time values.
//!
//! Every time quantity in the simulator (periods, deadlines, latencies, gate
//! durations) is an integer count of nanoseconds. There is no floating-point
//! time anywhere in the data path, so schedule arithmetic and trace exports
//! are bit-exact and reproducible.

use std::fmt;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// One microsecond in nanoseconds.
pub const MICROSECOND: i64 = 1_000;
/// One millisecond in nanoseconds.
pub const MILLISECOND: i64 = 1_000_000;
/// One second in nanoseconds.
pub const SECOND: i64 = 1_000_000_000;

/// A point in time or a duration, in integer nanoseconds (64-bit signed).
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TimeNs(pub i64);

impl TimeNs {
    pub const ZERO: TimeNs = TimeNs(0);
    pub const MAX: TimeNs = TimeNs(i64::MAX);

    pub const fn from_ns(ns: i64) -> Self {
        TimeNs(ns)
    }

    pub const fn from_us(us: i64) -> Self {
        TimeNs(us * MICROSECOND)
    }

    pub const fn from_ms(ms: i64) -> Self {
        TimeNs(ms * MILLISECOND)
    }

    pub const fn as_ns(self) -> i64 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn checked_add(self, rhs: TimeNs) -> Option<TimeNs> {
        self.0.checked_add(rhs.0).map(TimeNs)
    }

    pub fn checked_mul(self, k: i64) -> Option<TimeNs> {
        self.0.checked_mul(k).map(TimeNs)
    }

    pub fn saturating_sub(self, rhs: TimeNs) -> TimeNs {
        TimeNs(self.0.saturating_sub(rhs.0))
    }

    pub fn min(self, other: TimeNs) -> TimeNs {
        TimeNs(self.0.min(other.0))
    }

    pub fn max(self, other: TimeNs) -> TimeNs {
        TimeNs(self.0.max(other.0))
    }

    /// Round up to the next multiple of `quantum` nanoseconds.
    pub fn ceil_to(self, quantum: i64) -> TimeNs {
        debug_assert!(quantum > 0 && self.0 >= 0);
        TimeNs((self.0 + quantum - 1) / quantum * quantum)
    }

    pub fn is_multiple_of(self, quantum: i64) -> bool {
        quantum > 0 && self.0 % quantum == 0
    }

    /// Non-negative phase of `self` within a cycle of length `cycle`,
    /// measured from `base`.
    pub fn phase(self, base: TimeNs, cycle: TimeNs) -> TimeNs {
        debug_assert!(cycle.0 > 0);
        TimeNs((self.0 - base.0).rem_euclid(cycle.0))
    }
}

impl Add for TimeNs {
    type Output = TimeNs;
    fn add(self, rhs: TimeNs) -> TimeNs {
        TimeNs(self.0 + rhs.0)
    }
}

impl AddAssign for TimeNs {
    fn add_assign(&mut self, rhs: TimeNs) {
        self.0 += rhs.0;
    }
}

impl Sub for TimeNs {
    type Output = TimeNs;
    fn sub(self, rhs: TimeNs) -> TimeNs {
        TimeNs(self.0 - rhs.0)
    }
}

impl SubAssign for TimeNs {
    fn sub_assign(&mut self, rhs: TimeNs) {
        self.0 -= rhs.0;
    }
}

impl fmt::Display for TimeNs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

/// Render a time as microseconds with three decimals, for reports.
pub fn format_us(t: TimeNs) -> String {
    let sign = if t.0 < 0 { "-" } else { "" };
    let abs = t.0.unsigned_abs();
    format!("{sign}{}.{:03}us", abs / 1_000, abs % 1_000)
}

/// Parse a duration with an `ns`, `us`, `ms` or `s` suffix.
///
/// A bare integer is taken as nanoseconds.
pub fn parse_duration(s: &str) -> Result<TimeNs, String> {
    let s = s.trim();
    let (digits, mult) = if let Some(d) = s.strip_suffix("ns") {
        (d, 1)
    } else if let Some(d) = s.strip_suffix("us") {
        (d, MICROSECOND)
    } else if let Some(d) = s.strip_suffix("ms") {
        (d, MILLISECOND)
    } else if let Some(d) = s.strip_suffix('s') {
        (d, SECOND)
    } else {
        (s, 1)
    };
    let value: i64 = digits
        .trim()
        .parse()
        .map_err(|_| format!("invalid duration {s:?}: expected <integer>[ns|us|ms|s]"))?;
    value
        .checked_mul(mult)
        .map(TimeNs)
        .ok_or_else(|| format!("duration {s:?} overflows 64-bit nanoseconds"))
}
