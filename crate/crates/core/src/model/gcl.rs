//! Cyclic gate programs for 802.1Qbv egress ports.

use serde::{Deserialize, Serialize};

use crate::time::TimeNs;

/// One gate program step: which class gates are open, and for how long.
///
/// Bit `k` of `gate_mask` set means the gate of traffic class `k` is open.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GclEntry {
    pub gate_mask: u8,
    pub duration: TimeNs,
}

impl GclEntry {
    pub fn new(gate_mask: u8, duration: TimeNs) -> Self {
        GclEntry {
            gate_mask,
            duration,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GclError {
    #[error("gate control list must have at least one entry")]
    Empty,
    #[error("entry #{0} has non-positive duration")]
    BadDuration(usize),
    #[error("entry durations sum to {sum} but cycle_time is {cycle}")]
    CycleMismatch { sum: TimeNs, cycle: TimeNs },
    #[error("queried time {t} precedes base time {base}")]
    TimeBeforeBase { t: TimeNs, base: TimeNs },
}

#[derive(Serialize, Deserialize)]
struct RawGcl {
    base_time: TimeNs,
    cycle_time: TimeNs,
    entries: Vec<GclEntry>,
}

/// The cyclic gate program of one egress port.
///
/// Construction always checks the structural invariant: entries are
/// non-empty, every duration is positive, and durations sum exactly to the
/// cycle time. Deserialization goes through the same check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGcl", into = "RawGcl")]
pub struct GateControlList {
    base_time: TimeNs,
    cycle_time: TimeNs,
    entries: Vec<GclEntry>,
}

impl TryFrom<RawGcl> for GateControlList {
    type Error = GclError;
    fn try_from(raw: RawGcl) -> Result<Self, GclError> {
        GateControlList::new(raw.base_time, raw.cycle_time, raw.entries)
    }
}

impl From<GateControlList> for RawGcl {
    fn from(gcl: GateControlList) -> RawGcl {
        RawGcl {
            base_time: gcl.base_time,
            cycle_time: gcl.cycle_time,
            entries: gcl.entries,
        }
    }
}

/// Remaining contiguous open time for one class, starting at a query instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpenRun {
    /// Gate closed at the query instant.
    Closed,
    /// Gate open until this absolute time (exclusive).
    Until(TimeNs),
    /// Gate open for at least a full cycle, i.e. never closes.
    Unbounded,
}

impl GateControlList {
    pub fn new(
        base_time: TimeNs,
        cycle_time: TimeNs,
        entries: Vec<GclEntry>,
    ) -> Result<Self, GclError> {
        if entries.is_empty() {
            return Err(GclError::Empty);
        }
        let mut sum = TimeNs::ZERO;
        for (i, e) in entries.iter().enumerate() {
            if e.duration <= TimeNs::ZERO {
                return Err(GclError::BadDuration(i));
            }
            sum += e.duration;
        }
        if sum != cycle_time {
            return Err(GclError::CycleMismatch {
                sum,
                cycle: cycle_time,
            });
        }
        Ok(GateControlList {
            base_time,
            cycle_time,
            entries,
        })
    }

    /// A program that keeps all eight gates open.
    pub fn always_open(base_time: TimeNs, cycle_time: TimeNs) -> Self {
        GateControlList::new(base_time, cycle_time, vec![GclEntry::new(0xFF, cycle_time)])
            .expect("single full-cycle entry is always valid")
    }

    pub fn base_time(&self) -> TimeNs {
        self.base_time
    }

    pub fn cycle_time(&self) -> TimeNs {
        self.cycle_time
    }

    pub fn entries(&self) -> &[GclEntry] {
        &self.entries
    }

    /// Entry index and entry-local offset for the phase of `t`.
    fn locate(&self, t: TimeNs) -> Result<(usize, TimeNs), GclError> {
        if t < self.base_time {
            return Err(GclError::TimeBeforeBase {
                t,
                base: self.base_time,
            });
        }
        let mut phase = t.phase(self.base_time, self.cycle_time);
        for (i, e) in self.entries.iter().enumerate() {
            if phase < e.duration {
                return Ok((i, phase));
            }
            phase -= e.duration;
        }
        unreachable!("durations sum to cycle_time");
    }

    /// Gate mask active at `t`. Entries cover half-open intervals
    /// `[start, end)`, so a query exactly on a boundary reads the entry that
    /// starts there.
    pub fn gate_state_at(&self, t: TimeNs) -> Result<u8, GclError> {
        self.locate(t).map(|(i, _)| self.entries[i].gate_mask)
    }

    /// Is the gate of `class` open at `t`?
    pub fn is_open(&self, class: u8, t: TimeNs) -> Result<bool, GclError> {
        Ok(self.gate_state_at(t)? & (1 << class) != 0)
    }

    /// How long the gate of `class` stays contiguously open from `t`,
    /// following the cyclic program across entry and cycle boundaries.
    pub fn open_run(&self, class: u8, t: TimeNs) -> Result<OpenRun, GclError> {
        let bit = 1u8 << class;
        let (idx, offset) = self.locate(t)?;
        if self.entries[idx].gate_mask & bit == 0 {
            return Ok(OpenRun::Closed);
        }
        let mut end = t + (self.entries[idx].duration - offset);
        let mut walked = self.entries[idx].duration - offset;
        let mut i = (idx + 1) % self.entries.len();
        while self.entries[i].gate_mask & bit != 0 {
            if walked >= self.cycle_time {
                return Ok(OpenRun::Unbounded);
            }
            end += self.entries[i].duration;
            walked += self.entries[i].duration;
            i = (i + 1) % self.entries.len();
        }
        if walked >= self.cycle_time {
            return Ok(OpenRun::Unbounded);
        }
        Ok(OpenRun::Until(end))
    }

    /// Absolute time of the first entry boundary strictly after `t`.
    pub fn next_boundary_after(&self, t: TimeNs) -> Result<TimeNs, GclError> {
        let (idx, offset) = self.locate(t)?;
        Ok(t + (self.entries[idx].duration - offset))
    }

    /// Mask change points over `[from, to)`, starting with the state at
    /// `from`. Used by the gate-timeline debug dump.
    pub fn timeline(&self, from: TimeNs, to: TimeNs) -> Result<Vec<(TimeNs, u8)>, GclError> {
        let mut out = vec![(from, self.gate_state_at(from)?)];
        let mut t = from;
        loop {
            t = self.next_boundary_after(t)?;
            if t >= to {
                break;
            }
            let mask = self.gate_state_at(t)?;
            if mask != out.last().unwrap().1 {
                out.push((t, mask));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::TimeNs;

    fn sample_gcl() -> GateControlList {
        GateControlList::new(
            TimeNs::ZERO,
            TimeNs::from_us(1_000),
            vec![
                GclEntry::new(0b0000_0001, TimeNs::from_us(300)),
                GclEntry::new(0b1111_1110, TimeNs::from_us(700)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn state_within_first_entry() {
        let gcl = sample_gcl();
        assert_eq!(
            gcl.gate_state_at(TimeNs::from_us(150)).unwrap(),
            0b0000_0001
        );
    }

    #[test]
    fn state_wraps_after_one_cycle() {
        let gcl = sample_gcl();
        assert_eq!(gcl.gate_state_at(TimeNs::from_ms(1)).unwrap(), 0b0000_0001);
    }

    #[test]
    fn boundary_belongs_to_next_entry() {
        let gcl = sample_gcl();
        assert_eq!(
            gcl.gate_state_at(TimeNs::from_us(300)).unwrap(),
            0b1111_1110
        );
    }

    #[test]
    fn query_before_base_is_rejected() {
        let gcl = GateControlList::new(
            TimeNs::from_us(10),
            TimeNs::from_us(100),
            vec![GclEntry::new(0xFF, TimeNs::from_us(100))],
        )
        .unwrap();
        assert!(matches!(
            gcl.gate_state_at(TimeNs::ZERO),
            Err(GclError::TimeBeforeBase { .. })
        ));
    }

    #[test]
    fn construction_rejects_cycle_mismatch() {
        let err = GateControlList::new(
            TimeNs::ZERO,
            TimeNs::from_us(1_000),
            vec![GclEntry::new(0xFF, TimeNs::from_us(999))],
        )
        .unwrap_err();
        assert!(matches!(err, GclError::CycleMismatch { .. }));

        assert!(matches!(
            GateControlList::new(TimeNs::ZERO, TimeNs::ZERO, vec![]),
            Err(GclError::Empty)
        ));
    }

    #[test]
    fn deserialization_enforces_invariants() {
        let bad =
            r#"{"base_time":0,"cycle_time":1000,"entries":[{"gate_mask":255,"duration":999}]}"#;
        assert!(serde_json::from_str::<GateControlList>(bad).is_err());
        let good =
            r#"{"base_time":0,"cycle_time":1000,"entries":[{"gate_mask":255,"duration":1000}]}"#;
        assert!(serde_json::from_str::<GateControlList>(good).is_ok());
    }

    #[test]
    fn open_run_spans_cycle_wrap() {
        // Class 0 open in the last 200us and the first 300us of each cycle.
        let gcl = sample_gcl();
        let class0_run = gcl.open_run(0, TimeNs::from_us(100)).unwrap();
        assert_eq!(class0_run, OpenRun::Until(TimeNs::from_us(300)));

        let wrap = GateControlList::new(
            TimeNs::ZERO,
            TimeNs::from_us(1_000),
            vec![
                GclEntry::new(0b01, TimeNs::from_us(300)),
                GclEntry::new(0b10, TimeNs::from_us(500)),
                GclEntry::new(0b01, TimeNs::from_us(200)),
            ],
        )
        .unwrap();
        // From 900us the class-0 gate stays open through the wrap into the
        // next cycle's first 300us.
        assert_eq!(
            wrap.open_run(0, TimeNs::from_us(900)).unwrap(),
            OpenRun::Until(TimeNs::from_us(1_300))
        );
        assert_eq!(
            wrap.open_run(1, TimeNs::from_us(100)).unwrap(),
            OpenRun::Closed
        );
    }

    #[test]
    fn fully_open_gate_is_unbounded() {
        let gcl = GateControlList::always_open(TimeNs::ZERO, TimeNs::from_ms(1));
        assert_eq!(
            gcl.open_run(3, TimeNs::from_us(42)).unwrap(),
            OpenRun::Unbounded
        );
    }

    #[test]
    fn timeline_lists_mask_changes() {
        let gcl = sample_gcl();
        let tl = gcl.timeline(TimeNs::ZERO, TimeNs::from_us(1_500)).unwrap();
        assert_eq!(
            tl,
            vec![
                (TimeNs::ZERO, 0b0000_0001),
                (TimeNs::from_us(300), 0b1111_1110),
                (TimeNs::from_us(1_000), 0b0000_0001),
                (TimeNs::from_us(1_300), 0b1111_1110),
            ]
        );
    }
}
