//! Latency models and the built-in platform presets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::distribution::{Distribution, DistributionError};
use crate::engine::probe::ProbeMethod;
use crate::time::TimeNs;

/// Stochastic delay model for every component on a frame's path.
///
/// `bridge_residence` applies at each bridge hop and excludes time spent in
/// the egress gate queues; probe overhead is added to the dwell only at
/// points where a probe is enabled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    /// Error between a frame's scheduled release and its actual send
    /// timestamp. Bounded tightly by the presets (tens of nanoseconds).
    pub talker_sched_error: Distribution,
    /// Dwell between the send timestamp and the frame reaching the talker's
    /// egress queues.
    pub talker_send: Distribution,
    /// Per-bridge residence between NIC arrival and the egress queues.
    pub bridge_residence: Distribution,
    /// Extra dwell charged by an active probe, per timestamping method.
    pub probe_overhead: BTreeMap<ProbeMethod, Distribution>,
    /// Dwell between listener NIC arrival and delivery to the listener
    /// process.
    pub listener_delivery: Distribution,
}

impl LatencyModel {
    /// All components constant zero; useful for noise-free runs.
    pub fn zero() -> Self {
        let zero = Distribution::constant(TimeNs::ZERO);
        let mut probe_overhead = BTreeMap::new();
        for m in [
            ProbeMethod::M11,
            ProbeMethod::M12,
            ProbeMethod::M21,
            ProbeMethod::M22,
            ProbeMethod::M3,
        ] {
            probe_overhead.insert(m, zero);
        }
        LatencyModel {
            talker_sched_error: zero,
            talker_send: zero,
            bridge_residence: zero,
            probe_overhead,
            listener_delivery: zero,
        }
    }

    pub fn validate(&self) -> Result<(), DistributionError> {
        self.talker_sched_error.validate()?;
        self.talker_send.validate()?;
        self.bridge_residence.validate()?;
        for d in self.probe_overhead.values() {
            d.validate()?;
        }
        self.listener_delivery.validate()
    }

    pub fn probe_overhead_for(&self, method: ProbeMethod) -> Distribution {
        self.probe_overhead
            .get(&method)
            .copied()
            .unwrap_or(Distribution::constant(TimeNs::ZERO))
    }
}

/// A named latency-model preset for one emulation platform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlatformProfile {
    pub name: String,
    pub model: LatencyModel,
}

fn us(v: i64) -> TimeNs {
    TimeNs::from_us(v)
}

fn ns(v: i64) -> TimeNs {
    TimeNs::from_ns(v)
}

fn probe_overheads(
    m21: (TimeNs, TimeNs),
    m22: (TimeNs, TimeNs),
    m3: (TimeNs, TimeNs),
) -> BTreeMap<ProbeMethod, Distribution> {
    let mut map = BTreeMap::new();
    map.insert(ProbeMethod::M11, Distribution::constant(TimeNs::ZERO));
    map.insert(ProbeMethod::M12, Distribution::constant(TimeNs::ZERO));
    map.insert(ProbeMethod::M21, Distribution::lognormal(m21.0, m21.1));
    map.insert(ProbeMethod::M22, Distribution::lognormal(m22.0, m22.1));
    map.insert(ProbeMethod::M3, Distribution::lognormal(m3.0, m3.1));
    map
}

impl PlatformProfile {
    /// Workstation, stock preemptible kernel, no real-time tuning.
    pub fn c1() -> Self {
        PlatformProfile {
            name: "C1".into(),
            model: LatencyModel {
                talker_sched_error: Distribution::uniform(ns(100), ns(100)),
                talker_send: Distribution::uniform(us(30), us(10)),
                bridge_residence: Distribution::uniform(us(300), us(150)),
                probe_overhead: probe_overheads(
                    (us(5), ns(1_500)),
                    (us(7), us(2)),
                    (ns(6_500), us(2)),
                ),
                listener_delivery: Distribution::lognormal(us(25), us(8)).with_outliers(0.02, 5.0),
            },
        }
    }

    /// Workstation with full kernel preemption and soft real-time tuning.
    /// This is the default profile.
    pub fn c2() -> Self {
        PlatformProfile {
            name: "C2".into(),
            model: LatencyModel {
                talker_sched_error: Distribution::uniform(ns(40), ns(40)),
                talker_send: Distribution::uniform(us(20), us(5)),
                bridge_residence: Distribution::uniform(us(200), us(110)),
                probe_overhead: probe_overheads(
                    (us(4), us(1)),
                    (us(5), ns(1_200)),
                    (ns(4_500), ns(1_200)),
                ),
                listener_delivery: Distribution::lognormal(us(15), us(4)).with_outliers(0.01, 4.0),
            },
        }
    }

    /// Industrial PC with full preemption and time-coordination hardware
    /// features enabled; the fastest preset.
    pub fn c3() -> Self {
        PlatformProfile {
            name: "C3".into(),
            model: LatencyModel {
                talker_sched_error: Distribution::uniform(ns(25), ns(25)),
                talker_send: Distribution::uniform(us(8), us(2)),
                bridge_residence: Distribution::uniform(us(45), us(20)),
                probe_overhead: probe_overheads(
                    (us(2), ns(500)),
                    (us(3), ns(800)),
                    (ns(2_500), ns(800)),
                ),
                listener_delivery: Distribution::lognormal(us(8), us(2)).with_outliers(0.01, 4.0),
            },
        }
    }

    /// C3 with one of three process-to-core allocation schemes. Allocation 2
    /// pins the hot processes apart and eliminates the extreme delivery
    /// outliers; 1 and 3 keep them, 3 less severely.
    pub fn c3_allocation(allocation: u8) -> Option<Self> {
        let mut p = PlatformProfile::c3();
        p.name = format!("C3-alloc{allocation}");
        p.model.listener_delivery = match allocation {
            1 => Distribution::lognormal(us(8), us(2)).with_outliers(0.02, 8.0),
            2 => Distribution::lognormal(us(8), us(2)),
            3 => Distribution::lognormal(us(8), us(2)).with_outliers(0.02, 6.0),
            _ => return None,
        };
        Some(p)
    }

    /// Look a preset up by name (`C1`, `C2`, `C3`, `C3-alloc1..3`).
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "C1" => Some(Self::c1()),
            "C2" => Some(Self::c2()),
            "C3" => Some(Self::c3()),
            "C3-alloc1" => Self::c3_allocation(1),
            "C3-alloc2" => Self::c3_allocation(2),
            "C3-alloc3" => Self::c3_allocation(3),
            _ => None,
        }
    }

    pub const PRESET_NAMES: [&'static str; 6] =
        ["C1", "C2", "C3", "C3-alloc1", "C3-alloc2", "C3-alloc3"];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in PlatformProfile::PRESET_NAMES {
            let p = PlatformProfile::by_name(name).unwrap();
            assert_eq!(p.name, name);
            p.model.validate().unwrap();
        }
        assert!(PlatformProfile::by_name("C9").is_none());
    }

    #[test]
    fn bridge_residence_medians_are_ordered() {
        // Faster platforms must sit strictly below slower ones.
        let c1 = PlatformProfile::c1().model.bridge_residence.median;
        let c2 = PlatformProfile::c2().model.bridge_residence.median;
        let c3 = PlatformProfile::c3().model.bridge_residence.median;
        assert!(
            c3 < c2 && c2 < c1,
            "expected C3 < C2 < C1, got {c3} {c2} {c1}"
        );
    }

    #[test]
    fn packet_socket_probe_costs_more_than_driver_hook() {
        for p in [
            PlatformProfile::c1(),
            PlatformProfile::c2(),
            PlatformProfile::c3(),
        ] {
            let m22 = p.model.probe_overhead_for(ProbeMethod::M22);
            let m3 = p.model.probe_overhead_for(ProbeMethod::M3);
            assert!(m22.median > m3.median);
            assert!(m22.iqr >= m3.iqr);
        }
    }

    #[test]
    fn zero_model_samples_nothing() {
        let m = LatencyModel::zero();
        m.validate().unwrap();
        assert_eq!(m.bridge_residence.median, TimeNs::ZERO);
    }

    #[test]
    fn model_round_trips_through_json() {
        let m = PlatformProfile::c2();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<PlatformProfile>(&json).unwrap(), m);
    }
}
