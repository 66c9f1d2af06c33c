//! Timestamping probe configuration.
//!
//! Five timestamp points are recorded along a frame's path: send time at the
//! talker (T1), NIC arrival at the first and second bridge (T2, T3), NIC
//! arrival at the listener (T4) and delivery at the listener process (T5).
//! Each point can be disabled, and each accepts a subset of the available
//! timestamping methods.

use serde::{Deserialize, Serialize};

/// Timestamping method.
///
/// `M1x` methods read an OS clock in the sending/receiving process, `M21`
/// reads the driver timestamp through a datagram socket, `M22` through a
/// packet socket that clones the frame, and `M3` reads a kernel clock from a
/// driver-level hook.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProbeMethod {
    #[serde(rename = "M1.1")]
    M11,
    #[serde(rename = "M1.2")]
    M12,
    #[serde(rename = "M2.1")]
    M21,
    #[serde(rename = "M2.2")]
    M22,
    #[serde(rename = "M3")]
    M3,
}

impl ProbeMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeMethod::M11 => "M1.1",
            ProbeMethod::M12 => "M1.2",
            ProbeMethod::M21 => "M2.1",
            ProbeMethod::M22 => "M2.2",
            ProbeMethod::M3 => "M3",
        }
    }

    pub fn parse(s: &str) -> Option<ProbeMethod> {
        match s {
            "M1.1" => Some(ProbeMethod::M11),
            "M1.2" => Some(ProbeMethod::M12),
            "M2.1" => Some(ProbeMethod::M21),
            "M2.2" => Some(ProbeMethod::M22),
            "M3" => Some(ProbeMethod::M3),
            _ => None,
        }
    }
}

impl std::fmt::Display for ProbeMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The five timestamp points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TsPoint {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl TsPoint {
    pub const ALL: [TsPoint; 5] = [
        TsPoint::T1,
        TsPoint::T2,
        TsPoint::T3,
        TsPoint::T4,
        TsPoint::T5,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TsPoint::T1 => "T1",
            TsPoint::T2 => "T2",
            TsPoint::T3 => "T3",
            TsPoint::T4 => "T4",
            TsPoint::T5 => "T5",
        }
    }

    fn accepts(&self, method: ProbeMethod) -> bool {
        use ProbeMethod::*;
        match self {
            TsPoint::T1 | TsPoint::T5 => matches!(method, M11 | M12),
            TsPoint::T2 | TsPoint::T3 => matches!(method, M22 | M3),
            TsPoint::T4 => matches!(method, M21 | M3),
        }
    }
}

/// Enable flag and method for one timestamp point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointProbe {
    pub enabled: bool,
    pub method: ProbeMethod,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("point {point:?} does not accept method {method}")]
pub struct ProbeError {
    pub point: TsPoint,
    pub method: ProbeMethod,
}

#[derive(Serialize, Deserialize)]
struct RawProbeConfig {
    t1: PointProbe,
    t2: PointProbe,
    t3: PointProbe,
    t4: PointProbe,
    t5: PointProbe,
}

/// Probe configuration for all five points. Construction and
/// deserialization both verify the method compatibility rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProbeConfig", into = "RawProbeConfig")]
pub struct ProbeConfig {
    pub t1: PointProbe,
    pub t2: PointProbe,
    pub t3: PointProbe,
    pub t4: PointProbe,
    pub t5: PointProbe,
}

impl TryFrom<RawProbeConfig> for ProbeConfig {
    type Error = ProbeError;
    fn try_from(raw: RawProbeConfig) -> Result<Self, ProbeError> {
        let cfg = ProbeConfig {
            t1: raw.t1,
            t2: raw.t2,
            t3: raw.t3,
            t4: raw.t4,
            t5: raw.t5,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl From<ProbeConfig> for RawProbeConfig {
    fn from(c: ProbeConfig) -> RawProbeConfig {
        RawProbeConfig {
            t1: c.t1,
            t2: c.t2,
            t3: c.t3,
            t4: c.t4,
            t5: c.t5,
        }
    }
}

impl Default for ProbeConfig {
    /// All points enabled: OS-clock stamps at the end stations, packet-socket
    /// stamps at the bridges, datagram-socket stamp at the listener NIC.
    fn default() -> Self {
        ProbeConfig {
            t1: PointProbe {
                enabled: true,
                method: ProbeMethod::M11,
            },
            t2: PointProbe {
                enabled: true,
                method: ProbeMethod::M22,
            },
            t3: PointProbe {
                enabled: true,
                method: ProbeMethod::M22,
            },
            t4: PointProbe {
                enabled: true,
                method: ProbeMethod::M21,
            },
            t5: PointProbe {
                enabled: true,
                method: ProbeMethod::M11,
            },
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<(), ProbeError> {
        for (point, probe) in self.points() {
            if !point.accepts(probe.method) {
                return Err(ProbeError {
                    point,
                    method: probe.method,
                });
            }
        }
        Ok(())
    }

    pub fn points(&self) -> [(TsPoint, PointProbe); 5] {
        [
            (TsPoint::T1, self.t1),
            (TsPoint::T2, self.t2),
            (TsPoint::T3, self.t3),
            (TsPoint::T4, self.t4),
            (TsPoint::T5, self.t5),
        ]
    }

    pub fn point(&self, p: TsPoint) -> PointProbe {
        match p {
            TsPoint::T1 => self.t1,
            TsPoint::T2 => self.t2,
            TsPoint::T3 => self.t3,
            TsPoint::T4 => self.t4,
            TsPoint::T5 => self.t5,
        }
    }

    /// Default configuration with the bridge probes (T2/T3) switched off.
    pub fn bridges_disabled() -> Self {
        let mut cfg = ProbeConfig::default();
        cfg.t2.enabled = false;
        cfg.t3.enabled = false;
        cfg
    }

    /// Default configuration with `method` at both bridge points.
    pub fn with_bridge_method(method: ProbeMethod) -> Result<Self, ProbeError> {
        let mut cfg = ProbeConfig::default();
        cfg.t2.method = method;
        cfg.t3.method = method;
        cfg.validate()?;
        Ok(cfg)
    }
}
