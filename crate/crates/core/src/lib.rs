//! Age of Information for status-update queues that wait before serving.
//!
//! Two packet-management schemes are covered, both with Poisson arrivals
//! of rate `λ` and i.i.d. general service:
//!
//! * **M/GI/1/1**: no buffer; a packet entering an idle server is held
//!   for a deterministic `eps_i` before service, and a newer arrival
//!   during that hold replaces it. Arrivals during service are dropped.
//! * **M/GI/1/2\***: one buffer slot holding only the latest arrival.
//!   The server holds `eps_i` after an idle period and `eps_b` after a
//!   busy period, serving the freshest packet when the hold ends.
//!
//! [`analytic`] evaluates average AoI and average peak AoI in closed form,
//! [`sim`] is a packet-level discrete-event simulator used as ground
//! truth, and [`optimize`] searches the waiting times.

pub mod analytic;
pub mod dist;
pub mod error;
pub mod format;
pub mod optimize;
pub mod oracle;
pub mod sim;

use std::fmt;
use std::str::FromStr;

pub use analytic::{evaluate, AoiMetrics};
pub use dist::{Law, MgfTriple, ResidualStats, ServiceDistribution};
pub use error::{Error, Result};

/// Packet-management scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Mg11,
    Mg12Star,
}

impl Scheme {
    /// States an arriving packet can observe under this scheme.
    pub fn states(&self) -> &'static [SysState] {
        match self {
            Scheme::Mg11 => &[SysState::Idle, SysState::WaitIdle, SysState::Busy],
            Scheme::Mg12Star => &[
                SysState::Idle,
                SysState::WaitIdle,
                SysState::Busy,
                SysState::WaitBusy,
            ],
        }
    }
}

/// Server state. `WaitIdle` is the hold after an idle period (the only
/// hold in M/GI/1/1); `WaitBusy` is the M/GI/1/2* hold after a busy period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SysState {
    Idle,
    WaitIdle,
    Busy,
    WaitBusy,
}

impl SysState {
    pub const ALL: [SysState; 4] = [
        SysState::Idle,
        SysState::WaitIdle,
        SysState::Busy,
        SysState::WaitBusy,
    ];

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SysState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SysState::Idle => "I",
            SysState::WaitIdle => "WaI",
            SysState::Busy => "B",
            SysState::WaitBusy => "WaB",
        })
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Mg11 => "mg11",
            Scheme::Mg12Star => "mg12star",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mg11" => Ok(Scheme::Mg11),
            "mg12star" | "mg12*" => Ok(Scheme::Mg12Star),
            other => Err(Error::Parse {
                input: other.to_string(),
                reason: "expected `mg11` or `mg12star`".into(),
            }),
        }
    }
}
