//! Scenario-driven verification of the reduction identities at sampled
//! level-set points, with JSON reporting.

use serde::Serialize;

pub mod config;
pub mod report;
pub mod sample;
pub mod selftest;
pub mod suite;

pub use config::{Tolerances, VerifyConfig};
pub use report::{summary_table, write_report};
pub use sample::sample_points;
pub use suite::{fd_convergence, run_identity_suite, ConvergenceProbe, IdentityReport, Status};

/// Residual channels of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Identity {
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
    I7,
    I8,
    I9,
    I10,
    I11,
    I12,
    I13,
}

impl Identity {
    pub const ALL: [Identity; 13] = [
        Identity::I1,
        Identity::I2,
        Identity::I3,
        Identity::I4,
        Identity::I5,
        Identity::I6,
        Identity::I7,
        Identity::I8,
        Identity::I9,
        Identity::I10,
        Identity::I11,
        Identity::I12,
        Identity::I13,
    ];

    /// Channels whose residual comes from finite differences.
    pub const FD_LIMITED: [Identity; 4] = [Identity::I7, Identity::I8, Identity::I9, Identity::I12];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Identity::I1 => "I1",
            Identity::I2 => "I2",
            Identity::I3 => "I3",
            Identity::I4 => "I4",
            Identity::I5 => "I5",
            Identity::I6 => "I6",
            Identity::I7 => "I7",
            Identity::I8 => "I8",
            Identity::I9 => "I9",
            Identity::I10 => "I10",
            Identity::I11 => "I11",
            Identity::I12 => "I12",
            Identity::I13 => "I13",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Identity::I1 => "moment map pairing <xi, dmu_A(eta)> = omega_A(K^xi, eta)",
            Identity::I2 => "moment map equivariance mu(x.h) = mu(x)",
            Identity::I3 => "normal space equals Ig + Jg + Kg",
            Identity::I4 => "horizontal space is quaternionic",
            Identity::I5 => "second fundamental form is symmetric",
            Identity::I6 => "SF(., vertical) = 0",
            Identity::I7 => "fibers totally geodesic (Weingarten map of fibers vanishes)",
            Identity::I8 => "-R(xi, eta)/2 = SF^A(xi, A eta) for A = I, J, K",
            Identity::I9 => "curvature is hyperholomorphic: R(A xi, A eta) = R(xi, eta)",
            Identity::I10 => "M1 block is quaternionic",
            Identity::I11 => "M3 block has only its real diagonal component",
            Identity::I12 => "horizontal part of the derivative of vertical fields vanishes",
            Identity::I13 => "fiber connection equals dmu^A of the normal derivative of A K (informational)",
        }
    }

    pub fn is_informational(self) -> bool {
        self == Identity::I13
    }
}
