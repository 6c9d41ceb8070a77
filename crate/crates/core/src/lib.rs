//! Quantitative LTLf: formulas, a reference semantics, register monitors
//! that compute a formula's value online, and composite reward monitors.

pub mod check;
pub mod compose;
pub mod formula;
pub mod gen;
pub mod monitor;
pub mod scalar;
pub mod semantics;

pub use formula::{parse, Formula, ParseError};
pub use monitor::{synth, BooleanMonitor, MonitorError, MonitorState, Qrm, Synthesizer};
pub use scalar::Scalar;
pub use semantics::{evaluate, Labels, Trace};

pub type Rational = num_rational::Rational64;

pub type Qrm64 = Qrm<f64>;
pub type Qrm32 = Qrm<f32>;
pub type QrmExact = Qrm<Rational>;
pub type Trace64 = Trace<f64>;
pub type Trace32 = Trace<f32>;
pub type TraceExact = Trace<Rational>;
pub type CompositeMonitor64 = compose::CompositeMonitor<f64>;
