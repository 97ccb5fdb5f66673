//! Seeded, single-threaded execution of process networks.

pub mod engine;
pub mod rng;
pub mod trace;
pub mod value;

pub use engine::{
    Binding, CallContext, ChannelId, ChannelInstance, Engine, EngineError, PortContext,
    ProcessId, ProcessInstance, STEP_LIMIT,
};
pub use rng::Lcg;
pub use trace::{Event, HaltReason, SkipReason, Trace};
pub use value::{Payload, Value};
