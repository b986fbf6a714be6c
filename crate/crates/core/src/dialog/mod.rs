//! The conversation driver: session state, the outer topic loop and the
//! per-turn pipeline.

mod engine;
mod outer;
mod state;

pub use engine::{default_entities, load_index, save_index, 
    DebugInfo, EntityDebug, Engine, EngineParts, ResponseEnvelope, SessionSummary, VerdictDebug,
};
pub use outer::{advance_topic, is_predefined, order_candidates, outer_loop_step, OuterLoop, Route, StepOutcome};
pub use state::{boredom_check, global_intent, GlobalIntent, SessionState, TurnRecord};
