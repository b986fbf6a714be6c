//! Scripted conversation against the shipped data, printing each reply with
//! the winning generator, route and topic counter.
//!
//! `cargo run -p convo-core --example transcript`

use chrono::{TimeZone, Utc};
use convo_core::config::{EngineConfig, SeedMode};
use convo_core::dialog::Engine;

const SCRIPT: &[&str] = &[
    "hello",
    "my name is bob",
    "yes i loved it",
    "i think the acting was great",
    "i love james bond movies",
    "what is the capital of france",
    "tell me some news about baseball",
    "i want to buy a bond",
    "you are stupid",
    "you are an idiot",
    "what is the mrna vaccine",
    "oh my god that was great",
    "no",
    "okay",
    "let's talk about music",
    "i like rock music a lot",
    "goodbye",
];

fn main() -> convo_core::Result<()> {
    let engine = Engine::builtin(EngineConfig { seed: SeedMode::Fixed(7), ..Default::default() })?;
    let now = Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, 0).unwrap();
    let news = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/news100.jsonl");
    engine.ingest_news(&news, now)?;
    let id = engine.create_session("demo", Some("UTC"), now)?;
    for line in SCRIPT {
        let reply = engine.handle_turn(&id, line, now, true)?;
        let d = reply.debug.expect("debug requested");
        println!("user: {line}");
        println!("bot:  {}", reply.text);
        let topic = d.topic_current.map(|t| t.to_string()).unwrap_or_else(|| "-".into());
        let route = d.route.map(|r| format!("{r:?}").to_lowercase()).unwrap_or_else(|| "intercept".into());
        println!("      [{} via {route}, topic {topic}, counter {}]", d.chosen_generator, d.counter);
    }
    Ok(())
}
