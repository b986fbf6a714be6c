use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::{GeneratorContext, GeneratorDescriptor, ResponseGenerator};
use crate::Exec;

/// Runs every generator on `ctx` and keeps the replies that arrive within
/// each generator's timeout, ordered by generator name. In parallel mode
/// each generator gets its own thread and stragglers are abandoned; in
/// sequential mode late replies are discarded after the fact.
pub fn gather(
    generators: &[Arc<dyn ResponseGenerator>],
    ctx: Arc<GeneratorContext>,
    exec: Exec,
) -> Vec<(GeneratorDescriptor, String)> {
    assert!(!generators.is_empty(), "no response generators registered");
    let mut out = if exec.is_parallel() && generators.len() > 1 {
        gather_threads(generators, ctx)
    } else {
        generators
            .iter()
            .filter_map(|g| {
                let d = g.descriptor().clone();
                let start = Instant::now();
                let text = g.generate(&ctx)?;
                (start.elapsed() <= Duration::from_millis(d.timeout_ms)).then_some((d, text))
            })
            .collect()
    };
    out.retain(|(_, t)| !t.trim().is_empty());
    out.sort_by(|a, b| a.0.name.cmp(&b.0.name));
    out
}

fn gather_threads(
    generators: &[Arc<dyn ResponseGenerator>],
    ctx: Arc<GeneratorContext>,
) -> Vec<(GeneratorDescriptor, String)> {
    let (tx, rx) = mpsc::channel();
    let start = Instant::now();
    let mut deadlines = Vec::with_capacity(generators.len());
    for (i, g) in generators.iter().enumerate() {
        deadlines.push(start + Duration::from_millis(g.descriptor().timeout_ms));
        let (g, ctx, tx) = (Arc::clone(g), Arc::clone(&ctx), tx.clone());
        let spawned = std::thread::Builder::new()
            .name(format!("gen-{}", g.descriptor().name))
            .spawn(move || {
                let _ = tx.send((i, g.generate(&ctx)));
            });
        if let Err(e) = spawned {
            log::warn!("could not start generator thread: {e}");
        }
    }
    drop(tx);
    let last = deadlines.iter().max().copied().unwrap_or(start);
    let mut results = Vec::new();
    let mut pending = generators.len();
    while pending > 0 {
        let now = Instant::now();
        if now >= last {
            break;
        }
        match rx.recv_timeout(last - now) {
            Ok((i, reply)) => {
                pending -= 1;
                let d = generators[i].descriptor();
                if Instant::now() > deadlines[i] {
                    log::debug!("generator {} missed its deadline", d.name);
                    continue;
                }
                if let Some(text) = reply {
                    results.push((d.clone(), text));
                }
            }
            Err(_) => break,
        }
    }
    results
}

#[cfg(test)]
mod tests {
    use chrono::Utc;

    use super::*;
    use crate::pool::GeneratorKind;
    use crate::text::{normalize, Topic, UtteranceFeatures};

    struct Fixed(GeneratorDescriptor, Option<&'static str>, u64);

    impl ResponseGenerator for Fixed {
        fn descriptor(&self) -> &GeneratorDescriptor {
            &self.0
        }
        fn generate(&self, _: &GeneratorContext) -> Option<String> {
            std::thread::sleep(Duration::from_millis(self.2));
            self.1.map(str::to_string)
        }
    }

    fn gen(name: &str, text: Option<&'static str>, sleep: u64, timeout: u64) -> Arc<dyn ResponseGenerator> {
        Arc::new(Fixed(GeneratorDescriptor::new(name, GeneratorKind::ChitchatStub, timeout), text, sleep))
    }

    fn ctx() -> Arc<GeneratorContext> {
        Arc::new(GeneratorContext {
            nt: normalize("hello"),
            features: UtteranceFeatures::default(),
            entities: vec![],
            topic: Topic::General,
            seed: 1,
            now: Utc::now(),
            previous_bot: None,
        })
    }

    #[test]
    fn late_and_empty_generators_are_dropped() {
        for exec in [Exec::Parallel, Exec::Sequential] {
            let gens = vec![
                gen("zeta", Some("z"), 0, 500),
                gen("alpha", Some("a"), 0, 500),
                gen("slow", Some("s"), 300, 50),
                gen("quiet", None, 0, 500),
            ];
            let names: Vec<String> = gather(&gens, ctx(), exec).into_iter().map(|(d, _)| d.name).collect();
            assert_eq!(names, ["alpha", "zeta"], "{exec:?}");
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_gather_does_not_wait_for_stragglers() {
        let gens = vec![gen("fast", Some("f"), 0, 100), gen("slow", Some("s"), 2000, 100)];
        let start = Instant::now();
        let out = gather(&gens, ctx(), Exec::Parallel);
        assert!(start.elapsed() < Duration::from_millis(1000));
        assert_eq!(out.len(), 1);
    }

    #[test]
    #[should_panic(expected = "no response generators")]
    fn empty_registry_is_a_contract_violation() {
        gather(&[], ctx(), Exec::Parallel);
    }
}
