//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints one PASS or FAIL line; exits non-zero on any failure.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selfx_core::assess::{
    acoustic_position_inaccuracy, parse_log, train_behavior, train_som, visual_position_inaccuracy, Conditions,
    SomConfig, SomMap,
};
use selfx_core::bundled;
use selfx_core::inference::rules::{processings, realized_pairs, ProcessingView};
use selfx_core::inference::infer_to_fixpoint;
use selfx_core::kb::KnowledgeBase;
use selfx_core::mission::{can_i_do_it, select_behavior, ConstantPredictor, Predictors};
use selfx_core::schema::new_kb;
use selfx_core::sxdl;

use common::{canonical, ComponentDag, RealizingScenario};

const VISUAL: &str = "person detection via camera";
const SPEECH: &str = "person detection via speech";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn inferred(docs: &[&str]) -> KnowledgeBase {
    let mut kb = bundled::scenario(docs).expect("bundled files load");
    infer_to_fixpoint(&mut kb).expect("inference runs");
    kb
}

fn executor_names(kb: &KnowledgeBase, p: &ProcessingView) -> Vec<String> {
    p.executors.iter().map(|e| kb.label(*e)).collect()
}

fn scenario_fidelity() -> Outcome {
    let start = Instant::now();
    let mut kb = bundled::scenario(&[bundled::CAMERA, bundled::DETECTOR, bundled::ENVIRONMENT]).unwrap();
    infer_to_fixpoint(&mut kb).unwrap();
    let elapsed = start.elapsed();
    let found: BTreeSet<Vec<String>> = processings(&kb).iter().map(|p| executor_names(&kb, p)).collect();
    let n = processings(&kb).len();
    let want: BTreeSet<Vec<String>> = [vec!["camera"], vec!["detector"], vec!["camera", "detector"]]
        .into_iter()
        .map(|v| v.into_iter().map(String::from).collect())
        .collect();
    ensure(n == 3, || format!("{n} processing relations, expected 3"))?;
    ensure(found == want, || format!("executor chains {found:?}"))?;
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("3 processing relations in {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn environmental_gating() -> Outcome {
    let kb = inferred(&[bundled::CAMERA, bundled::DETECTOR, bundled::ENVIRONMENT_DIM]);
    let all = processings(&kb);
    let camera = kb.lookup("camera").unwrap();
    let with_camera = all.iter().filter(|p| p.executors.contains(&camera)).count();
    let composites_through_camera = all
        .iter()
        .filter(|p| p.executors.len() > 1 && p.executors.contains(&camera))
        .count();
    ensure(with_camera == 0, || format!("{with_camera} processings involve the camera"))?;
    ensure(composites_through_camera == 0, || format!("{composites_through_camera} composites"))?;
    Ok(format!("0 camera processings, {} others", all.len()))
}

fn realizing_oracle() -> Outcome {
    let mut positives = 0;
    let mut pairs = 0;
    for seed in 0..100 {
        let sc = RealizingScenario::random(seed);
        let mut kb = new_kb();
        sxdl::load_str(&sc.sxdl(), &mut kb).map_err(|e| format!("seed {seed}: {e}"))?;
        infer_to_fixpoint(&mut kb).map_err(|e| format!("seed {seed}: {e}"))?;
        let got: BTreeSet<(String, String)> = realized_pairs(&kb)
            .into_keys()
            .map(|(r, p)| (kb.label(r), kb.label(p)))
            .collect();
        let want = sc.expected_pairs();
        ensure(got == want, || format!("seed {seed}: engine {got:?} vs oracle {want:?}"))?;
        positives += want.len();
        pairs += sc.requests.len() * sc.providers.len();
    }
    ensure(positives > 0, || "no seed produced a realizing".into())?;
    Ok(format!("100 seeds agree ({positives} of {pairs} pairs realized)"))
}

fn transitivity_oracle() -> Outcome {
    let mut composites = 0;
    for seed in 0..100 {
        let dag = ComponentDag::random(seed);
        let mut kb = new_kb();
        sxdl::load_str(&dag.sxdl(), &mut kb).map_err(|e| format!("seed {seed}: {e}"))?;
        infer_to_fixpoint(&mut kb).map_err(|e| format!("seed {seed}: {e}"))?;
        let all = processings(&kb);
        let got: BTreeSet<Vec<String>> = all
            .iter()
            .filter(|p| p.chain.len() >= 2)
            .map(|p| executor_names(&kb, p))
            .collect();
        let count = all.iter().filter(|p| p.chain.len() >= 2).count();
        let want = dag.expected_chains();
        ensure(got == want && count == want.len(), || {
            format!("seed {seed}: engine {got:?} ({count}) vs paths {want:?}")
        })?;
        composites += count;
    }
    ensure(composites > 0, || "no seed produced a composite".into())?;
    Ok(format!("100 DAGs agree ({composites} composites)"))
}

fn idempotence_and_round_trip() -> Outcome {
    let sets: [&[&str]; 3] = [
        &[bundled::CAMERA, bundled::DETECTOR, bundled::ENVIRONMENT],
        &[bundled::CAMERA, bundled::DETECTOR, bundled::ENVIRONMENT, bundled::SEARCH],
        &[bundled::CAMERA, bundled::DETECTOR, bundled::ENVIRONMENT_DIM, bundled::SEARCH],
    ];
    for (i, docs) in sets.iter().enumerate() {
        let mut kb = inferred(docs);
        let before = canonical(&kb, false);
        let again = infer_to_fixpoint(&mut kb).unwrap();
        ensure(again.stats.total_added() == 0, || format!("set {i}: second run added {:?}", again.stats))?;
        ensure(canonical(&kb, false) == before, || format!("set {i}: facts changed on second run"))?;
    }
    for (name, text) in bundled::SXDL_FILES {
        let mut original = new_kb();
        sxdl::load_str(text, &mut original).map_err(|e| format!("{name}: {e}"))?;
        let dumped = sxdl::dump(&original);
        let mut reloaded = new_kb();
        sxdl::load_str(&dumped, &mut reloaded).map_err(|e| format!("{name} dump: {e}"))?;
        ensure(canonical(&original, true) == canonical(&reloaded, true), || {
            format!("{name}: asserted facts differ after round trip")
        })?;
        ensure(original.instance_count() == reloaded.instance_count(), || format!("{name}: instance count"))?;
        ensure(original.link_count() == reloaded.link_count(), || format!("{name}: link count"))?;
    }
    Ok(format!("3 KBs idempotent, {} files round-trip", bundled::SXDL_FILES.len()))
}

fn bundled_maps() -> (SomMap, SomMap) {
    let config = SomConfig::default();
    let visual = train_behavior(&parse_log(bundled::VISUAL_EXPERIENCE).unwrap(), VISUAL, config.clone()).unwrap();
    let acoustic = train_behavior(&parse_log(bundled::ACOUSTIC_EXPERIENCE).unwrap(), SPEECH, config).unwrap();
    (visual, acoustic)
}

fn behavior_selection() -> Outcome {
    let kb = inferred(&[bundled::CAMERA, bundled::DETECTOR, bundled::ENVIRONMENT, bundled::SEARCH]);
    let conditions = Conditions::parse_sxdl(bundled::CONDITIONS_DEGRADED).unwrap();
    ensure(conditions.get("Visibility") == Some(0.5), || "conditions lack visibility 0.5".into())?;
    let (visual, acoustic) = bundled_maps();
    let mut trained = Predictors::new();
    trained.insert(VISUAL, visual).insert(SPEECH, acoustic);
    let mut stubs = Predictors::new();
    stubs.insert(VISUAL, ConstantPredictor(0.3)).insert(SPEECH, ConstantPredictor(0.6));
    for (kind, predictors) in [("trained maps", &trained), ("stubs", &stubs)] {
        let chosen = select_behavior(&kb, &conditions, predictors, None).unwrap();
        ensure(chosen.as_deref() == Some(SPEECH), || format!("{kind}: selected {chosen:?}"))?;
        let cam = can_i_do_it(&kb, VISUAL, 0.5, &conditions, predictors.get(VISUAL)).unwrap();
        let speech = can_i_do_it(&kb, SPEECH, 0.5, &conditions, predictors.get(SPEECH)).unwrap();
        ensure(!cam.yes && cam.result.feasible, || format!("{kind}: camera answer {cam:?}"))?;
        ensure(speech.yes, || format!("{kind}: speech answer {speech:?}"))?;
        let close = |p: Option<f64>, want: f64| p.is_some_and(|p| (p - want).abs() < 1e-9);
        ensure(close(cam.result.p_success, 0.3), || format!("{kind}: camera p {:?}", cam.result.p_success))?;
        ensure(close(speech.result.p_success, 0.6), || format!("{kind}: speech p {:?}", speech.result.p_success))?;
    }
    Ok("speech selected; camera no (0.30), speech yes (0.60)".into())
}

/// Two square clusters of unit standard deviation per axis (uniform on
/// ±√3), centers 5 apart; outcomes false then true.
fn two_clusters(seed: u64, per_cluster: usize) -> Vec<(Vec<f64>, bool)> {
    let rng = &mut ChaCha8Rng::seed_from_u64(seed);
    let half = 3f64.sqrt();
    let mut out = Vec::new();
    for (center, outcome) in [(0.0, false), (5.0, true)] {
        for _ in 0..per_cluster {
            let x = center + rng.gen_range(-half..half);
            out.push((vec![x, rng.gen_range(-half..half)], outcome));
        }
    }
    out
}

fn som_separability() -> Outcome {
    let start = Instant::now();
    let names = vec!["x".to_string(), "y".to_string()];
    let train = two_clusters(1, 100);
    let config = SomConfig { seed: 42, ..SomConfig::default() };
    let rate = |samples: &[(Vec<f64>, bool)], outcome: bool| {
        let cluster: Vec<_> = samples.iter().filter(|s| s.1 == outcome).collect();
        cluster.iter().filter(|s| s.1).count() as f64 / cluster.len() as f64
    };
    let map = train_som(names.clone(), &train, config.clone()).map_err(|e| e.to_string())?;
    let held_out = two_clusters(2, 20);
    let mut worst: f64 = 0.0;
    for (x, outcome) in &held_out {
        let p = map.predict(x).map_err(|e| e.to_string())?.p_success;
        worst = worst.max((p - rate(&train, *outcome)).abs());
    }
    ensure(worst <= 0.1, || format!("worst held-out error {worst}"))?;
    let again = train_som(names, &train, config).map_err(|e| e.to_string())?;
    ensure(map.to_text() == again.to_text(), || "same seed, different maps".into())?;
    let reparsed = SomMap::from_text(&map.to_text()).map_err(|e| e.to_string())?;
    ensure(reparsed.to_text() == map.to_text(), || "serialization does not round-trip".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 5.0, || format!("took {elapsed:?}"))?;
    Ok(format!("worst held-out error {worst:.3}, deterministic, {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

fn metric_exactness() -> Outcome {
    let v = visual_position_inaccuracy(0.25, 4.0).map_err(|e| e.to_string())?;
    let a = acoustic_position_inaccuracy(6.0, 8.0).map_err(|e| e.to_string())?;
    ensure((v - 2.25).abs() <= 1e-12, || format!("visual {v}"))?;
    ensure((a - 5.0).abs() <= 1e-12, || format!("acoustic {a}"))?;
    Ok(format!("visual {v}, acoustic {a}"))
}

fn outcome_conservation() -> Outcome {
    let (visual, acoustic) = bundled_maps();
    let mut checked = vec![
        (visual, parse_log(bundled::VISUAL_EXPERIENCE).unwrap().iter().filter(|r| r.outcome).count()),
        (acoustic, parse_log(bundled::ACOUSTIC_EXPERIENCE).unwrap().iter().filter(|r| r.outcome).count()),
    ];
    let train = two_clusters(3, 100);
    let map = train_som(vec!["x".into(), "y".into()], &train, SomConfig::default()).unwrap();
    checked.push((map, train.iter().filter(|s| s.1).count()));
    for (i, (map, trues)) in checked.iter().enumerate() {
        let total: f64 = map
            .nodes
            .iter()
            .map(|n| n.member_count as f64 * n.outcome_mean.unwrap_or(0.0))
            .sum();
        ensure((total - *trues as f64).abs() <= 1e-9, || format!("map {i}: {total} vs {trues}"))?;
    }
    Ok(format!("{} maps conserve their true outcomes", checked.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("scenario fidelity", scenario_fidelity),
        ("environmental gating", environmental_gating),
        ("realizing oracle equivalence", realizing_oracle),
        ("transitivity oracle equivalence", transitivity_oracle),
        ("idempotence and round trip", idempotence_and_round_trip),
        ("behavior selection", behavior_selection),
        ("SOM separability", som_separability),
        ("metric exactness", metric_exactness),
        ("outcome conservation", outcome_conservation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
