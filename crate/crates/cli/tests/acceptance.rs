//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Run with
//! `cargo test -p photocensus-cli --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use photocensus::census::{chapman, feasibility_search, lincoln_petersen, CensusInput, Estimator};
use photocensus::matching::{cluster_individuals, detect_conflicts, Annotation, MatchGraph, Verdict};
use photocensus::sim::{
    evaluate_end_to_end, evaluate_estimator, generate_population, BiasLayerConfig, MatchingOptions, Region,
    SamplingProcess,
};
use photocensus_server::{
    router, snap, AppState, Caller, LocationPolicies, Role, SensitivePolicy, ServerConfig, Store, TokenTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn estimator_arithmetic() -> Outcome {
    let lp = |n, big_k, k| lincoln_petersen(CensusInput::new(n, big_k, k).unwrap()).unwrap().n_est;
    ensure(lp(100, 50, 25) == 200.0, || format!("LP(100,50,25) = {}", lp(100, 50, 25)))?;
    for n in [1u64, 10, 1000] {
        ensure(lp(n, n, n) == n as f64, || format!("LP({n},{n},{n}) = {}", lp(n, n, n)))?;
        let var = chapman(CensusInput::new(n, n, n).unwrap()).variance;
        ensure(var == Some(0.0), || format!("Chapman({n},{n},{n}) variance {var:?}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=5000u64);
        let big_k = rng.random_range(1..=5000u64);
        let k = rng.random_range(1..=n.min(big_k));
        let input = CensusInput::new(n, big_k, k).unwrap();
        let (c, l) = (chapman(input).n_est, lincoln_petersen(input).unwrap().n_est);
        ensure(c <= l * (1.0 + 1e-9), || format!("Chapman {c} > LP {l} at ({n},{big_k},{k})"))?;
    }
    Ok("exact LP identities; Chapman <= LP on 10,000 random inputs".into())
}

fn published_census_feasibility() -> Outcome {
    // (individuals, published estimate, expected occasion counts)
    let rows =
        [(103u64, 119.0, (81u64, 69u64, 47u64)), (1258, 2307.0, (784, 718, 244)), (1942, 2250.0, (1762, 830, 650))];
    let mut found = Vec::new();
    for (individuals, published, expected) in rows {
        let hits = feasibility_search(individuals, published, 1.0);
        let t = hits
            .iter()
            .find(|t| (t.n, t.big_k, t.k) == expected)
            .ok_or_else(|| format!("({individuals}, {published}) has no {expected:?} among {} triples", hits.len()))?;
        let lp = lincoln_petersen(CensusInput::new(t.n, t.big_k, t.k).unwrap()).unwrap().n_est;
        ensure((lp - published).abs() <= 1.0, || format!("{expected:?} re-evaluates to {lp}"))?;
        ensure(t.n + t.big_k - t.k == individuals, || {
            format!("{expected:?} covers {} individuals", t.n + t.big_k - t.k)
        })?;
        for h in &hits {
            let lp = lincoln_petersen(CensusInput::new(h.n, h.big_k, h.k).unwrap()).unwrap().n_est;
            ensure((lp - published).abs() <= 1.0 && h.n + h.big_k - h.k == individuals, || {
                format!("search returned infeasible {h:?}")
            })?;
        }
        found.push(format!("{individuals}->{}:{}/{}/{}", published, t.n, t.big_k, t.k));
    }
    Ok(found.join(", "))
}

fn base_process() -> SamplingProcess {
    SamplingProcess { capture_prob: 0.3, occasions: 2, ..Default::default() }
}

fn statistical_correctness() -> Outcome {
    let pop = generate_population(500, 64, &Region::default(), 0).map_err(|e| e.to_string())?;
    let r = evaluate_estimator(&pop, &base_process(), None, Estimator::Chapman, 1000, 0).map_err(|e| e.to_string())?;
    let coverage = r.ci_coverage.unwrap_or(f64::NAN);
    let detail = format!("bias {:.3}, rmse {:.3}, coverage {:.3}", r.bias, r.rmse, coverage);
    ensure(r.bias.abs() <= 10.0 && (0.92..=0.98).contains(&coverage), || detail.clone())?;
    Ok(detail)
}

fn thinning_consistency() -> Outcome {
    let pop = generate_population(500, 64, &Region::default(), 0).map_err(|e| e.to_string())?;
    let plain =
        evaluate_estimator(&pop, &base_process(), None, Estimator::Chapman, 1000, 0).map_err(|e| e.to_string())?;
    let layers = BiasLayerConfig { sharing_prob: 0.5, ..Default::default() };
    let thinned = evaluate_estimator(&pop, &base_process(), Some(&layers), Estimator::Chapman, 1000, 0)
        .map_err(|e| e.to_string())?;
    let detail = format!(
        "thinned bias {:.3} ({:.2}%), rmse {:.3} vs unthinned {:.3}",
        thinned.bias,
        100.0 * thinned.bias.abs() / 500.0,
        thinned.rmse,
        plain.rmse
    );
    ensure(thinned.bias.abs() <= 0.03 * 500.0 && thinned.rmse > plain.rmse, || detail.clone())?;
    Ok(detail)
}

/// Reflexive transitive closure of the live "same" verdicts.
fn closure(n: usize, live: &BTreeMap<(usize, usize), Verdict>) -> Vec<Vec<bool>> {
    let mut r: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    for (&(x, y), &v) in live {
        if v == Verdict::Same {
            r[x][y] = true;
            r[y][x] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
            }
        }
    }
    r
}

fn clustering_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut conflicted = 0;
    for case in 0..1000 {
        let n = rng.random_range(1..=8usize);
        let ids: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        let anns: Vec<Annotation> = ids
            .iter()
            .map(|id| Annotation {
                annotation_id: id.clone(),
                photo_id: id.clone(),
                species: "s".into(),
                embedding: vec![1.0],
                quality: 1.0,
                occasion: None,
            })
            .collect();
        let mut graph = MatchGraph::new(&anns);
        let mut live = BTreeMap::new();
        let edges = if n < 2 { 0 } else { rng.random_range(0..=3 * n) };
        for t in 0..edges {
            let x = rng.random_range(0..n);
            let y = (x + rng.random_range(1..n)) % n;
            let v = if rng.random_bool(0.6) { Verdict::Same } else { Verdict::Different };
            let at = chrono::DateTime::UNIX_EPOCH + chrono::TimeDelta::seconds(t as i64);
            graph.apply_decision(&ids[x], &ids[y], v, "r", at).map_err(|e| e.to_string())?;
            live.insert((x.min(y), x.max(y)), v);
        }
        let r = closure(n, &live);
        let oracle: BTreeMap<String, String> = (0..n)
            .map(|i| (ids[i].clone(), (0..n).filter(|&j| r[i][j]).map(|j| ids[j].clone()).min().unwrap()))
            .collect();
        let partition = cluster_individuals(&graph);
        ensure(partition.assignment() == &oracle, || format!("case {case}: partition differs from closure"))?;
        let separated = live.iter().all(|(&(x, y), &v)| v == Verdict::Same || !r[x][y]);
        let conflicts = detect_conflicts(&graph);
        ensure(conflicts.is_empty() == separated, || {
            format!("case {case}: conflicts {} vs separated {separated}", conflicts.len())
        })?;
        conflicted += !separated as usize;
    }
    Ok(format!("1000 cases, {conflicted} with conflicts"))
}

fn end_to_end() -> Outcome {
    let pop = generate_population(50, 64, &Region::default(), 0).map_err(|e| e.to_string())?;
    let process = SamplingProcess { capture_prob: 0.9, embedding_noise_sd: 0.05, occasions: 2, ..Default::default() };
    let matching = MatchingOptions { auto_accept: 0.8, ..Default::default() };
    let r =
        evaluate_end_to_end(&pop, &process, None, Estimator::Chapman, &matching, 20, 0).map_err(|e| e.to_string())?;
    let covered = (r.ci_coverage.unwrap_or(0.0) * (r.runs - r.failures) as f64).round() as usize;
    let detail =
        format!("{covered}/20 intervals contain 50 (mean estimate {:.2}, failures {})", r.mean_estimate, r.failures);
    ensure(r.failures == 0 && covered >= 18, || detail.clone())?;
    Ok(detail)
}

async fn get(state: &AppState, uri: &str) -> (StatusCode, Value) {
    let req = Request::get(uri).header("authorization", "Bearer p").body(Body::empty()).unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn collect_coords(v: &Value, out: &mut Vec<(f64, f64)>) {
    match v {
        Value::Object(map) => {
            if let (Some(lat), Some(lon)) =
                (map.get("lat").and_then(Value::as_f64), map.get("lon").and_then(Value::as_f64))
            {
                out.push((lat, lon));
            }
            map.values().for_each(|x| collect_coords(x, out));
        }
        Value::Array(xs) => xs.iter().for_each(|x| collect_coords(x, out)),
        _ => {}
    }
}

fn location_protection() -> Outcome {
    let grid = 0.1;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = ServerConfig { data_dir: dir.path().to_owned(), embedding_dim: 2, ..Default::default() };
    let mut tokens = TokenTable::default();
    tokens.insert("p", Caller { name: "visitor".into(), role: Role::Public });
    tokens.insert("a", Caller { name: "admin".into(), role: Role::Admin });
    let policies =
        LocationPolicies::new([SensitivePolicy { grid_degrees: grid, ..SensitivePolicy::new("grevys_zebra") }])
            .map_err(|e| e.to_string())?;
    let state = AppState::new(Store::open(&config).map_err(|e| e.to_string())?, tokens, policies);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let photos = 200;
    let body: String = (0..photos)
        .map(|i| {
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            json!({
                "photo_id": format!("s{i:03}"),
                "camera_id": "c",
                "timestamp": format!("2016-01-{:02}T10:00:00Z", 30 + i % 2),
                "lat": rng.random_range(-90.0..=90.0),
                "lon": rng.random_range(-180.0..=180.0),
                "species": "grevys_zebra",
                "annotations": [{"bbox": [0, 0, 1, 1], "embedding": [angle.cos(), angle.sin()], "quality": 1.0}]
            })
            .to_string()
                + "\n"
        })
        .collect();
    let rt = tokio::runtime::Builder::new_current_thread().build().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let req = Request::post("/encounters").header("authorization", "Bearer a").body(Body::from(body)).unwrap();
        let status = router(state.clone()).oneshot(req).await.unwrap().status();
        ensure(status == StatusCode::CREATED, || format!("ingest returned {status}"))?;
        let mut checked = 0usize;
        for i in 0..1000 {
            let uri = if i % 10 == 0 {
                "/individuals?species=grevys_zebra".to_owned()
            } else {
                format!("/individuals/s{:03}%230", rng.random_range(0..photos))
            };
            let (status, v) = get(&state, &uri).await;
            ensure(status == StatusCode::OK, || format!("{uri} returned {status}"))?;
            let mut coords = Vec::new();
            collect_coords(&v, &mut coords);
            ensure(!coords.is_empty(), || format!("{uri} returned no coordinates"))?;
            for (lat, lon) in coords {
                ensure(
                    lat.to_bits() == snap(lat, grid).to_bits() && lon.to_bits() == snap(lon, grid).to_bits(),
                    || format!("{uri}: ({lat}, {lon}) is off the {grid} grid"),
                )?;
                checked += 1;
            }
        }
        Ok(format!("1000 public requests, {checked} coordinates on the {grid} grid"))
    })
}

fn cli(args: &[&str]) -> Result<String, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = photocensus_cli::run(std::iter::once("photocensus").chain(args.iter().copied()), &mut out, &mut err);
    ensure(code == 0, || format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)))?;
    Ok(String::from_utf8(out).unwrap())
}

fn partition_from_journals(dir: &Path) -> Result<String, String> {
    let text = std::fs::read_to_string(dir.join("dataset.pcjl")).map_err(|e| e.to_string())?;
    let (ds, _) = photocensus::Dataset::read_pcjl(text.as_bytes()).map_err(|e| e.to_string())?;
    let mut g = MatchGraph::new(&ds.annotations());
    let log = photocensus::journal::read_decision_file(&dir.join("decisions.jsonl")).map_err(|e| e.to_string())?;
    photocensus::journal::replay_decisions(&mut g, log).map_err(|e| e.to_string())?;
    serde_json::to_string(&cluster_individuals(&g)).map_err(|e| e.to_string())
}

fn replay_determinism() -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().to_str().unwrap();
    let f = |name: &str| fixtures.join(name).display().to_string();
    cli(&["--data-dir", data, "ingest", &f("five_four_two.pcjl")])?;
    cli(&["--data-dir", data, "review", "--decisions", &f("five_four_two.decisions.jsonl")])?;
    cli(&["--data-dir", data, "review", "--decisions", &f("conflicting.decisions.jsonl")])?;
    let census = |est: &str| cli(&["--data-dir", data, "census", "--estimator", est]);
    let first = (partition_from_journals(dir.path())?, census("chapman")?, census("lincoln-petersen")?);

    // a second directory built from the first one's journals only
    let copy = tempfile::tempdir().map_err(|e| e.to_string())?;
    let journal = dir.path().join("decisions.jsonl");
    cli(&["--data-dir", copy.path().to_str().unwrap(), "ingest", dir.path().join("dataset.pcjl").to_str().unwrap()])?;
    cli(&["--data-dir", copy.path().to_str().unwrap(), "review", "--decisions", journal.to_str().unwrap()])?;
    let copy_data = copy.path().to_str().unwrap();
    let second = (
        partition_from_journals(copy.path())?,
        cli(&["--data-dir", copy_data, "census", "--estimator", "chapman"])?,
        cli(&["--data-dir", copy_data, "census", "--estimator", "lincoln-petersen"])?,
    );
    ensure(first.0 == second.0, || "partitions differ".into())?;
    ensure(first.1.as_bytes() == second.1.as_bytes() && first.2.as_bytes() == second.2.as_bytes(), || {
        format!("census CSV differs:\n{}\n{}", first.1, second.1)
    })?;
    let log_a = std::fs::read(&journal).map_err(|e| e.to_string())?;
    let log_b = std::fs::read(copy.path().join("decisions.jsonl")).map_err(|e| e.to_string())?;
    ensure(log_a == log_b, || "decision logs differ".into())?;
    Ok(format!("partition and census CSV identical ({} bytes)", first.1.len() + first.2.len()))
}

fn main() {
    let criteria = [
        Criterion { name: "estimator arithmetic", budget: Duration::from_secs(1), check: estimator_arithmetic },
        Criterion {
            name: "published census feasibility",
            budget: Duration::from_secs(10),
            check: published_census_feasibility,
        },
        Criterion { name: "statistical correctness", budget: Duration::from_secs(60), check: statistical_correctness },
        Criterion {
            name: "uniform-thinning consistency",
            budget: Duration::from_secs(120),
            check: thinning_consistency,
        },
        Criterion { name: "clustering oracle equivalence", budget: Duration::from_secs(10), check: clustering_oracle },
        Criterion { name: "end-to-end pipeline", budget: Duration::from_secs(60), check: end_to_end },
        Criterion { name: "location protection", budget: Duration::from_secs(5), check: location_protection },
        Criterion { name: "replay determinism", budget: Duration::MAX, check: replay_determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; over the {:?} budget", c.budget)),
            other => other,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += outcome.is_err() as usize;
        println!("{status}  {:<30} {detail} [{:.2}s]", c.name, elapsed.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
