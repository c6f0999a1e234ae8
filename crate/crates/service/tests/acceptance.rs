//! The library acceptance suite replayed through the HTTP API, with every
//! image generated by a fake remote backend speaking the wire protocol.
//! Prints one PASS/FAIL line per criterion and exits nonzero on failure.

mod common;
#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::{BTreeSet, HashSet};
use std::process::ExitCode;
use std::sync::atomic::Ordering;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use common::{fake_llm, fake_remote, monotone, remote_config, Client};
use disco_core::audio::{decode_wav, encode_wav_16bit};
use disco_core::genbackend::{ImageBackend, ImageFrame, MockBackend, RemoteBackend, DEFAULT_MAX_IN_FLIGHT};
use disco_core::prompting::HttpLlmClient;
use disco_core::timeline::{load_project, save_project, ImageSpec};
use disco_core::AudioClip;
use disco_service::fake_backend::FakeBackendControl;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use support::{click_train, clip, mix, oracle, sine, three_interval_project, timeline_fuzz};

type Outcome = Result<String, String>;

const RATE: u32 = 8000;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_sec: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(limit_sec), || {
        format!("took {:.1}s, limit {limit_sec}s", elapsed.as_secs_f64())
    })
}

/// Shared fixtures: one fake backend, and every job trace observed.
struct Rig {
    backend_url: String,
    control: Arc<FakeBackendControl>,
    traces: Mutex<Vec<Vec<String>>>,
}

impl Rig {
    fn service(&self) -> Client {
        Client::start(remote_config(&self.backend_url))
    }

    fn run_job(&self, c: &Client, reply: common::Reply) -> Result<Value, String> {
        if reply.status != 202 {
            return Err(format!("job submission answered {}: {}", reply.status, String::from_utf8_lossy(&reply.body)));
        }
        let (job, seen) = c.wait_job(reply.json()["job_id"].as_u64().ok_or("no job id")?);
        self.traces.lock().unwrap().push(seen);
        match job["status"].as_str() {
            Some("done") => Ok(job["result"].clone()),
            _ => Err(format!("job failed: {}", job["error"])),
        }
    }
}

fn ok_json(reply: common::Reply, what: &str) -> Result<Value, String> {
    if (200..300).contains(&reply.status) {
        Ok(reply.json())
    } else {
        Err(format!("{what} answered {}: {}", reply.status, String::from_utf8_lossy(&reply.body)))
    }
}

/// What the server holds after a 16-bit WAV round trip.
fn as_uploaded(c: &AudioClip) -> AudioClip {
    decode_wav(&encode_wav_16bit(c)).unwrap()
}

fn weights(schedule: &Value) -> Result<Vec<f64>, String> {
    schedule["weights"]
        .as_array()
        .ok_or("schedule has no weights")?
        .iter()
        .map(|w| w.as_f64().ok_or_else(|| "non-numeric weight".to_string()))
        .collect()
}

fn whole_clip_schedule(c: &Client, audio: &AudioClip) -> Result<Vec<f64>, String> {
    let info = ok_json(c.upload(audio), "upload")?;
    let dur = info["duration_sec"].as_f64().ok_or("no duration")?;
    let iv = ok_json(c.post("/intervals", json!({"begin_sec": 0.0, "end_sec": dur})), "add interval")?;
    weights(&ok_json(c.get(&format!("/intervals/{}/schedule", iv["id"])), "schedule")?)
}

fn random_clip(rng: &mut ChaCha8Rng, kind: usize) -> AudioClip {
    let seconds = rng.random_range(0.25..3.0);
    let n = (seconds * RATE as f64) as usize;
    let clicks = |rng: &mut ChaCha8Rng| {
        let positions: Vec<usize> = (0..rng.random_range(1..12)).map(|_| rng.random_range(0..n)).collect();
        click_train(n, &positions, rng.random_range(0.1..1.0))
    };
    let tone = |rng: &mut ChaCha8Rng| {
        let mut s = sine(rng.random_range(60.0..3000.0), rng.random_range(0.05..0.8), seconds, RATE);
        s.resize(n, 0.0);
        s
    };
    let samples = match kind {
        0 => vec![0.0; n],
        1 => tone(rng),
        2 => clicks(rng),
        _ => {
            let (a, b) = (tone(rng), clicks(rng));
            mix(&a, &b)
        }
    };
    clip(samples, RATE)
}

fn energy_curve_contract(rig: &Rig) -> Outcome {
    let started = Instant::now();
    let c = rig.service();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for i in 0..200 {
        let audio = random_clip(&mut rng, i % 4);
        let expected_len = ((audio.duration_sec() * 24.0).round() as usize).max(2);
        let w = whole_clip_schedule(&c, &audio).map_err(|e| format!("clip {i}: {e}"))?;
        let n = w.len();
        ensure(n == expected_len, || format!("clip {i}: length {n} != {expected_len}"))?;
        ensure(w[0].abs() <= 1e-6 && (w[n - 1] - 1.0).abs() <= 1e-6, || format!("clip {i}: endpoints {} {}", w[0], w[n - 1]))?;
        ensure(w.windows(2).all(|p| p[0] <= p[1]), || format!("clip {i}: not monotone"))?;
    }
    within(started.elapsed(), 30)?;
    Ok(format!("200 clips in {:.2}s", started.elapsed().as_secs_f64()))
}

fn percussive_over_http(c: &Client, samples: Vec<f32>) -> Result<(f64, f64), String> {
    let audio = clip(samples, RATE);
    ok_json(c.upload(&audio), "upload")?;
    let ours = ok_json(c.get("/percussive"), "percussive")?["percussive_fraction"]
        .as_f64()
        .ok_or("no fraction")?;
    let reference = oracle::percussive_fraction(as_uploaded(&audio).samples(), &oracle::Params::default());
    Ok((ours, reference))
}

fn hpss_oracle(rig: &Rig) -> Outcome {
    let started = Instant::now();
    let c = rig.service();
    let (tone_ours, tone_ref) = percussive_over_http(&c, sine(440.0, 0.5, 2.0, RATE))?;
    let (click_ours, click_ref) = percussive_over_http(&c, click_train(2 * RATE as usize, &[RATE as usize], 0.9))?;
    ensure(tone_ours <= 0.2, || format!("sine percussive fraction {tone_ours:.3} > 0.2"))?;
    ensure(click_ours >= 0.8, || format!("click percussive fraction {click_ours:.3} < 0.8"))?;
    ensure((tone_ours - tone_ref).abs() <= 0.05, || format!("sine {tone_ours:.3} vs reference {tone_ref:.3}"))?;
    ensure((click_ours - click_ref).abs() <= 0.05, || format!("click {click_ours:.3} vs reference {click_ref:.3}"))?;
    within(started.elapsed(), 60)?;
    Ok(format!(
        "sine {tone_ours:.3} (ref {tone_ref:.3}), click {click_ours:.3} (ref {click_ref:.3}) in {:.2}s",
        started.elapsed().as_secs_f64()
    ))
}

fn audioreactive_pacing(rig: &Rig) -> Outcome {
    let c = rig.service();
    let n = 2 * RATE as usize;
    let mut crossings = Vec::new();
    for front in [true, false] {
        let positions: Vec<usize> = (0..8).map(|k| if front { 300 + k * 800 } else { n - 300 - k * 800 }).collect();
        let w = whole_clip_schedule(&c, &clip(click_train(n, &positions, 0.9), RATE))?;
        let at = w.iter().position(|&v| v >= 0.5).ok_or("curve never crosses 0.5")?;
        let mid = w.len() as f64 / 2.0;
        if front {
            ensure((at as f64) < mid, || format!("front-loaded crossed at {at} of {}", w.len()))?;
        } else {
            ensure((at as f64) > mid, || format!("back-loaded crossed at {at} of {}", w.len()))?;
        }
        crossings.push(format!("{at}/{}", w.len()));
    }
    Ok(format!("front crosses at {}, back at {}", crossings[0], crossings[1]))
}

fn artifact(c: &Client, digest: &Value) -> Result<ImageFrame, String> {
    let reply = c.get(&format!("/artifacts/{}", digest.as_str().ok_or("non-string ref")?));
    ensure(reply.status == 200, || format!("artifact {digest} answered {}", reply.status))?;
    ImageFrame::from_png(&reply.body).map_err(|e| e.to_string())
}

fn preview_ref(rig: &Rig, c: &Client, spec: &ImageSpec) -> Result<Value, String> {
    let reply = c.post("/preview", json!({"prompt": spec.prompt, "seed": spec.seed}));
    let result = rig.run_job(c, reply)?;
    Ok(result["images"][0]["image_ref"].clone())
}

fn render_determinism(rig: &Rig) -> Outcome {
    let mut digests = Vec::new();
    for _ in 0..2 {
        let c = rig.service();
        let (project, audio) = three_interval_project(32);
        ok_json(c.upload(&audio), "upload")?;
        ok_json(c.put_bytes("/project", &save_project(&project)), "load project")?;
        let mut counts = Vec::new();
        for iv in project.intervals() {
            let result = rig.run_job(&c, c.post(&format!("/intervals/{}/render", iv.id), json!({})))?;
            let refs = result["frame_refs"].as_array().ok_or("no frame refs")?;
            counts.push(refs.len());
            let (s, e) = iv.seeded_endpoints().ok_or("unseeded fixture")?;
            // Same digest as a standalone generation, and the same pixels
            // as the procedural reference.
            ensure(refs[0] == preview_ref(rig, &c, s)? && *refs.last().unwrap() == preview_ref(rig, &c, e)?, || {
                format!("interval {} endpoint frames differ from generations", iv.id)
            })?;
            let first = artifact(&c, &refs[0])?;
            let last = artifact(&c, refs.last().unwrap())?;
            let (gs, ge) = (MockBackend.generate(s).map_err(|e| e.to_string())?, MockBackend.generate(e).map_err(|e| e.to_string())?);
            ensure(first == gs && last == ge, || format!("interval {} endpoints differ from the reference", iv.id))?;
        }
        ensure(counts == [12, 24, 60], || format!("durations 0.5, 1.0, 2.5 gave {counts:?}"))?;
        let stitched = rig.run_job(&c, c.post("/stitch", json!({})))?;
        ensure(stitched["frame_count"] == 96, || format!("stitched {} frames, expected 96", stitched["frame_count"]))?;
        let frames = stitched["manifest"]["frames"].as_array().ok_or("no manifest frames")?;
        digests.push(frames.iter().map(|f| f["sha256"].clone()).collect::<Vec<_>>());
    }
    ensure(digests[0] == digests[1], || "PNG digests differ between runs".into())?;
    Ok("12+24+60 = 96 frames, endpoints bitwise equal, digests identical across runs".into())
}

fn phrase_multiset(prompt: &str) -> Vec<String> {
    let mut v: Vec<String> = prompt.split(',').map(|p| p.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()).collect();
    v.sort();
    v
}

fn prompting_rules(rig: &Rig) -> Outcome {
    let (llm_url, sent) = fake_llm();
    let mut config = remote_config(&rig.backend_url);
    config.llm = Arc::new(HttpLlmClient::new(llm_url, None, "test-model", Duration::from_secs(10)));
    let c = Client::start(config);

    let prompt = "Robot DJs, neon dance floor, glitch";
    let vars = ok_json(c.post("/variations", json!({"prompt": prompt, "seed": 4242})), "variations")?;
    let images = vars["images"].as_array().ok_or("no images")?;
    ensure(images.len() == 3, || format!("{} variations", images.len()))?;
    for img in images {
        let p = img["spec"]["prompt"].as_str().ok_or("no prompt")?;
        ensure(phrase_multiset(p) == phrase_multiset(prompt), || format!("{p:?} changed phrases"))?;
        ensure(img["spec"]["seed"] == 4242, || format!("{p:?} changed seed"))?;
    }

    let preview = rig.run_job(&c, c.post("/preview", json!({"prompt": "sunset beach"})))?;
    let previews = preview["images"].as_array().ok_or("no images")?;
    let seeds: HashSet<u64> = previews.iter().filter_map(|i| i["spec"]["seed"].as_u64()).collect();
    ensure(previews.len() == 3 && seeds.len() == 3, || format!("{} previews, {} distinct seeds", previews.len(), seeds.len()))?;

    ok_json(c.post("/brainstorm", json!({"description": "dancing at the disco"})), "brainstorm")?;
    let sent: Vec<Value> = sent.lock().unwrap().iter().map(|b| b["prompt"].clone()).collect();
    let expected = "In less than 5 words, describe an image for the following words dancing at the disco.";
    ensure(sent == [json!(expected)], || format!("sent {sent:?}"))?;
    Ok("3 seed-constant variations, 3 distinct preview seeds, verbatim template".into())
}

fn classifier(rig: &Rig) -> Outcome {
    let c = rig.service();
    let corpus: Value = serde_json::from_str(include_str!("../../core/tests/data/labeled_corpus.json")).map_err(|e| e.to_string())?;
    let labeled = corpus.as_array().map_or(0, Vec::len);
    ensure(labeled >= 20, || format!("only {labeled} labeled pairs"))?;
    let report = ok_json(c.post("/classify/corpus", corpus), "classify corpus")?;
    let agreement = &report["report"]["agreement"];
    let fraction = agreement["fraction"].as_f64().ok_or("corpus carries no labels")?;
    ensure(fraction >= 0.95, || format!("agreement {fraction:.3}, disagreements {}", agreement["disagreements"]))?;

    let vocab = ["city", "red", "neon", "sunset", "glitch", "cat", "blue hour", "dancer", "watercolor", "beach"];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let phrases = |rng: &mut ChaCha8Rng| -> Vec<String> {
        (0..rng.random_range(1..4))
            .map(|_| (0..rng.random_range(1..3)).map(|_| vocab[rng.random_range(0..vocab.len())]).collect::<Vec<_>>().join(" "))
            .collect()
    };
    let ask = |a: &[String], sa: Option<u64>, b: &[String], sb: Option<u64>| {
        ok_json(
            c.post("/classify", json!({"start": {"prompt": a.join(", "), "seed": sa}, "end": {"prompt": b.join(", "), "seed": sb}})),
            "classify",
        )
    };
    for trial in 0..2000 {
        let (a, b) = (phrases(&mut rng), phrases(&mut rng));
        let (sa, sb) = (rng.random_bool(0.8).then(|| rng.random_range(0..3u64)), rng.random_bool(0.8).then(|| rng.random_range(0..3u64)));
        let verdict = ask(&a, sa, &b, sb)?;

        let (mut ma, mut mb) = (a.clone(), b.clone());
        ma.sort();
        mb.sort();
        let rule = if sa.is_some() && sa == sb {
            json!("same_seed")
        } else if ma == mb {
            json!("same_keywords")
        } else {
            Value::Null
        };
        let hold = verdict["kind"] == "hold";
        let found = verdict.get("hold_rule").cloned().unwrap_or(Value::Null);
        ensure(found == rule && hold == !rule.is_null(), || format!("trial {trial}: hold {found} vs rule {rule}"))?;

        let (mut ra, mut rb) = (a.clone(), b.clone());
        ra.reverse();
        rb.rotate_left(1);
        ensure(ask(&ra, sa, &rb, sb)? == verdict, || format!("trial {trial}: reordering changed the verdict"))?;
    }
    Ok(format!(
        "agreement {}/{} ({:.1}%), 2000 randomized hold/order checks",
        agreement["agreed"],
        agreement["labeled"],
        100.0 * fraction
    ))
}

fn well_formed(intervals: &Value) -> Result<(), String> {
    let spans: Vec<(f64, f64)> = intervals
        .as_array()
        .ok_or("interval list is not an array")?
        .iter()
        .map(|iv| (iv["begin_sec"].as_f64().unwrap_or(f64::NAN), iv["end_sec"].as_f64().unwrap_or(f64::NAN)))
        .collect();
    for &(b, e) in &spans {
        ensure(b < e, || format!("empty interval [{b}, {e})"))?;
    }
    for w in spans.windows(2) {
        ensure(w[0].0 <= w[1].0, || format!("unsorted: {} before {}", w[0].0, w[1].0))?;
        ensure(w[0].1 <= w[1].0, || format!("overlap: {:?} and {:?}", w[0], w[1]))?;
    }
    Ok(())
}

fn timeline_safety(rig: &Rig) -> Outcome {
    let c = rig.service();
    let duration = 60.0;
    ok_json(c.upload(&clip(vec![0.0; (duration * RATE as f64) as usize], RATE)), "upload")?;
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let time = |rng: &mut ChaCha8Rng| (rng.random_range(0.0..duration + 1.0) * 4.0).round() / 4.0;
    let mut ids: Vec<u64> = Vec::new();
    let mut accepted = 0;
    for op in 0..10_000 {
        let (a, b) = (time(&mut rng), time(&mut rng));
        let bounds = json!({"begin_sec": a.min(b), "end_sec": a.max(b)});
        let target = if ids.is_empty() || rng.random_bool(0.1) {
            rng.random_range(1..500)
        } else {
            ids[rng.random_range(0..ids.len())]
        };
        let reply = match rng.random_range(0..10) {
            0..=4 => c.post("/intervals", bounds),
            5..=7 => c.patch(&format!("/intervals/{target}"), bounds),
            _ => c.delete(&format!("/intervals/{target}")),
        };
        ensure(reply.status < 500, || format!("op {op}: server error {}", reply.status))?;
        accepted += (reply.status < 300) as usize;
        let list = c.get("/intervals").json();
        well_formed(&list).map_err(|e| format!("op {op}: {e}"))?;
        ids = list.as_array().unwrap().iter().filter_map(|iv| iv["id"].as_u64()).collect();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for i in 0..100 {
        let project = timeline_fuzz::random_project(&mut rng);
        let bytes = save_project(&project);
        ok_json(c.put_bytes("/project", &bytes), "load project").map_err(|e| format!("project {i}: {e}"))?;
        let back = c.get("/project").body;
        let loaded = load_project(&back).map_err(|e| format!("project {i}: {e}"))?;
        ensure(back == bytes && loaded == project, || format!("project {i} changed across PUT/GET"))?;
    }
    Ok(format!("10000 operations ({accepted} accepted) stayed sorted and disjoint; 100 projects round-tripped"))
}

fn service_conformance(rig: &Rig) -> Outcome {
    let remote = RemoteBackend::new(&rig.backend_url, Duration::from_secs(30), DEFAULT_MAX_IN_FLIGHT);
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let sizes = [(8, 8), (32, 16), (64, 64)];
    for trial in 0..20 {
        let (w, h) = sizes[trial % sizes.len()];
        let a = ImageSpec::new(format!("prompt {}", rng.random::<u32>()), Some(rng.random()), w, h).unwrap();
        let b = ImageSpec::new(format!("prompt {}", rng.random::<u32>()), Some(rng.random()), w, h).unwrap();
        let ga = remote.generate(&a).map_err(|e| e.to_string())?;
        let gb = remote.generate(&b).map_err(|e| e.to_string())?;
        let at0 = remote.interpolate(&a, &b, 0.0).map_err(|e| e.to_string())?;
        let at1 = remote.interpolate(&a, &b, 1.0).map_err(|e| e.to_string())?;
        ensure(at0 == ga && at1 == gb, || format!("trial {trial}: boundary frames differ from generations"))?;
        ensure(ga == MockBackend.generate(&a).map_err(|e| e.to_string())?, || format!("trial {trial}: remote differs from mock"))?;
    }

    // Rapid polling of overlapping jobs.
    let c = rig.service();
    let (project, audio) = three_interval_project(16);
    ok_json(c.upload(&audio), "upload")?;
    ok_json(c.put_bytes("/project", &save_project(&project)), "load project")?;
    let mut jobs: Vec<u64> = project
        .intervals()
        .iter()
        .map(|iv| Client::job_id(&c.post(&format!("/intervals/{}/render", iv.id), json!({}))))
        .collect();
    jobs.extend((0..4).map(|i| Client::job_id(&c.post("/preview", json!({"prompt": format!("lamp {i}")})))));
    let mut seen: Vec<Vec<String>> = vec![Vec::new(); jobs.len()];
    loop {
        let mut open = false;
        for (k, id) in jobs.iter().enumerate() {
            let status = c.get(&format!("/jobs/{id}")).json()["status"].as_str().unwrap_or("?").to_owned();
            if seen[k].last() != Some(&status) {
                seen[k].push(status.clone());
            }
            open |= status != "done" && status != "failed";
        }
        if !open {
            break;
        }
    }
    let mut traces = rig.traces.lock().unwrap();
    traces.extend(seen);
    let bad: Vec<_> = traces.iter().filter(|t| !monotone(t)).collect();
    ensure(bad.is_empty(), || format!("non-monotone job histories: {bad:?}"))?;
    let peak = rig.control.peak_in_flight.load(Ordering::SeqCst);
    ensure(peak <= DEFAULT_MAX_IN_FLIGHT, || format!("{peak} backend requests in flight"))?;
    let states: BTreeSet<&str> = traces.iter().flatten().map(String::as_str).collect();
    Ok(format!(
        "boundary identity on 20 pairs, {} job histories monotone (saw {states:?}), peak {peak} requests in flight, {} backend requests",
        traces.len(),
        rig.control.requests.load(Ordering::SeqCst)
    ))
}

fn main() -> ExitCode {
    let (backend_url, control) = fake_remote();
    let rig = Rig {
        backend_url,
        control,
        traces: Mutex::new(Vec::new()),
    };
    let criteria: [(&str, fn(&Rig) -> Outcome); 8] = [
        ("http energy-curve contract", energy_curve_contract),
        ("http hpss oracle", hpss_oracle),
        ("http audioreactive pacing", audioreactive_pacing),
        ("http render determinism", render_determinism),
        ("http prompting rules", prompting_rules),
        ("http classifier", classifier),
        ("http timeline safety", timeline_safety),
        ("service conformance", service_conformance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(&rig))) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
