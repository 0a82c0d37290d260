//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test -p hivewatch --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use hivewatch_core::geometry::{bee_size_mm, crossing, Crossing, DetectionBox, HiveGeometry, Midpoint};
use hivewatch_core::simulator::{generate, truth_summary, SimConfig};
use hivewatch_core::tracker::{match_detections, track_stream, FrameDetections, ProfileId, Tracker};
use hivewatch_core::summarize_video;
use hivewatch_telemetry::{downsample_hourly, year_bounds, HiveSample, HiveStore};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 0.0005;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Runs `hivewatch eval` and returns `(video, metric) -> value`.
fn eval_cli(flag: &str, file: &str) -> Result<BTreeMap<(String, String), f64>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hivewatch"))
        .args(["eval", flag])
        .arg(fixture(file))
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let mut map = BTreeMap::new();
    for line in text.lines().skip(1) {
        let parts: Vec<_> = line.split(',').collect();
        if let [video, metric, value] = parts[..] {
            let v: f64 = value.parse().map_err(|_| format!("bad value in {line:?}"))?;
            map.insert((video.to_string(), metric.to_string()), v);
        }
    }
    Ok(map)
}

fn check_values(
    got: &BTreeMap<(String, String), f64>,
    expected: &[(&str, &str, f64)],
) -> (bool, Vec<String>) {
    let mut ok = true;
    let mut notes = Vec::new();
    for &(video, metric, want) in expected {
        match got.get(&(video.to_string(), metric.to_string())) {
            Some(&v) if (v - want).abs() <= TOL => notes.push(format!("{video}/{metric}={v:.6}")),
            Some(&v) => {
                ok = false;
                notes.push(format!("{video}/{metric}={v:.6} want {want}"));
            }
            None => {
                ok = false;
                notes.push(format!("{video}/{metric} missing"));
            }
        }
    }
    (ok, notes)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let got = match eval_cli("--counts", "tracking_counts.csv") {
        Ok(g) => g,
        Err(e) => return outcome(false, e),
    };
    let elapsed = start.elapsed();
    let expected = [
        ("1", "accuracy", 1.0000),
        ("2", "accuracy", 0.9114),
        ("3", "accuracy", 0.9625),
        ("4", "accuracy", 0.9696),
        ("5", "accuracy", 0.9705),
        ("average", "accuracy", 0.9628),
    ];
    let (ok, notes) = check_values(&got, &expected);
    let fast = elapsed < Duration::from_secs(1);
    outcome(ok && fast, format!("{} in {elapsed:.2?}", notes.join(" ")))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let got = match eval_cli("--pollen", "pollen_counts.csv") {
        Ok(g) => g,
        Err(e) => return outcome(false, e),
    };
    let elapsed = start.elapsed();
    let expected = [
        ("1", "f1", 0.8444),
        ("2", "f1", 0.7428),
        ("3", "f1", 0.7059),
        ("4", "f1", 1.0000),
        ("5", "f1", 0.8667),
        ("average", "precision", 0.9032),
        ("average", "recall", 0.7823),
        ("average", "f1", 0.8319),
    ];
    let (ok, notes) = check_values(&got, &expected);
    let fast = elapsed < Duration::from_secs(1);
    outcome(ok && fast, format!("{} in {elapsed:.2?}", notes.join(" ")))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut bees = 0usize;
    for seed in 0..100u64 {
        let cfg = SimConfig::ideal(seed);
        let regime = cfg.jitter_px == 0.0
            && cfg.dropout_prob == 0.0
            && cfg.speed_px_per_frame.max < 25.0
            && cfg.min_separation_px.is_some_and(|s| s > 50.0);
        if !regime {
            return outcome(false, format!("seed {seed}: config outside the ideal regime"));
        }
        let sim = match generate(&cfg) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        bees += sim.truth.len();
        let profiles = match track_stream(cfg.geom, &sim.frames) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        let got = summarize_video(&profiles, &BTreeMap::new());
        let want = truth_summary(&sim.truth);
        let same = got.status_counts() == want.status_counts()
            && got.pollen_tracks == want.pollen_tracks
            && got.mite_tracks == want.mite_tracks;
        if !same {
            mismatches.push(seed);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches.is_empty() && elapsed < Duration::from_secs(30),
        format!(
            "100 seeds, {bees} bees, {} mismatches {:?} in {elapsed:.2?}",
            mismatches.len(),
            mismatches
        ),
    )
}

/// The four trigger rules written out as a table, evaluated in order.
fn reference_crossing(prev: i64, cur: i64) -> Option<Crossing> {
    const ARRIVE: i64 = 140;
    const LEAVE: i64 = 280;
    let rules: [(Crossing, bool); 4] = [
        // was below the arrive line, now on it or above
        (Crossing::ArriveCross, prev > ARRIVE && cur <= ARRIVE),
        // was on or above the arrive line, now below it
        (Crossing::DeckCrossFromArrive, prev <= ARRIVE && cur > ARRIVE),
        // was above the leave line, now on it or below
        (Crossing::LeaveCross, prev < LEAVE && cur >= LEAVE),
        // was below the leave line, now on it or above
        (Crossing::DeckCrossFromLeave, prev > LEAVE && cur <= LEAVE),
    ];
    rules.iter().find(|(_, hit)| *hit).map(|(c, _)| *c)
}

fn criterion_4() -> Outcome {
    let geom = HiveGeometry::default();
    let mut checked = 0u64;
    let mut disagreements = 0u64;
    let mut examples = Vec::new();
    let mut boundary = 0u64;
    for prev in 0..=420i64 {
        for cur in 0..=420i64 {
            checked += 1;
            if [140, 280].contains(&prev) || [140, 280].contains(&cur) {
                boundary += 1;
            }
            let got = crossing(prev as f64, cur as f64, &geom);
            let want = reference_crossing(prev, cur);
            if got != want {
                disagreements += 1;
                if examples.len() < 5 {
                    examples.push(format!("({prev},{cur}): {got:?} vs {want:?}"));
                }
            }
        }
    }
    outcome(
        disagreements == 0,
        format!(
            "{checked} pairs ({boundary} touching a line), {disagreements} disagreements {}",
            examples.join("; ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tol = 50.0;
    let mut assignments = 0usize;
    let mut too_far = 0usize;
    let mut order_dependent = 0usize;
    for _ in 0..1000 {
        let n_prev = rng.random_range(0..=30usize);
        let n_cur = rng.random_range(0..=30usize);
        let prev: Vec<(ProfileId, Midpoint)> = (0..n_prev)
            .map(|i| {
                (
                    i as ProfileId + 1,
                    Midpoint::new(rng.random_range(0.0..640.0), rng.random_range(0.0..420.0)),
                )
            })
            .collect();
        let cur: Vec<Midpoint> = (0..n_cur)
            .map(|_| Midpoint::new(rng.random_range(0.0..640.0), rng.random_range(0.0..420.0)))
            .collect();

        let m = match_detections(&prev, &cur, tol);
        let by_id: BTreeMap<ProfileId, Midpoint> = prev.iter().copied().collect();
        for &(id, ci) in &m.assignments {
            if by_id[&id].distance(&cur[ci]) > tol {
                too_far += 1;
            }
        }
        assignments += m.assignments.len();
        let canonical = |pairs: &[(ProfileId, usize)], cur: &[Midpoint]| -> BTreeSet<(ProfileId, u64, u64)> {
            pairs
                .iter()
                .map(|&(id, ci)| (id, cur[ci].x.to_bits(), cur[ci].y.to_bits()))
                .collect()
        };
        let base = canonical(&m.assignments, &cur);

        for _ in 0..3 {
            let mut p2 = prev.clone();
            let mut c2 = cur.clone();
            p2.shuffle(&mut rng);
            c2.shuffle(&mut rng);
            let m2 = match_detections(&p2, &c2, tol);
            if canonical(&m2.assignments, &c2) != base {
                order_dependent += 1;
            }
        }
    }
    outcome(
        too_far == 0 && order_dependent == 0,
        format!(
            "1000 frames, {assignments} assignments, {too_far} beyond 50 px, {order_dependent} order-dependent results"
        ),
    )
}

fn criterion_6() -> Outcome {
    let geom = HiveGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let x0 = rng.random_range(0.0..600.0);
        let y0 = rng.random_range(0.0..400.0);
        let w: f64 = rng.random_range(0.0..640.0 - x0);
        let h: f64 = rng.random_range(0.0..420.0 - y0);
        let b = DetectionBox::new(x0, y0, x0 + w, y0 + h, 0.9).expect("valid box");
        let (bw, bh) = (b.max_x - b.min_x, b.max_y - b.min_y);
        let direct = if bw >= bh {
            bw / (640.0 / 110.0)
        } else {
            bh / (420.0 / 65.0)
        };
        let got = bee_size_mm(&b, &geom).expect("valid");
        worst = worst.max((got - direct).abs());
    }

    let mut violations = 0usize;
    let mut sized = 0usize;
    for seed in 0..20u64 {
        let cfg = SimConfig {
            seed,
            jitter_px: 3.0,
            dropout_prob: 0.05,
            ..SimConfig::default()
        };
        let sim = generate(&cfg).expect("simulation");
        let mut tracker = Tracker::new(cfg.geom).expect("geometry");
        let mut seen: BTreeMap<ProfileId, f64> = BTreeMap::new();
        for frame in &sim.frames {
            tracker.step(frame).expect("step");
            for p in tracker.active() {
                if let Some(s) = p.size_mm {
                    let first = *seen.entry(p.id).or_insert(s);
                    if first.to_bits() != s.to_bits() {
                        violations += 1;
                    }
                }
            }
        }
        for p in tracker.finalize() {
            if let Some(s) = p.size_mm {
                sized += 1;
                let snap = p.snapshots.first().map(|sn| bee_size_mm(&sn.bbox, &cfg.geom).unwrap());
                if seen.get(&p.id).is_some_and(|f| f.to_bits() != s.to_bits())
                    || snap.map(|v| v.to_bits()) != Some(s.to_bits())
                {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-9 && violations == 0,
        format!("100000 boxes, max deviation {worst:.2e} mm; 20 runs, {sized} sized bees, {violations} write-once violations"),
    )
}

fn sample(ts: i64, i: u64) -> HiveSample {
    HiveSample {
        timestamp: ts,
        temperature_f: 55.0 + (i % 40) as f64,
        humidity_pct: (i % 101) as f64,
        cpu_temp_c: 45.0,
        gpu_temp_c: 44.0,
        bees_deck: i % 5,
        bees_leaving: i % 17,
        bees_arriving: i % 19,
        avg_size_mm: Some(12.0 + (i % 3) as f64),
        pollen_count: i % 4,
        mite_count: i % 2,
    }
}

fn criterion_7() -> Outcome {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return outcome(false, e.to_string()),
    };
    let (start, end) = year_bounds(2023).expect("2023");
    let series: Vec<_> = (start..end)
        .step_by(300)
        .enumerate()
        .map(|(i, t)| sample(t, i as u64))
        .collect();
    let run = || -> Result<(usize, usize, bool, bool), String> {
        let before;
        {
            let store = HiveStore::open(dir.path()).map_err(|e| e.to_string())?;
            for chunk in series.chunks(5_000) {
                store.append_batch("apiary", chunk).map_err(|e| e.to_string())?;
            }
            before = store.history("apiary", 2023).map_err(|e| e.to_string())?;
        }
        let store = HiveStore::open(dir.path()).map_err(|e| e.to_string())?;
        let after = store.history("apiary", 2023).map_err(|e| e.to_string())?;
        let round_trip = store.series("apiary").map_err(|e| e.to_string())? == series && after == before;
        let idempotent = downsample_hourly(&after) == after;
        Ok((series.len(), after.len(), idempotent, round_trip))
    };
    match run() {
        Ok((n, h, idem, rt)) => outcome(
            n == 105_120 && h == 8_760 && idem && rt,
            format!("{n} samples -> {h} hourly points, idempotent={idem}, restart round-trip={rt}"),
        ),
        Err(e) => outcome(false, e),
    }
}

fn criterion_8() -> Outcome {
    let cfg = SimConfig {
        seed: 8,
        fps: 10.0,
        duration_s: 300.0,
        n_bees: 1500,
        jitter_px: 2.0,
        dropout_prob: 0.02,
        ..SimConfig::default()
    };
    let mut sim = generate(&cfg).expect("simulation");
    for f in &mut sim.frames {
        f.boxes.truncate(30);
    }
    let frames: Vec<FrameDetections> = sim.frames;
    let peak = frames.iter().map(|f| f.boxes.len()).max().unwrap_or(0);
    let boxes: usize = frames.iter().map(|f| f.boxes.len()).sum();
    let start = Instant::now();
    let profiles = track_stream(cfg.geom, &frames).expect("tracking");
    let elapsed = start.elapsed();
    outcome(
        frames.len() == 3000 && peak <= 30 && elapsed < Duration::from_secs(5),
        format!(
            "{} frames, {boxes} boxes, peak {peak}/frame, {} profiles in {elapsed:.2?}",
            frames.len(),
            profiles.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("worked-example count accuracies", criterion_1),
        ("pollen precision/recall/F1", criterion_2),
        ("ideal-regime oracle equivalence", criterion_3),
        ("trigger semantics sweep", criterion_4),
        ("matching tolerance and order independence", criterion_5),
        ("size formula and write-once", criterion_6),
        ("telemetry downsampling and durability", criterion_7),
        ("3000-frame throughput", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
