use std::collections::BTreeMap;
use std::io::Cursor;

use hivewatch_core::eval::compare_runs;
use hivewatch_core::simulator::{generate, truth_summary, SimConfig};
use hivewatch_core::stream_io::{
    read_detection_stream, read_ground_truth, read_secondary, read_track_log,
    write_detection_stream, write_ground_truth, write_secondary, write_track_log,
    SecondaryClass, SecondaryDetection,
};
use hivewatch_core::{associate_secondary, summarize_video, track_stream, Thresholds};

#[test]
fn files_round_trip_through_the_pipeline() {
    let cfg = SimConfig::ideal(21);
    let sim = generate(&cfg).unwrap();

    let mut stream = Vec::new();
    write_detection_stream(&mut stream, &sim.frames).unwrap();
    let frames = read_detection_stream(Cursor::new(&stream)).unwrap();
    assert_eq!(frames, sim.frames);

    let mut truth_csv = Vec::new();
    write_ground_truth(&mut truth_csv, &sim.truth).unwrap();
    let truth = read_ground_truth(Cursor::new(&truth_csv)).unwrap();
    assert_eq!(truth, sim.truth);

    let profiles = track_stream(cfg.geom, &frames).unwrap();
    let mut log = Vec::new();
    write_track_log(&mut log, &profiles).unwrap();
    let reread = read_track_log(Cursor::new(&log)).unwrap();
    assert_eq!(reread, profiles);

    let report = compare_runs(&truth, &reread, &BTreeMap::new()).unwrap();
    assert_eq!(report.average_accuracy, Some(1.0));
    assert_eq!(
        summarize_video(&reread, &BTreeMap::new()).status_counts(),
        truth_summary(&truth).status_counts()
    );
}

#[test]
fn secondary_detections_flag_tracks() {
    let cfg = SimConfig::ideal(4);
    let sim = generate(&cfg).unwrap();
    let profiles = track_stream(cfg.geom, &sim.frames).unwrap();
    let with_snap: Vec<_> = profiles.iter().filter(|p| !p.snapshots.is_empty()).collect();
    assert!(with_snap.len() >= 2);

    let first = &with_snap[0].snapshots[0];
    let second = &with_snap[1].snapshots[0];
    let dets = vec![
        SecondaryDetection {
            profile_id: with_snap[0].id,
            frame_index: first.frame_index,
            class: SecondaryClass::Pollen,
            confidence: 0.9,
            bbox: first.bbox,
        },
        SecondaryDetection {
            profile_id: with_snap[1].id,
            frame_index: second.frame_index,
            class: SecondaryClass::Mite,
            confidence: 0.1,
            bbox: second.bbox,
        },
    ];
    let mut csv = Vec::new();
    write_secondary(&mut csv, &dets).unwrap();
    let dets = read_secondary(Cursor::new(&csv)).unwrap();

    let flags = associate_secondary(&profiles, &dets, &Thresholds::default()).unwrap();
    let summary = summarize_video(&profiles, &flags);
    assert_eq!(summary.pollen_tracks, 1);
    assert_eq!(summary.mite_tracks, 0);

    let low = Thresholds {
        pollen: 0.25,
        mite: 0.05,
    };
    let flags = associate_secondary(&profiles, &dets, &low).unwrap();
    assert_eq!(summarize_video(&profiles, &flags).mite_tracks, 1);
}
