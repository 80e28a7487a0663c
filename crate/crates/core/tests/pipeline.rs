use rppg_core::ingest::{FaceLandmarks, LandmarkSidecar};
use rppg_core::pipeline::{estimate, CombineMethod, PipelineConfig};
use rppg_core::synth::{render, SynthScene};
use rppg_core::Error;

fn scene(duration_s: f64) -> SynthScene {
    SynthScene {
        width: 16,
        height: 16,
        duration_s,
        hr_bpm: 66.0,
        noiseless: true,
        seed: 4,
        ..SynthScene::default()
    }
}

#[test]
fn recording_shorter_than_a_window_has_no_windows() {
    let out = render(&scene(5.0)).unwrap();
    let err = estimate(&out.frames, &out.landmarks, &PipelineConfig::default()).unwrap_err();
    assert!(matches!(err, Error::NoWindows));
}

#[test]
fn landmark_count_must_match_frames() {
    let out = render(&scene(12.0)).unwrap();
    let short = LandmarkSidecar::new(
        vec![FaceLandmarks::full_frame(16, 16); 10],
        10,
        16,
        16,
    )
    .unwrap();
    let err = estimate(&out.frames, &short, &PipelineConfig::default()).unwrap_err();
    assert!(matches!(err, Error::CountMismatch { .. }));
}

#[test]
fn smoothing_outside_unit_interval_is_rejected() {
    let out = render(&scene(12.0)).unwrap();
    let cfg = PipelineConfig {
        bbox_smoothing: Some(1.0),
        ..PipelineConfig::default()
    };
    assert!(matches!(
        estimate(&out.frames, &out.landmarks, &cfg),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn weight_maps_follow_the_method() {
    let out = render(&scene(12.0)).unwrap();
    for method in CombineMethod::ALL {
        let cfg = PipelineConfig {
            method,
            grid_rows: 2,
            grid_cols: 2,
            ..PipelineConfig::default()
        };
        let result = estimate(&out.frames, &out.landmarks, &cfg).unwrap();
        assert_eq!(result.windows.len(), 1);
        let w = &result.windows[0];
        assert_eq!(w.snr_weights.is_some(), method != CombineMethod::Aggregate);
        assert_eq!(w.final_weights.is_some(), method == CombineMethod::Proposed);
        assert_eq!(w.diffuse_weights.is_some(), method == CombineMethod::Proposed);
        if let Some(fw) = &w.final_weights {
            assert!((fw.values().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!((result.estimate.video_bpm - 66.0).abs() <= 1.0, "{method}: {}", result.estimate.video_bpm);
    }
}
