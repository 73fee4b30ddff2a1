use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;
use sortcell_core::bench::{
    emit_report, ensemble_vote, evaluate, load_image_file, load_manifest, no_image, split_by_model, timing_stats,
    ConfusionMatrix, DatasetRecord, EnsembleSpec, EvalOptions, ModelReport, ReportFormat,
};
use sortcell_core::cellsim::{spawn_scene, Destination, Location, RgbdFrame, ZoneId};
use sortcell_core::classify::{BackendSource, InvalidReason, ParsedLabel, ResponseLog};
use sortcell_core::orchestrator::{run_until_empty_to, RunConfig};
use sortcell_core::segmentation::{capture_baseline, export_cloud, segment as segment_frame, SegBaseline, SegThresholds};

use crate::config::{load_scene, FileConfig};
use crate::{BaselineArgs, BenchArgs, RenderArgs, RunArgs, SceneArgs, SegmentArgs, ThresholdArgs};

fn thresholds(base: &SegThresholds, a: &ThresholdArgs) -> Result<SegThresholds> {
    let mut t = base.clone();
    if let Some(d) = a.depth_mm {
        t.depth_delta_mm = d;
    }
    if let Some(c) = a.rgb {
        t.rgb_delta = c;
    }
    t.validate()?;
    Ok(t)
}

fn scene_config(file: &FileConfig, a: &SceneArgs) -> Result<(RunConfig, u64)> {
    let mut cfg = file.run.clone();
    if let Some(p) = &a.scene {
        cfg.scene = load_scene(p)?;
    }
    Ok((cfg, a.seed.or(file.seed).unwrap_or(0)))
}

fn location_label(loc: Location) -> String {
    match loc {
        Location::Zone(ZoneId::A) => "basket".into(),
        Location::Zone(ZoneId::B) => "table".into(),
        Location::Zone(ZoneId::C) => "sorting_area".into(),
        Location::Bin(c) => format!("bin:{c}"),
        Location::Gripped => "gripped".into(),
    }
}

fn write_jsonl<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

pub fn cell_run(file: &FileConfig, a: &RunArgs) -> Result<()> {
    let (mut cfg, seed) = scene_config(file, &a.scene)?;
    cfg.thresholds = thresholds(&cfg.thresholds, &a.thresholds)?;
    cfg.backend = a.backend.resolve(&cfg.backend)?;
    cfg.parse.lenient_punctuation |= a.backend.lenient_punctuation;
    cfg.validate()?;
    let out = a.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("sortcell-out"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let run = run_until_empty_to(&cfg, seed, &out);
    let output = match &run {
        Ok(o) => o,
        Err(f) => f.partial.as_ref(),
    };
    output.log.save(&out.join("run_log.jsonl"))?;
    write_jsonl(&out.join("cycles.jsonl"), &output.cycles)?;
    let bins: BTreeMap<String, usize> =
        output.bin_summary().into_iter().map(|(loc, n)| (location_label(loc), n)).collect();
    let summary = json!({
        "seed": seed,
        "spawned": output.spawned,
        "cycles": output.cycles.len(),
        "transitions": output.log.records.len(),
        "final_state": output.log.records.last().map(|r| r.next),
        "locations": bins,
        "completed": run.is_ok(),
    });
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;

    if let Err(f) = run {
        bail!("{f}");
    }
    println!("{} items spawned, {} sorted", output.spawned, output.cycles.len());
    for (loc, n) in &bins {
        println!("  {loc}: {n}");
    }
    println!("output written to {}", out.display());
    Ok(())
}

pub fn cell_render(file: &FileConfig, a: &RenderArgs) -> Result<()> {
    let (cfg, seed) = scene_config(file, &a.scene)?;
    let mut world = spawn_scene(&cfg.scene, seed, cfg.layout.clone())?;
    let basket = world.items_in(ZoneId::A);
    if a.on_table > basket.len() {
        bail!("only {} items in the basket", basket.len());
    }
    for id in basket.into_iter().take(a.on_table) {
        world.grip(id)?;
        world.move_item(id, Destination::zone(ZoneId::B))?;
    }
    let frame = world.render_camera(a.camera.into())?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    frame.save(&a.out)?;
    println!("{} {}x{} -> {}", frame.camera_id.as_str(), frame.width, frame.height, a.out.display());
    Ok(())
}

fn load_frame(stem: &Path) -> Result<RgbdFrame> {
    RgbdFrame::load(stem).with_context(|| format!("loading frame {}", stem.display()))
}

pub fn baseline(a: &BaselineArgs) -> Result<()> {
    let frames = a.frames.iter().map(|p| load_frame(p)).collect::<Result<Vec<_>>>()?;
    let b = capture_baseline(&frames)?;
    b.save(&a.out)?;
    println!("baseline from {} frames -> {}", b.frame_count_used, a.out.display());
    Ok(())
}

fn frame_name(stem: &Path) -> String {
    stem.file_name().map_or_else(|| "frame".into(), |n| n.to_string_lossy().into_owned())
}

pub fn segment(file: &FileConfig, a: &SegmentArgs) -> Result<()> {
    let thr = thresholds(&file.run.thresholds, &a.thresholds)?;
    let base = SegBaseline::load(&a.baseline).with_context(|| format!("loading baseline from {}", a.baseline.display()))?;
    fs::create_dir_all(&a.out)?;
    for stem in &a.frames {
        let frame = load_frame(stem)?;
        let cam = file.run.layout.camera(frame.camera_id)?;
        let cloud = segment_frame(&frame, &base, &thr, cam).with_context(|| format!("segmenting {}", stem.display()))?;
        let path = a.out.join(format!("{}.ply", frame_name(stem)));
        export_cloud(&cloud, &path)?;
        println!("{}: {} points -> {}", stem.display(), cloud.len(), path.display());
    }
    Ok(())
}

fn model_report(log: &ResponseLog, dataset: &[DatasetRecord]) -> Result<ModelReport> {
    let model = log.records.first().map(|r| r.model.clone()).unwrap_or_default();
    let latencies: Vec<f64> = log
        .records
        .iter()
        .filter(|r| r.parsed != ParsedLabel::Invalid(InvalidReason::Transport))
        .map(|r| r.latency_s)
        .collect();
    Ok(ModelReport {
        matrix: ConfusionMatrix::from_log(log, dataset).with_context(|| format!("scoring {model}"))?,
        timing: timing_stats(&latencies).ok(),
        hardware: log.records.iter().find_map(|r| r.hardware.clone()),
        model,
    })
}

pub fn bench(file: &FileConfig, a: &BenchArgs) -> Result<()> {
    let dataset = load_manifest(&a.manifest).with_context(|| format!("loading {}", a.manifest.display()))?;
    let formats = a
        .format
        .iter()
        .map(|f| f.parse::<ReportFormat>().map_err(|e| anyhow!(e)))
        .collect::<Result<Vec<_>>>()?;
    let out = a.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("bench-out"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let mut logs: Vec<ResponseLog> = Vec::new();
    let mut failure_note = None;
    if let Some(spec) = &a.ensemble {
        let spec: EnsembleSpec = spec
            .parse()
            .map_err(|e| anyhow!("{e}\nusage: --ensemble \"model=weight,model=weight,...\""))?;
        let mut members = Vec::new();
        for p in &a.member_logs {
            members.push(ResponseLog::load(p).with_context(|| format!("loading {}", p.display()))?);
        }
        let voted = ensemble_vote(&members, &spec, &dataset)?;
        voted.save(&out.join("ensemble.jsonl"))?;
        println!("ensemble of {} members over {} records", spec.members().len(), voted.len());
        let by_model: BTreeMap<String, ResponseLog> = members.iter().flat_map(split_by_model).collect();
        for (name, _) in spec.members() {
            logs.push(by_model[name].clone());
        }
        logs.push(voted);
    } else {
        if !a.member_logs.is_empty() {
            bail!("--member-log is only used together with --ensemble");
        }
        let desc = a.backend.resolve(&file.run.backend)?;
        let backend = desc.build(a.seed.or(file.seed).unwrap_or(0))?;
        let opts = EvalOptions {
            concurrency: a.concurrency,
            parse: sortcell_core::ParseOptions {
                lenient_punctuation: file.run.parse.lenient_punctuation || a.backend.lenient_punctuation,
            },
            hardware: a.hardware.clone(),
        };
        let live = matches!(desc.source, BackendSource::LiveHttp { .. });
        let ev = if live {
            evaluate(backend.as_ref(), &dataset, &opts, &load_image_file)?
        } else {
            evaluate(backend.as_ref(), &dataset, &opts, &no_image)?
        };
        ev.log.save(&out.join("responses.jsonl"))?;
        for f in &ev.failures {
            eprintln!("{}: {}", f.id, f.error);
        }
        failure_note = ev.summary();
        println!("{} responses from {}", ev.log.len(), backend.model_name());
        logs.push(ev.log);
    }

    if a.report {
        let reports = logs.iter().map(|l| model_report(l, &dataset)).collect::<Result<Vec<_>>>()?;
        for r in &reports {
            let acc = r.matrix.overall_accuracy().map_or("n/a".into(), |v| format!("{:.2}%", v * 100.0));
            println!("{}: overall {acc}", r.model);
        }
        emit_report(&reports, &formats, &out)?;
    }
    println!("output written to {}", out.display());
    match failure_note {
        Some(note) => bail!(note),
        None => Ok(()),
    }
}
