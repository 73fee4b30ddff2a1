use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::Point3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cellsim::{
    apply_bounding_box, compute_basket_bbox, spawn_scene, Aabb, BoundingBox, CameraId, CellLayout,
    Destination, GarmentClass, ItemId, Location, RgbdFrame, SceneSpec, WorldState, ZoneId,
};
use crate::classify::{
    build_prompt, parse_response_with, BackendDescriptor, BackendSource, ImagePayload, InvalidReason,
    ParseOptions, ParsedLabel,
};
use crate::grasp::{
    check_reachability, execute_pick, request_candidate_with_retry, shake_and_spread, verify_grasp,
    GraspCandidate, GraspParams, PickOutcome, RobotModel, TactileBaseline, TactileConfig,
};
use crate::segmentation::{capture_baseline, segment, SegBaseline, SegThresholds};

use super::fsm::{step, Action, Budgets, CellState, Event, FsmContext, ProtocolViolation};
use super::service::{
    ClassifyService, ClockMode, GraspRequest, GraspService, ServiceBus, ServiceOutcome, ServiceRequest,
    ServiceResponse, CLASSIFY_SERVICE, GRASP_SERVICE,
};
use super::twin::{export_twin_snapshot, write_twin_snapshot, TwinSnapshot};
use super::OrchestratorError;

/// Everything a sorting run needs besides the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneSpec,
    pub layout: CellLayout,
    pub thresholds: SegThresholds,
    pub budgets: Budgets,
    pub backend: BackendDescriptor,
    pub parse: ParseOptions,
    pub grasp: GraspParams,
    pub tactile: TactileConfig,
    pub alice: RobotModel,
    pub bob: RobotModel,
    pub obstacles: Vec<Aabb>,
    /// Footprint growth of a garment dragged over the table edge.
    pub spread_factor: f64,
    pub baseline_frames: u32,
    pub basket_margin_px: u32,
    pub grasp_latency_s: f64,
    pub grasp_timeout_s: f64,
    /// Safety net against a runaway loop.
    pub max_transitions: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scene: SceneSpec::default(),
            layout: CellLayout::standard(),
            thresholds: SegThresholds::default(),
            budgets: Budgets::default(),
            backend: BackendDescriptor::default(),
            parse: ParseOptions::default(),
            grasp: GraspParams::default(),
            tactile: TactileConfig::default(),
            alice: RobotModel::alice(),
            bob: RobotModel::bob(),
            obstacles: vec![
                // camera masts beside the basket and the inspection table
                Aabb::new([450.0, 650.0, 0.0], [500.0, 750.0, 1000.0]),
                Aabb::new([-1100.0, -50.0, 0.0], [-1050.0, 50.0, 1000.0]),
            ],
            spread_factor: 1.5,
            baseline_frames: 5,
            basket_margin_px: 10,
            grasp_latency_s: 0.15,
            grasp_timeout_s: 5.0,
            max_transitions: 100_000,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::Config(m));
        self.layout.validate()?;
        self.thresholds.validate()?;
        self.backend.validate()?;
        self.alice.validate().map_err(OrchestratorError::Config)?;
        self.bob.validate().map_err(OrchestratorError::Config)?;
        if self.budgets.candidate_attempts == 0 {
            return bad("candidate budget must be at least 1".into());
        }
        if !(self.spread_factor >= 1.0 && self.spread_factor.is_finite()) {
            return bad(format!("spread factor {} must be >= 1", self.spread_factor));
        }
        if self.baseline_frames == 0 {
            return bad("at least one baseline frame is needed".into());
        }
        if !(self.grasp_latency_s >= 0.0 && self.grasp_timeout_s > 0.0) {
            return bad("grasp latency must be >= 0 and its timeout > 0".into());
        }
        Ok(())
    }
}

/// One line of the run log: the event handled in `state` and where it led.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub tick: u64,
    pub state: CellState,
    pub event: Event,
    pub next: CellState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item: Option<ItemId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ParsedLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_s: Option<f64>,
    /// Snapshot path relative to the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twin: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bycatch: Vec<ItemId>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<LogRecord>,
}

impl RunLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("log record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_jsonl())
    }

    pub fn load(path: &Path) -> Result<Self, OrchestratorError> {
        let text = fs::read_to_string(path)?;
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Self { records })
    }

    /// Candidate requests issued in zone A (one per handled search event).
    pub fn candidate_requests_a(&self) -> usize {
        self.records
            .iter()
            .filter(|r| {
                r.state == CellState::FindCandidateA
                    && matches!(
                        r.event,
                        Event::CandidateFound(_) | Event::NoCandidate | Event::ServiceTimeout
                    )
            })
            .count()
    }

    /// Re-drives the recorded events through [`step`] from `Init`.
    pub fn replay(&self, budgets: Budgets) -> Result<CellState, ProtocolViolation> {
        let mut state = CellState::Init;
        let mut ctx = FsmContext::new(budgets);
        for r in &self.records {
            if r.state != state {
                return Err(ProtocolViolation {
                    state,
                    event: r.event.name(),
                });
            }
            let t = step(state, &r.event, &ctx)?;
            if t.next != r.next {
                return Err(ProtocolViolation {
                    state,
                    event: r.event.name(),
                });
            }
            state = t.next;
            ctx = t.ctx;
        }
        Ok(state)
    }
}

/// One item's trip from the basket to a bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub item: ItemId,
    pub true_class: GarmentClass,
    pub predicted: ParsedLabel,
    pub destination_bin: GarmentClass,
    /// Candidate requests that came back empty.
    pub candidate_retries: u32,
    /// Picks that were unreachable or lost the item.
    pub pick_retries: u32,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub log: RunLog,
    pub cycles: Vec<CycleReport>,
    pub twins: Vec<TwinSnapshot>,
    pub world: WorldState,
    pub spawned: usize,
    /// Simulated service time spent, seconds.
    pub service_time_s: f64,
}

impl RunOutput {
    /// Items per bin (plus `None` for items still in the basket or on the table).
    pub fn bin_summary(&self) -> Vec<(Location, usize)> {
        let mut v: Vec<_> = self.world.census().into_iter().collect();
        v.sort_by_key(|(loc, _)| format!("{loc:?}"));
        v
    }
}

/// A failed run: the error and everything logged up to it.
#[derive(Debug)]
pub struct RunFailure {
    pub error: OrchestratorError,
    pub partial: Box<RunOutput>,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "run aborted after {} transitions: {}", self.partial.log.records.len(), self.error)
    }
}

impl std::error::Error for RunFailure {}

#[derive(Default)]
struct Annotation {
    latency_s: Option<f64>,
    label: Option<ParsedLabel>,
    twin: Option<String>,
    bycatch: Vec<ItemId>,
}

#[derive(Default)]
struct CycleStats {
    candidate_retries: u32,
    pick_retries: u32,
    label: Option<ParsedLabel>,
}

/// Interprets the actions of [`step`] against a simulated world.
pub struct Runner {
    cfg: RunConfig,
    seed: u64,
    world: WorldState,
    spawned: usize,
    bus: ServiceBus,
    rng: ChaCha8Rng,
    out_dir: Option<PathBuf>,
    tactile_baseline: Option<TactileBaseline>,
    seg_baseline: Option<SegBaseline>,
    pick: Option<PickOutcome>,
    current_item: Option<ItemId>,
    stats: CycleStats,
    note: Annotation,
    log: RunLog,
    cycles: Vec<CycleReport>,
    twins: Vec<TwinSnapshot>,
}

impl Runner {
    /// Spawns the scene and wires the default grasp and classifier services.
    pub fn new(cfg: RunConfig, seed: u64) -> Result<Self, OrchestratorError> {
        cfg.validate()?;
        let mut bus = ServiceBus::new();
        bus.register(
            GRASP_SERVICE,
            Arc::new(GraspService {
                params: cfg.grasp.clone(),
                latency_s: cfg.grasp_latency_s,
            }),
            ClockMode::Logical,
        );
        let mode = match cfg.backend.source {
            BackendSource::LiveHttp { .. } => ClockMode::WallClock,
            _ => ClockMode::Logical,
        };
        bus.register(
            CLASSIFY_SERVICE,
            Arc::new(ClassifyService {
                backend: cfg.backend.build(seed)?,
                prompt: build_prompt(&cfg.backend.model_name),
            }),
            mode,
        );
        Self::with_bus(cfg, seed, bus)
    }

    /// Uses caller-provided services (e.g. stubs in tests).
    pub fn with_bus(cfg: RunConfig, seed: u64, bus: ServiceBus) -> Result<Self, OrchestratorError> {
        cfg.validate()?;
        let world = spawn_scene(&cfg.scene, seed, cfg.layout.clone())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Ok(Self {
            spawned: world.items.len(),
            cfg,
            seed,
            world,
            bus,
            rng,
            out_dir: None,
            tactile_baseline: None,
            seg_baseline: None,
            pick: None,
            current_item: None,
            stats: CycleStats::default(),
            note: Annotation::default(),
            log: RunLog::default(),
            cycles: Vec::new(),
            twins: Vec::new(),
        })
    }

    /// Twin snapshots are written to `<dir>/twin/` when set.
    pub fn write_twins_to(mut self, dir: &Path) -> Self {
        self.out_dir = Some(dir.to_path_buf());
        self
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn run(&mut self) -> Result<(), OrchestratorError> {
        let mut state = CellState::Init;
        let mut ctx = FsmContext::new(self.cfg.budgets);
        let mut event = self.perform(&[Action::MoveToSafePose])?;
        loop {
            if self.log.records.len() as u64 >= self.cfg.max_transitions {
                return Err(OrchestratorError::TransitionLimit(self.cfg.max_transitions));
            }
            let t = step(state, &event, &ctx)?;
            self.track(state, &event);
            let note = std::mem::take(&mut self.note);
            self.log.records.push(LogRecord {
                tick: self.log.records.len() as u64 + 1,
                state,
                event,
                next: t.next,
                item: self.current_item,
                label: note.label,
                latency_s: note.latency_s,
                twin: note.twin,
                bycatch: note.bycatch,
            });
            state = t.next;
            ctx = t.ctx;
            if state.is_terminal() {
                self.perform(&t.actions)?;
                return Ok(());
            }
            event = self.perform(&t.actions)?;
        }
    }

    pub fn into_output(self) -> RunOutput {
        RunOutput {
            log: self.log,
            cycles: self.cycles,
            twins: self.twins,
            spawned: self.spawned,
            service_time_s: self.bus.clock_s(),
            world: self.world,
        }
    }

    fn track(&mut self, state: CellState, event: &Event) {
        match (state, event) {
            (CellState::FindCandidateA, Event::NoCandidate | Event::ServiceTimeout) => {
                self.stats.candidate_retries += 1
            }
            (CellState::CheckReach, Event::Unreachable) | (CellState::VerifyGrasp, Event::GraspFail) => {
                self.stats.pick_retries += 1
            }
            (CellState::Classify, Event::Classified(l)) => self.stats.label = Some(*l),
            (CellState::Classify, Event::ServiceTimeout) => {
                self.stats.label = Some(ParsedLabel::Invalid(InvalidReason::Transport))
            }
            _ => {}
        }
    }

    /// Executes the actions in order; the last branching action decides the
    /// event, otherwise `Done`.
    fn perform(&mut self, actions: &[Action]) -> Result<Event, OrchestratorError> {
        let mut event = Event::Done;
        for a in actions {
            if let Some(e) = self.perform_one(a)? {
                event = e;
            }
        }
        Ok(event)
    }

    fn perform_one(&mut self, action: &Action) -> Result<Option<Event>, OrchestratorError> {
        Ok(match action {
            Action::MoveToSafePose | Action::PowerDown => None,
            Action::RecordTactileBaseline => {
                self.tactile_baseline = Some(self.cfg.tactile.record_baseline(&mut self.rng));
                None
            }
            Action::RecordSegmentationBaseline => {
                let frames = (0..self.cfg.baseline_frames)
                    .map(|_| self.world.render_camera(CameraId::Cam2))
                    .collect::<Result<Vec<_>, _>>()?;
                self.seg_baseline = Some(capture_baseline(&frames)?);
                None
            }
            Action::RequestCandidate(ZoneId::A) => Some(match self.request_candidate_a()? {
                Some((c, latency)) => {
                    self.note.latency_s = Some(latency);
                    Event::CandidateFound(c)
                }
                None => Event::NoCandidate,
            }),
            Action::RequestCandidate(ZoneId::B) => {
                let budget = self.cfg.budgets.candidate_attempts;
                let out = request_candidate_with_retry(|_| self.request_candidate_b(), budget)?;
                self.stats.candidate_retries += out.attempts - u32::from(out.candidate.is_some());
                Some(match out.candidate {
                    Some(c) => Event::CandidateFound(c),
                    None => Event::NoCandidate,
                })
            }
            Action::RequestCandidate(ZoneId::C) => {
                return Err(OrchestratorError::Config("no grasp search in zone C".into()))
            }
            Action::CheckReach(c) => {
                let pose = Point3::from(c.world_pose.position);
                Some(if check_reachability(&pose, &self.cfg.alice, &self.cfg.obstacles) {
                    Event::Reachable
                } else {
                    Event::Unreachable
                })
            }
            Action::ExecutePick(c) => {
                let cam = self.world.layout.camera(CameraId::Cam1)?.clone();
                let baseline = self.tactile_baseline.as_ref().ok_or(OrchestratorError::MissingBaseline)?;
                let out = execute_pick(
                    &mut self.world,
                    &self.cfg.alice,
                    c,
                    &cam,
                    &self.cfg.tactile,
                    baseline,
                    &mut self.rng,
                )?;
                if out.grasped_item.is_some() {
                    self.current_item = out.grasped_item;
                }
                self.pick = Some(out);
                None
            }
            Action::ReadTactile => {
                let out = self.pick.as_ref().ok_or(OrchestratorError::MissingBaseline)?;
                let baseline = self.tactile_baseline.as_ref().ok_or(OrchestratorError::MissingBaseline)?;
                let ok = verify_grasp(&out.reading, baseline, self.cfg.tactile.min_delta)?;
                if !ok {
                    self.release_to_basket()?;
                }
                Some(if ok { Event::GraspOk } else { Event::GraspFail })
            }
            Action::ShakeAndSpread => {
                let out = self.pick.take().ok_or(OrchestratorError::MissingBaseline)?;
                let id = out.grasped_item.ok_or(crate::grasp::GraspError::NothingGrasped)?;
                let rigid = self.world.item(id).is_some_and(|i| i.foreign);
                let factor = if rigid { 1.0 } else { self.cfg.spread_factor };
                shake_and_spread(&mut self.world, &self.cfg.alice, &out, factor, &mut self.rng)?;
                self.note.bycatch = out.bycatch;
                None
            }
            Action::PlaceOnTable => {
                let id = self.current_item.ok_or(OrchestratorError::NoItemInHand)?;
                self.world.move_item(id, Destination::zone(ZoneId::B))?;
                None
            }
            Action::ExportTwin => {
                self.export_twin()?;
                None
            }
            Action::RequestClassification => Some(self.request_classification()?),
            Action::PickFromTable(c) => {
                let cam = self.world.layout.camera(CameraId::Cam2)?;
                let id = self
                    .world
                    .item_at_pixel(cam, c.pixel[0], c.pixel[1])
                    .ok_or(OrchestratorError::NoItemInHand)?;
                self.world.grip(id)?;
                self.current_item = Some(id);
                None
            }
            Action::RouteToBin(class) => {
                let id = self.current_item.take().ok_or(OrchestratorError::NoItemInHand)?;
                self.world.move_item(id, Destination::bin(*class))?;
                let item = self.world.item(id).expect("routed item exists");
                let stats = std::mem::take(&mut self.stats);
                self.cycles.push(CycleReport {
                    item: id,
                    true_class: item.true_class,
                    predicted: stats.label.unwrap_or(ParsedLabel::Invalid(InvalidReason::Transport)),
                    destination_bin: *class,
                    candidate_retries: stats.candidate_retries,
                    pick_retries: stats.pick_retries,
                });
                None
            }
            Action::QuickCheck => Some(match self.request_candidate_b()? {
                Some(_) => Event::ZoneBOccupied,
                None => Event::ZoneBEmpty,
            }),
        })
    }

    fn grasp_call(&mut self, request: GraspRequest) -> Result<Option<(Option<GraspCandidate>, f64)>, OrchestratorError> {
        let env = self
            .bus
            .envelope(GRASP_SERVICE, ServiceRequest::Grasp(request), self.cfg.grasp_timeout_s);
        match self.bus.call_service(env)? {
            ServiceOutcome::Response {
                response: ServiceResponse::Grasp(c),
                elapsed_s,
            } => Ok(Some((c, elapsed_s))),
            ServiceOutcome::Response { .. } => Err(OrchestratorError::Config(
                "grasp service answered with a non-grasp response".into(),
            )),
            ServiceOutcome::Timeout { .. } => Ok(None),
        }
    }

    /// Basket view cropped to the dynamic bounding box. A timed-out call is
    /// reported as an empty answer.
    fn request_candidate_a(&mut self) -> Result<Option<(GraspCandidate, f64)>, OrchestratorError> {
        let cam = self.world.layout.camera(CameraId::Cam1)?.clone();
        let frame = self.world.render_camera(CameraId::Cam1)?;
        let bbox = compute_basket_bbox(&frame, self.world.layout.rim_rgb, self.cfg.basket_margin_px)?;
        let frame = apply_bounding_box(&frame, &bbox, &cam, self.world.layout.table_rgb);
        let reply = self.grasp_call(GraspRequest {
            frame,
            roi: bbox,
            camera: cam,
        })?;
        Ok(reply.and_then(|(c, t)| c.map(|c| (c, t))))
    }

    fn zone_b_view(&self) -> Result<(RgbdFrame, BoundingBox), OrchestratorError> {
        let cam = self.world.layout.camera(CameraId::Cam2)?;
        let frame = self.world.render_camera(CameraId::Cam2)?;
        let zone = self
            .world
            .layout
            .zone(ZoneId::B)
            .ok_or(OrchestratorError::Config("layout has no zone B".into()))?;
        let roi = cam.bbox_of_table_rect(&zone.rect_world).unwrap_or_else(|| frame.full_bbox());
        Ok((frame, roi))
    }

    fn request_candidate_b(&mut self) -> Result<Option<GraspCandidate>, OrchestratorError> {
        let (frame, roi) = self.zone_b_view()?;
        let camera = self.world.layout.camera(CameraId::Cam2)?.clone();
        Ok(self
            .grasp_call(GraspRequest { frame, roi, camera })?
            .and_then(|(c, _)| c))
    }

    fn request_classification(&mut self) -> Result<Event, OrchestratorError> {
        let frame = self.world.render_camera(CameraId::Cam2)?;
        // ground truth for the mock: the topmost thing on the table
        let declared = self
            .world
            .items_in(ZoneId::B)
            .last()
            .and_then(|id| self.world.item(*id))
            .map_or(GarmentClass::Empty, |i| i.true_class);
        let id = self.bus.next_correlation_id();
        let payload = ImagePayload::declared(&format!("cell-{}-{id:06}", self.seed), frame.encode_png(), declared);
        let env = super::service::ServiceEnvelope {
            service_name: CLASSIFY_SERVICE.to_string(),
            request: ServiceRequest::Classify(payload),
            timeout_s: self.cfg.backend.timeout_s,
            correlation_id: id,
        };
        Ok(match self.bus.call_service(env)? {
            ServiceOutcome::Response {
                response: ServiceResponse::Classify(raw),
                elapsed_s,
            } => {
                let label = parse_response_with(&raw, self.cfg.parse);
                self.note.latency_s = Some(elapsed_s);
                self.note.label = Some(label);
                Event::Classified(label)
            }
            ServiceOutcome::Response { .. } => {
                return Err(OrchestratorError::Config(
                    "classifier answered with a non-classification response".into(),
                ))
            }
            ServiceOutcome::Timeout { elapsed_s } => {
                self.note.latency_s = Some(elapsed_s);
                Event::ServiceTimeout
            }
        })
    }

    fn release_to_basket(&mut self) -> Result<(), OrchestratorError> {
        let Some(out) = &self.pick else { return Ok(()) };
        let held: Vec<ItemId> = out.grasped_item.into_iter().chain(out.bycatch.iter().copied()).collect();
        for id in held {
            if self.world.location(id) == Some(Location::Gripped) {
                let c = self.world.layout.basket_rect_world.center();
                self.world.move_item(id, Destination::zone(ZoneId::A).at(c))?;
            }
        }
        self.current_item = None;
        Ok(())
    }

    fn export_twin(&mut self) -> Result<(), OrchestratorError> {
        let tick = self.log.records.len() as u64 + 1;
        let frame = self.world.render_camera(CameraId::Cam2)?;
        let cam = self.world.layout.camera(CameraId::Cam2)?;
        let baseline = self.seg_baseline.as_ref().ok_or(OrchestratorError::MissingBaseline)?;
        let cloud = segment(&frame, baseline, &self.cfg.thresholds, cam)?;
        let robots = [self.cfg.alice.clone(), self.cfg.bob.clone()];
        let snapshot = export_twin_snapshot(&self.world, &cloud, &self.cfg.obstacles, &robots, tick);
        if let Some(dir) = &self.out_dir {
            write_twin_snapshot(&dir.join("twin"), &snapshot, &cloud)?;
        }
        self.note.twin = Some(format!("twin/{}", TwinSnapshot::file_name(tick)));
        self.twins.push(snapshot);
        Ok(())
    }
}

/// Spawns the scene for `seed`, runs the inspection loop until shutdown and
/// returns the log and cycle reports.
pub fn run_until_empty(cfg: &RunConfig, seed: u64) -> Result<RunOutput, RunFailure> {
    run_with(Runner::new(cfg.clone(), seed))
}

/// As [`run_until_empty`], writing twin snapshots below `out_dir`.
pub fn run_until_empty_to(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<RunOutput, RunFailure> {
    run_with(Runner::new(cfg.clone(), seed).map(|r| r.write_twins_to(out_dir)))
}

fn run_with(runner: Result<Runner, OrchestratorError>) -> Result<RunOutput, RunFailure> {
    let mut runner = runner.map_err(|error| RunFailure {
        error,
        partial: Box::new(RunOutput {
            log: RunLog::default(),
            cycles: Vec::new(),
            twins: Vec::new(),
            world: WorldState::empty(CellLayout::standard(), 0),
            spawned: 0,
            service_time_s: 0.0,
        }),
    })?;
    match runner.run() {
        Ok(()) => Ok(runner.into_output()),
        Err(error) => Err(RunFailure {
            error,
            partial: Box::new(runner.into_output()),
        }),
    }
}
