use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cellsim::{GarmentClass, ZoneId};
use crate::classify::ParsedLabel;
use crate::grasp::{GraspCandidate, DEFAULT_CANDIDATE_ATTEMPTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellState {
    Init,
    RecordBaselines,
    FindCandidateA,
    CheckReach,
    Pick,
    VerifyGrasp,
    ShakeSpread,
    PlaceB,
    Retract,
    Classify,
    FindCandidateB,
    PickB,
    PlaceC,
    QuickCheckB,
    Shutdown,
}

impl CellState {
    pub const ALL: [CellState; 15] = [
        CellState::Init,
        CellState::RecordBaselines,
        CellState::FindCandidateA,
        CellState::CheckReach,
        CellState::Pick,
        CellState::VerifyGrasp,
        CellState::ShakeSpread,
        CellState::PlaceB,
        CellState::Retract,
        CellState::Classify,
        CellState::FindCandidateB,
        CellState::PickB,
        CellState::PlaceC,
        CellState::QuickCheckB,
        CellState::Shutdown,
    ];

    pub fn is_terminal(self) -> bool {
        self == CellState::Shutdown
    }
}

/// Outcome of the work started by the previous transition. `Done` closes
/// actions that cannot branch (moves, placing, baselines).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    Done,
    CandidateFound(GraspCandidate),
    NoCandidate,
    Reachable,
    Unreachable,
    GraspOk,
    GraspFail,
    Classified(ParsedLabel),
    ZoneBOccupied,
    ZoneBEmpty,
    ServiceTimeout,
    BudgetExhausted,
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::Done => "done",
            Event::CandidateFound(_) => "candidate_found",
            Event::NoCandidate => "no_candidate",
            Event::Reachable => "reachable",
            Event::Unreachable => "unreachable",
            Event::GraspOk => "grasp_ok",
            Event::GraspFail => "grasp_fail",
            Event::Classified(_) => "classified",
            Event::ZoneBOccupied => "zone_b_occupied",
            Event::ZoneBEmpty => "zone_b_empty",
            Event::ServiceTimeout => "service_timeout",
            Event::BudgetExhausted => "budget_exhausted",
        }
    }
}

/// Work the runner performs on entering the next state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    MoveToSafePose,
    RecordTactileBaseline,
    RecordSegmentationBaseline,
    RequestCandidate(ZoneId),
    CheckReach(GraspCandidate),
    ExecutePick(GraspCandidate),
    ReadTactile,
    ShakeAndSpread,
    PlaceOnTable,
    ExportTwin,
    RequestClassification,
    PickFromTable(GraspCandidate),
    RouteToBin(GarmentClass),
    QuickCheck,
    PowerDown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Candidate requests in zone A before the basket is declared empty.
    pub candidate_attempts: u32,
    /// Failed picks (unreachable or slipped) tolerated per item.
    pub pick_retries: u32,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            candidate_attempts: DEFAULT_CANDIDATE_ATTEMPTS,
            pick_retries: 3,
        }
    }
}

/// Counters and the in-flight cycle data the transition function needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FsmContext {
    pub budgets: Budgets,
    pub candidate_misses: u32,
    pub pick_failures: u32,
    pub candidate: Option<GraspCandidate>,
    pub destination: Option<GarmentClass>,
}

impl FsmContext {
    pub fn new(budgets: Budgets) -> Self {
        Self {
            budgets,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub next: CellState,
    pub actions: Vec<Action>,
    pub ctx: FsmContext,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ProtocolViolation {
    pub state: CellState,
    pub event: &'static str,
}

impl fmt::Display for ProtocolViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event {} is not defined in state {:?}", self.event, self.state)
    }
}

/// Bin for a classifier verdict. Anything that is not a concrete item class
/// (invalid answers, timeouts, "empty" for a table that holds an item) goes
/// to `other`.
pub fn route(label: Option<ParsedLabel>) -> GarmentClass {
    match label {
        Some(ParsedLabel::Valid(c)) if c.is_item_class() => c,
        _ => GarmentClass::Other,
    }
}

/// The inspection flow as a pure transition function.
pub fn step(state: CellState, event: &Event, ctx: &FsmContext) -> Result<Transition, ProtocolViolation> {
    use Action as A;
    use CellState as S;
    use Event as E;

    let violation = || ProtocolViolation {
        state,
        event: event.name(),
    };
    let mut c = ctx.clone();
    let shutdown = (S::Shutdown, vec![A::PowerDown]);
    let search_a = (S::FindCandidateA, vec![A::RequestCandidate(ZoneId::A)]);

    let (next, actions) = match (state, event) {
        (S::Init, E::Done) => (
            S::RecordBaselines,
            vec![A::RecordTactileBaseline, A::RecordSegmentationBaseline],
        ),
        (S::RecordBaselines, E::Done) => {
            c.candidate_misses = 0;
            search_a
        }

        (S::FindCandidateA, E::CandidateFound(cand)) => {
            c.candidate_misses = 0;
            c.candidate = Some(cand.clone());
            (S::CheckReach, vec![A::CheckReach(cand.clone())])
        }
        // a silent grasp service counts like an empty answer
        (S::FindCandidateA, E::NoCandidate | E::ServiceTimeout) => {
            c.candidate_misses += 1;
            if c.candidate_misses >= c.budgets.candidate_attempts {
                shutdown
            } else {
                search_a
            }
        }
        (S::FindCandidateA, E::BudgetExhausted) => shutdown,

        (S::CheckReach, E::Reachable) => {
            let cand = c.candidate.clone().ok_or_else(violation)?;
            (S::Pick, vec![A::ExecutePick(cand)])
        }
        (S::CheckReach, E::Unreachable) | (S::VerifyGrasp, E::GraspFail) => {
            c.candidate = None;
            c.pick_failures += 1;
            if c.pick_failures > c.budgets.pick_retries {
                shutdown
            } else {
                search_a
            }
        }

        (S::Pick, E::Done) => (S::VerifyGrasp, vec![A::ReadTactile]),
        (S::VerifyGrasp, E::GraspOk) => {
            c.pick_failures = 0;
            c.candidate = None;
            (S::ShakeSpread, vec![A::ShakeAndSpread])
        }
        (S::ShakeSpread, E::Done) => (S::PlaceB, vec![A::PlaceOnTable, A::ExportTwin]),
        (S::PlaceB, E::Done) => (S::Retract, vec![A::MoveToSafePose]),
        (S::Retract, E::Done) => (S::Classify, vec![A::RequestClassification]),

        (S::Classify, E::Classified(label)) => {
            c.destination = Some(route(Some(*label)));
            (S::FindCandidateB, vec![A::RequestCandidate(ZoneId::B)])
        }
        (S::Classify, E::ServiceTimeout) => {
            c.destination = Some(route(None));
            (S::FindCandidateB, vec![A::RequestCandidate(ZoneId::B)])
        }

        (S::FindCandidateB, E::CandidateFound(cand)) => (S::PickB, vec![A::PickFromTable(cand.clone())]),
        (S::FindCandidateB, E::NoCandidate | E::BudgetExhausted | E::ServiceTimeout) => {
            c.destination = None;
            (S::QuickCheckB, vec![A::QuickCheck])
        }
        (S::PickB, E::Done) => {
            let bin = c.destination.ok_or_else(violation)?;
            (S::PlaceC, vec![A::RouteToBin(bin), A::ExportTwin])
        }
        (S::PlaceC, E::Done) => {
            c.destination = None;
            (S::QuickCheckB, vec![A::QuickCheck])
        }

        (S::QuickCheckB, E::ZoneBOccupied) => (S::Classify, vec![A::RequestClassification]),
        (S::QuickCheckB, E::ZoneBEmpty | E::ServiceTimeout) => {
            c.candidate_misses = 0;
            search_a
        }

        _ => return Err(violation()),
    };
    Ok(Transition { next, actions, ctx: c })
}
