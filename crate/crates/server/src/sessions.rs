//! Bidding-session endpoints. State changes of one session are serialized
//! by its mutex; solves run on the blocking pool with the mutex released.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use tokio::sync::Mutex;

use ssoa_core::analysis::solve_kind;
use ssoa_core::api::{
    CreateSessionRequest, JobState, JobStatus, RoundAccepted, SessionCreated, SessionState, SolveRoundRequest,
    SubmitRoundRequest, WhatIfRequest, API_SCHEMA_VERSION,
};
use ssoa_core::instance::InstanceDocument;
use ssoa_core::session::{AllocationView, LedgerRecord, Session, SessionError, SessionSummary, WhatIfRecord, WhatIfScenario};

use crate::error::{body, ApiError, ApiResult};
use crate::{now, AppState};

pub(crate) struct Slot {
    state: Mutex<SlotState>,
}

struct SlotState {
    session: Session,
    solving: Option<u32>,
    jobs: HashMap<String, Job>,
}

struct Job {
    status: JobStatus,
    http: StatusCode,
}

impl Slot {
    pub(crate) fn new(session: Session) -> Arc<Slot> {
        Arc::new(Slot {
            state: Mutex::new(SlotState {
                session,
                solving: None,
                jobs: HashMap::new(),
            }),
        })
    }
}

impl AppState {
    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("session {id} does not exist")))
    }

    /// Applies one ledger event in memory and on disk. If the disk write
    /// fails the in-memory session is rebuilt from the file.
    async fn commit<T>(
        &self,
        st: &mut SlotState,
        f: impl FnOnce(&mut Session) -> Result<(T, LedgerRecord), SessionError>,
    ) -> Result<T, ApiError> {
        let (out, record) = f(&mut st.session)?;
        if let Err(e) = self.store.append(&st.session.id, &record).await {
            let id = st.session.id.clone();
            tracing::error!(session = %id, "ledger append failed: {e}");
            match self.store.load(&id).await {
                Ok(s) => st.session = s,
                Err(e2) => tracing::error!(session = %id, "reload failed: {e2}"),
            }
            return Err(ApiError::internal(format!("could not persist session {id}: {e}")));
        }
        Ok(out)
    }
}

pub(crate) async fn list(State(app): State<Arc<AppState>>) -> Json<Vec<String>> {
    let mut ids: Vec<String> = app.sessions.read().expect("session map lock").keys().cloned().collect();
    ids.sort();
    Json(ids)
}

pub(crate) async fn create(
    State(app): State<Arc<AppState>>,
    b: Result<Json<CreateSessionRequest>, JsonRejection>,
) -> Result<(StatusCode, [(header::HeaderName, String); 1], Json<SessionCreated>), ApiError> {
    let req = body(b)?;
    let inst = req.instance.into_instance()?;
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session::create(id.clone(), &inst, req.settings, now())?;
    app.store
        .create(&id, &session.ledger)
        .await
        .map_err(|e| ApiError::internal(format!("could not persist session: {e}")))?;
    let settings = session.settings.clone();
    app.sessions
        .write()
        .expect("session map lock")
        .insert(id.clone(), Slot::new(session));
    tracing::info!(session = %id, "session created");
    Ok((
        StatusCode::CREATED,
        [(header::LOCATION, format!("/v1/sessions/{id}"))],
        Json(SessionCreated { id, settings }),
    ))
}

pub(crate) async fn get(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionState> {
    let slot = app.slot(&id)?;
    let st = slot.state.lock().await;
    let s = &st.session;
    Ok(Json(SessionState {
        schema_version: API_SCHEMA_VERSION,
        id: s.id.clone(),
        settings: s.settings.clone(),
        closed: s.closed,
        base: InstanceDocument::from(&s.base),
        rounds: s.rounds.clone(),
        solving: st.solving,
    }))
}

pub(crate) async fn summary(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionSummary> {
    let slot = app.slot(&id)?;
    let st = slot.state.lock().await;
    Ok(Json(st.session.summary()))
}

pub(crate) async fn ledger(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Vec<LedgerRecord>> {
    let slot = app.slot(&id)?;
    let st = slot.state.lock().await;
    Ok(Json(st.session.ledger.clone()))
}

pub(crate) async fn submit_round(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    b: Result<Json<SubmitRoundRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<RoundAccepted>), ApiError> {
    let req = body(b)?;
    let slot = app.slot(&id)?;
    let mut st = slot.state.lock().await;
    let round = app
        .commit(&mut st, |s| {
            let r = s.submit_round(req.delta, now())?;
            Ok((s.rounds.len() as u32, r))
        })
        .await?;
    Ok((StatusCode::CREATED, Json(RoundAccepted { round })))
}

pub(crate) async fn skip_round(
    State(app): State<Arc<AppState>>,
    Path((id, round)): Path<(String, u32)>,
) -> ApiResult<RoundAccepted> {
    let slot = app.slot(&id)?;
    let mut st = slot.state.lock().await;
    if st.solving == Some(round) {
        return Err(ApiError::conflict("solve_running", format!("round {round} is being solved")));
    }
    app.commit(&mut st, |s| Ok(((), s.skip_round(round, now())?))).await?;
    Ok(Json(RoundAccepted { round }))
}

pub(crate) async fn close(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionSummary> {
    let slot = app.slot(&id)?;
    let mut st = slot.state.lock().await;
    if let Some(r) = st.solving {
        return Err(ApiError::conflict("solve_running", format!("round {r} is being solved")));
    }
    app.commit(&mut st, |s| Ok(((), s.close(now())?))).await?;
    Ok(Json(st.session.summary()))
}

pub(crate) async fn allocation(
    State(app): State<Arc<AppState>>,
    Path((id, round)): Path<(String, u32)>,
) -> ApiResult<AllocationView> {
    let slot = app.slot(&id)?;
    let st = slot.state.lock().await;
    Ok(Json(st.session.allocation_view(round)?))
}

pub(crate) async fn solve_round(
    State(app): State<Arc<AppState>>,
    Path((id, round)): Path<(String, u32)>,
    b: Result<Json<SolveRoundRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let req = body(b)?;
    let slot = app.slot(&id)?;
    let job = uuid::Uuid::new_v4().to_string();
    let (inst, (kind, solver, limits, seed)) = {
        let mut st = slot.state.lock().await;
        if let Some(r) = st.solving {
            return Err(ApiError::conflict(
                "solve_running",
                format!("round {r} of this session is already being solved"),
            ));
        }
        let inst = st.session.prepare_solve(round)?;
        let params = req.overrides.resolve(&st.session.settings);
        limits_ok(&params.2)?;
        st.solving = Some(round);
        st.jobs.insert(
            job.clone(),
            Job {
                status: JobStatus {
                    job: job.clone(),
                    round,
                    state: JobState::Running,
                    result: None,
                    error: None,
                },
                http: StatusCode::OK,
            },
        );
        (inst, params)
    };

    let task = {
        let (app, slot, job) = (app.clone(), slot.clone(), job.clone());
        tokio::spawn(async move {
            let solved = tokio::task::spawn_blocking(move || solve_kind(&inst, kind, &solver, &limits, seed)).await;
            let mut st = slot.state.lock().await;
            st.solving = None;
            let outcome = match solved {
                Ok(Ok(report)) => match app
                    .commit(&mut st, |s| Ok(((), s.record_solution(round, report, now())?)))
                    .await
                {
                    Ok(()) => st.session.allocation_view(round).map_err(ApiError::from),
                    Err(e) => Err(e),
                },
                Ok(Err(e)) => Err(ApiError::from(e)),
                Err(e) => Err(ApiError::internal(format!("solver task failed: {e}"))),
            };
            let entry = st.jobs.get_mut(&job).expect("job registered before spawn");
            match outcome {
                Ok(view) => {
                    entry.status.state = JobState::Done;
                    entry.status.result = Some(view);
                }
                Err(e) => {
                    entry.status.state = JobState::Failed;
                    entry.http = e.status;
                    entry.status.error = Some(e.doc);
                }
            }
        })
    };

    let location = format!("/v1/sessions/{id}/jobs/{job}");
    if !req.wait {
        let st = slot.state.lock().await;
        let status = st.jobs[&job].status.clone();
        return Ok((StatusCode::ACCEPTED, [(header::LOCATION, location)], Json(status)).into_response());
    }
    task.await.map_err(|e| ApiError::internal(format!("solver task failed: {e}")))?;
    let st = slot.state.lock().await;
    let j = &st.jobs[&job];
    Ok(match (&j.status.result, &j.status.error) {
        (Some(view), _) => Json(view.clone()).into_response(),
        (None, Some(err)) => (j.http, Json(err.clone())).into_response(),
        (None, None) => unreachable!("finished jobs carry a result or an error"),
    })
}

pub(crate) async fn job(
    State(app): State<Arc<AppState>>,
    Path((id, job)): Path<(String, String)>,
) -> ApiResult<JobStatus> {
    let slot = app.slot(&id)?;
    let st = slot.state.lock().await;
    st.jobs
        .get(&job)
        .map(|j| Json(j.status.clone()))
        .ok_or_else(|| ApiError::not_found(format!("job {job} does not exist")))
}

pub(crate) async fn what_if(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    b: Result<Json<WhatIfRequest>, JsonRejection>,
) -> ApiResult<WhatIfRecord> {
    let req = body(b)?;
    let slot = app.slot(&id)?;
    let scenario = WhatIfScenario {
        base_round: req.base_round,
        mutation: req.mutation,
    };
    let (inst, baseline, (kind, solver, limits, seed)) = {
        let st = slot.state.lock().await;
        let (inst, baseline) = st.session.prepare_what_if(&scenario)?;
        (inst, baseline, req.overrides.resolve(&st.session.settings))
    };
    limits_ok(&limits)?;
    let report = tokio::task::spawn_blocking(move || solve_kind(&inst, kind, &solver, &limits, seed))
        .await
        .map_err(|e| ApiError::internal(format!("solver task failed: {e}")))??;
    let mut st = slot.state.lock().await;
    let record = app
        .commit(&mut st, |s| s.record_what_if(scenario, baseline, report, now()))
        .await?;
    Ok(Json(record))
}

fn limits_ok(l: &ssoa_core::exact::SolveLimits) -> Result<(), ApiError> {
    l.validate().map_err(ApiError::from)
}
