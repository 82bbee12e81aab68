"""HTTP service wrapping the core package.

The interesting endpoint group is /sessions: a client (a game serving a real
player, or an agent harness) creates an adaptation session on an uploaded
archive, receives a level suggestion, reports the observed win rate, and
repeats until a compensatory level is found. /adapt runs the same loop
server-side with one of the built-in agents standing in for the player.
"""

from __future__ import annotations

import hashlib
import json
import threading

from fastapi import FastAPI, HTTPException

from ..adapt import AdaptParams, AdaptationSession, adapt
from ..agents import canonical_agent_name, make_agent
from ..archive import Archive, BAND_LABELS, difficulty_bands, evaluate_level
from ..game import BudgetSpec, GameConfig
from ..gp import Matern52Kernel
from ..levels import LevelError, behavior_descriptor, parse_level, validate_level
from . import schemas as sc

API_VERSION = "0.1.0"


class ServiceState:
    """In-memory stores; a lock serializes mutation (sessions update a GP)."""

    def __init__(self):
        self.lock = threading.Lock()
        self.archives: dict = {}
        self.sessions: dict = {}
        self._session_counter = 0

    def new_session_id(self) -> str:
        self._session_counter += 1
        return f"s{self._session_counter:06d}"


def _archive_id(data: dict) -> str:
    canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def _suggestion_model(suggestion) -> sc.SuggestionModel:
    return sc.SuggestionModel(
        cell=list(suggestion.cell), level=suggestion.level_text,
        posterior_mean=suggestion.posterior_mean,
        posterior_sigma=suggestion.posterior_sigma,
        acq_value=suggestion.acq_value)


def _step_models(steps) -> list:
    return [sc.StepModel(iteration=s.iteration, cell=list(s.cell),
                         win_rate=s.win_rate, performance=s.performance,
                         acq_value=s.acq_value) for s in steps]


def _session_state(session_id: str, session: AdaptationSession) -> sc.SessionStateResponse:
    return sc.SessionStateResponse(
        session_id=session_id,
        prior_agent=session.trace.prior_agent,
        target_agent=session.trace.target_agent,
        iterations_used=session.trace.iterations_used,
        done=session.done,
        success=session.trace.success,
        suggestion=None if session.done else _suggestion_model(session.suggestion),
        history=_step_models(session.trace.steps))


def _agent_or_422(name: str):
    try:
        return canonical_agent_name(name)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def create_app(state: ServiceState | None = None) -> FastAPI:
    app = FastAPI(title="leveladapt", version=API_VERSION)
    state = state or ServiceState()
    app.state.store = state

    @app.get("/health", response_model=sc.HealthResponse)
    def health():
        return sc.HealthResponse(status="ok", version=API_VERSION)

    @app.post("/levels/validate", response_model=sc.LevelValidateResponse)
    def validate(req: sc.LevelValidateRequest):
        try:
            level = parse_level(req.level)
            validate_level(level)
        except LevelError as exc:
            return sc.LevelValidateResponse(
                valid=False,
                error=sc.LevelErrorModel(message=str(exc), row=exc.row, col=exc.col))
        d = behavior_descriptor(level)
        return sc.LevelValidateResponse(
            valid=True, width=level.width, height=level.height,
            descriptor=sc.DescriptorModel(coverage=d.coverage, leniency=d.leniency,
                                          reachability=d.reachability))

    @app.post("/levels/evaluate", response_model=sc.EvaluateResponse)
    def evaluate(req: sc.EvaluateRequest):
        name = _agent_or_422(req.agent)
        try:
            level = parse_level(req.level)
            validate_level(level)
        except LevelError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        game = GameConfig(max_ticks=req.max_ticks,
                          budget=BudgetSpec("calls", req.budget_calls))
        win_rate, perf = evaluate_level(level, make_agent(name), req.rollouts,
                                        req.seed, game)
        return sc.EvaluateResponse(agent=name, rollouts=req.rollouts,
                                   win_rate=win_rate, performance=perf)

    @app.post("/archives", response_model=sc.ArchiveUploadResponse)
    def upload_archive(data: dict):
        try:
            archive = Archive.from_dict(data)
        except (ValueError, KeyError, LevelError) as exc:
            raise HTTPException(status_code=422, detail=f"bad archive: {exc}")
        archive_id = _archive_id(data)
        with state.lock:
            state.archives[archive_id] = archive
        return sc.ArchiveUploadResponse(
            archive_id=archive_id, agent=archive.agent_name,
            occupied_cells=len(archive),
            config_fingerprint=archive.config_fingerprint)

    @app.get("/archives", response_model=list[sc.ArchiveSummary])
    def list_archives():
        with state.lock:
            return [sc.ArchiveSummary(archive_id=aid, agent=a.agent_name,
                                      occupied_cells=len(a))
                    for aid, a in sorted(state.archives.items())]

    def _get_archive(archive_id: str) -> Archive:
        with state.lock:
            archive = state.archives.get(archive_id)
        if archive is None:
            raise HTTPException(status_code=404,
                                detail=f"no archive {archive_id!r}")
        return archive

    @app.get("/archives/{archive_id}/bands", response_model=sc.BandsResponse)
    def archive_bands(archive_id: str):
        archive = _get_archive(archive_id)
        return sc.BandsResponse(archive_id=archive_id, labels=list(BAND_LABELS),
                                counts=list(difficulty_bands(archive)))

    @app.post("/sessions", response_model=sc.SessionStateResponse)
    def create_session(req: sc.SessionCreateRequest):
        archive = _get_archive(req.archive_id)
        target = _agent_or_422(req.target_agent) if req.target_agent else ""
        kernel = Matern52Kernel(amplitude=req.amplitude,
                                lengthscale=req.lengthscale,
                                noise_variance=req.noise_variance)
        params = AdaptParams(beta=req.beta, max_iterations=req.max_iterations,
                             success_threshold=req.success_threshold)
        session = AdaptationSession(archive, target_agent=target,
                                    kernel=kernel, params=params)
        with state.lock:
            session_id = state.new_session_id()
            state.sessions[session_id] = session
        return _session_state(session_id, session)

    def _get_session(session_id: str) -> AdaptationSession:
        with state.lock:
            session = state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404,
                                detail=f"no session {session_id!r}")
        return session

    @app.get("/sessions/{session_id}", response_model=sc.SessionStateResponse)
    def session_state(session_id: str):
        return _session_state(session_id, _get_session(session_id))

    @app.post("/sessions/{session_id}/observe",
              response_model=sc.SessionStateResponse)
    def observe(session_id: str, req: sc.ObserveRequest):
        session = _get_session(session_id)
        with state.lock:
            if session.done:
                raise HTTPException(status_code=409,
                                    detail="session already finished")
            session.observe(req.win_rate)
        return _session_state(session_id, session)

    @app.post("/adapt", response_model=sc.AdaptRunResponse)
    def adapt_run(req: sc.AdaptRunRequest):
        archive = _get_archive(req.archive_id)
        name = _agent_or_422(req.agent)
        params = AdaptParams(beta=req.beta, max_iterations=req.max_iterations,
                             success_threshold=req.success_threshold,
                             rollouts=req.rollouts)
        game = GameConfig(max_ticks=req.max_ticks,
                          budget=BudgetSpec("calls", req.budget_calls))
        trace = adapt(archive, make_agent(name), params=params, game=game,
                      seed=req.seed)
        return sc.AdaptRunResponse(
            prior_agent=trace.prior_agent, target_agent=trace.target_agent,
            success=trace.success, iterations_used=trace.iterations_used,
            steps=_step_models(trace.steps))

    return app


app = create_app()
