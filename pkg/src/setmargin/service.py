"""Stateful HTTP sessions for live elicitation.

Each session owns a preference dataset and a queue of pending comparison
pairs from the latest solve. Solves run off the request path on a worker
pool; clients poll GET /sessions/{id}/query until a pair (or the final
recommendation) is ready. Every answer is appended to a JSON-lines log so a
session's dataset can be reconstructed by replay.

Endpoints:
    GET  /specs                         catalog of available problems
    POST /sessions {specId,k,T}         -> {sessionId}
    GET  /sessions/{id}/query           -> {pair: [cfg, cfg]} | 202 while solving
    POST /sessions/{id}/answer {verdict}-> {status}
    POST /sessions/{id}/finish          -> {recommendation, weights}
"""

from __future__ import annotations

import itertools
import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from . import milp, solver
from .bench import gen_pc, gen_synthetic
from .loop import LoopConfig, QueryAnswer, answer_to_preferences, cross_validate, schedule
from .milp import Hyperparameters, Preference, PreferenceDataset
from .problem import Configuration, ProblemSpec, decode, encode, reduce_real_attributes
from .users import VERDICTS

AWAITING = "awaitingAnswer"
SOLVING = "solving"
DONE = "done"
ABORTED = "aborted"


def render_configuration(spec: ProblemSpec, config: Configuration) -> dict:
    """Human-readable view: attribute names, chosen values, derived reals."""
    values = decode(spec, config)
    out = {
        "attributes": [
            {"name": spec.attributes[a].name,
             "value": spec.attributes[a].value_name(v)}
            for a, v in enumerate(values)
        ],
        "assignment": list(values),
    }
    if spec.cost is not None:
        reals = spec.cost.entries @ config.bits
        for name, val in zip(spec.cost.real_names, reals):
            out[name] = round(float(val), 6)
    return out


@dataclass
class Session:
    id: str
    spec_id: str
    spec: ProblemSpec
    work_spec: ProblemSpec
    loop_cfg: LoopConfig
    solver_cfg: solver.SolverConfig
    log_path: Path
    dataset: PreferenceDataset = field(default_factory=PreferenceDataset)
    pending: list[tuple[Configuration, Configuration]] = field(default_factory=list)
    iteration: int = 0
    answered: int = 0
    hp: Hyperparameters = None
    status: str = SOLVING
    result: dict | None = None
    lock: threading.RLock = field(default_factory=threading.RLock)
    solve_future = None

    def log(self, record: dict):
        record = {"ts": time.time(), **record}
        with open(self.log_path, "a") as fh:
            fh.write(json.dumps(record) + "\n")


class AnswerBody(BaseModel):
    verdict: str


class CreateBody(BaseModel):
    specId: str
    k: int = 2
    T: int = 20


def default_catalog() -> dict[str, ProblemSpec]:
    return {"pc": gen_pc(), "synthetic-r3": gen_synthetic(3)}


class SessionService:
    """Owns all sessions; one logical writer per session via its lock."""

    def __init__(self, catalog: dict[str, ProblemSpec] | None = None,
                 session_dir=None, solver_cfg: solver.SolverConfig | None = None,
                 loop_defaults: LoopConfig | None = None, max_solvers: int = 2):
        self.catalog = catalog if catalog is not None else default_catalog()
        self.session_dir = Path(session_dir) if session_dir else Path("sessions")
        self.session_dir.mkdir(parents=True, exist_ok=True)
        self.solver_cfg = solver_cfg or solver.SolverConfig(time_limit=60.0)
        # live sessions keep answer latency at a single solve; the grid sweep
        # of cross-validation is opt-in via loop_defaults.cv_every
        self.loop_defaults = loop_defaults or LoopConfig(T=20, cv_every=1_000_000)
        self.sessions: dict[str, Session] = {}
        self.pool = ThreadPoolExecutor(max_workers=max_solvers)

    # -- lifecycle ---------------------------------------------------------

    def create_session(self, spec_id: str, k: int, T: int) -> Session:
        if spec_id not in self.catalog:
            raise KeyError(spec_id)
        spec = self.catalog[spec_id]
        work = reduce_real_attributes(spec) if spec.cost is not None else spec
        sid = uuid.uuid4().hex[:12]
        from dataclasses import replace
        loop_cfg = replace(self.loop_defaults, k=k, T=T)
        session = Session(
            id=sid, spec_id=spec_id, spec=spec, work_spec=work,
            loop_cfg=loop_cfg, solver_cfg=self.solver_cfg,
            log_path=self.session_dir / f"{sid}.jsonl",
            hp=loop_cfg.initial_hp)
        self.sessions[sid] = session
        session.log({"event": "create", "session": sid, "spec": spec_id, "k": k, "T": T})
        self._schedule_solve(session)
        return session

    def get(self, sid: str) -> Session:
        if sid not in self.sessions:
            raise KeyError(sid)
        return self.sessions[sid]

    # -- solving -----------------------------------------------------------

    def _schedule_solve(self, session: Session):
        session.status = SOLVING
        session.solve_future = self.pool.submit(self._solve_iteration, session)

    def _solve_iteration(self, session: Session):
        try:
            sol = milp.solve_setmargin(
                session.work_spec, session.dataset, session.loop_cfg.k,
                session.hp, session.solver_cfg)
        except Exception as exc:
            with session.lock:
                session.status = ABORTED
                session.result = {"error": f"{type(exc).__name__}: {exc}"}
                session.log({"event": "error", "message": session.result["error"]})
            return
        with session.lock:
            if session.status == DONE:
                return
            session.iteration += 1
            pairs = []
            for i, j in itertools.combinations(range(session.loop_cfg.k), 2):
                a, b = sol.configs[i], sol.configs[j]
                if a != b:
                    pairs.append((a, b))
            session.pending = pairs
            session.log({"event": "solved", "iteration": session.iteration,
                         "pairs": [[decode(session.work_spec, a), decode(session.work_spec, b)]
                                   for a, b in pairs]})
            if pairs:
                session.status = AWAITING
            elif session.iteration >= session.loop_cfg.T:
                self._finalize_locked(session)
            else:
                # duplicate-only solution: nothing to ask, move on
                self._schedule_solve(session)

    def _finalize_locked(self, session: Session):
        """Compute the k=1 recommendation; caller holds the session lock."""
        hp = session.hp
        rec_hp = Hyperparameters(max(hp.alpha, 1.0), hp.beta, hp.gamma)
        w, x = milp.recommend(session.work_spec, session.dataset, rec_hp,
                              session.solver_cfg)
        session.result = {
            "recommendation": render_configuration(session.spec, x),
            "weights": [round(float(v), 9) for v in w],
        }
        session.status = DONE
        session.pending = []
        session.log({"event": "finish", "iteration": session.iteration,
                     "recommendation": session.result["recommendation"]["assignment"]})

    # -- request handlers ----------------------------------------------------

    def next_query(self, sid: str):
        session = self.get(sid)
        with session.lock:
            if session.status == AWAITING and session.pending:
                a, b = session.pending[0]
                return {"pair": [render_configuration(session.spec, a),
                                 render_configuration(session.spec, b)],
                        "iteration": session.iteration,
                        "answered": session.answered,
                        "pending": len(session.pending)}
            if session.status == SOLVING:
                return None
            raise LookupError("session is finished")

    def submit_answer(self, sid: str, verdict: str) -> dict:
        session = self.get(sid)
        if verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")
        with session.lock:
            if session.status == DONE or session.status == ABORTED:
                raise LookupError("session is finished")
            if session.status != AWAITING or not session.pending:
                raise BlockingIOError("no pending query; poll /query")
            a, b = session.pending.pop(0)
            prefs = answer_to_preferences(QueryAnswer((a, b), verdict))
            session.dataset.extend(prefs)
            session.answered += 1
            session.log({
                "event": "answer", "verdict": verdict, "iteration": session.iteration,
                "pair": [decode(session.work_spec, a), decode(session.work_spec, b)],
                "preferences": [
                    {"kind": p.kind,
                     "better": list(decode(session.work_spec, p.better)),
                     "worse": list(decode(session.work_spec, p.worse))}
                    for p in prefs],
            })
            if not session.pending:
                if schedule(session.iteration, session.loop_cfg) \
                        and len(session.dataset) >= session.loop_cfg.cv_folds:
                    session.hp = cross_validate(
                        session.dataset, session.work_spec, session.loop_cfg,
                        session.solver_cfg, session.hp)
                if session.iteration >= session.loop_cfg.T:
                    self._finalize_locked(session)
                else:
                    self._schedule_solve(session)
            return {"status": session.status, "answered": session.answered}

    def finish(self, sid: str) -> dict:
        session = self.get(sid)
        future = session.solve_future
        if future is not None:
            future.result()  # join any in-flight solve before taking the lock
        with session.lock:
            if session.status == DONE and session.result is not None:
                return session.result
            self._finalize_locked(session)
            return session.result


def replay_preferences(log_path, catalog: dict[str, ProblemSpec] | None = None) -> list[Preference]:
    """Rebuild the preference dataset recorded in a session log."""
    catalog = catalog if catalog is not None else default_catalog()
    spec = None
    prefs: list[Preference] = []
    with open(log_path) as fh:
        for line in fh:
            rec = json.loads(line)
            if rec["event"] == "create":
                spec = catalog[rec["spec"]]
            elif rec["event"] == "answer":
                if spec is None:
                    raise ValueError("log has answers before the create record")
                for p in rec["preferences"]:
                    prefs.append(Preference(encode(spec, p["better"]),
                                            encode(spec, p["worse"]), p["kind"]))
    return prefs


def create_app(service: SessionService | None = None, **kwargs) -> FastAPI:
    service = service or SessionService(**kwargs)
    app = FastAPI(title="setmargin session service")
    app.state.service = service

    @app.get("/specs")
    def specs():
        return {
            "specs": [
                {"id": sid,
                 "attributes": [
                     {"name": a.name, "cardinality": a.cardinality,
                      **({"values": list(a.values)} if a.values else {})}
                     for a in spec.attributes],
                 "hasDerived": spec.cost is not None}
                for sid, spec in service.catalog.items()
            ]
        }

    @app.post("/sessions")
    def create(body: CreateBody):
        try:
            session = service.create_session(body.specId, body.k, body.T)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown spec {body.specId!r}")
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"sessionId": session.id}

    @app.get("/sessions/{sid}/query")
    def query(sid: str, response: Response):
        try:
            payload = service.next_query(sid)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        except LookupError:
            raise HTTPException(status_code=410, detail="session is finished")
        if payload is None:
            response.status_code = 202
            response.headers["Retry-After"] = "1"
            return {"status": SOLVING}
        return payload

    @app.post("/sessions/{sid}/answer")
    def answer(sid: str, body: AnswerBody):
        try:
            return service.submit_answer(sid, body.verdict)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except LookupError:
            raise HTTPException(status_code=410, detail="session is finished")
        except BlockingIOError:
            raise HTTPException(status_code=409, detail="no pending query; poll /query")

    @app.post("/sessions/{sid}/finish")
    def finish(sid: str):
        try:
            return service.finish(sid)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.get("/sessions/{sid}/status")
    def status(sid: str):
        try:
            session = service.get(sid)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        return {"status": session.status, "iteration": session.iteration,
                "answered": session.answered}

    return app
