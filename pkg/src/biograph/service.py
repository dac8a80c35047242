"""HTTP JSON API: search, person/timeline/fact retrieval, visualization
data, provenance chains, and branchable navigation sessions.

Every endpoint serializes through views.canonical_json, so responses are
byte-identical to the CLI's --json output for the same workspace. The
graph store is never mutated here; sessions live in their own
append-only log.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import Response

from .errors import BiographError
from .views import (
    ViewError,
    Workspace,
    canonical_json,
    climax_payload,
    fact_payload,
    participation_payload,
    person_bundle,
    provenance_payload,
    search,
    timeline_payload,
)

ENV_ADDR = "BGF_ADDR"
ENV_STORE = "BGF_STORE"
ENV_SESSIONS = "BGF_SESSIONS"

_STATUS = {"not-found": 404, "bad-request": 400, "bad-facet": 400}


# ---------------------------------------------------------------------------
# Navigation sessions


@dataclass(frozen=True)
class SessionStep:
    step_id: str
    parent: str | None
    op: dict
    created_at: float


class SessionError(BiographError):
    pass


class SessionLog:
    """Tree-shaped navigation history, persisted as an append-only log.

    Steps only ever get appended; the pointer of a session is the step
    appended last. Branching appends a new step under any existing one.
    """

    def __init__(self, path: str | Path | None = None, clock=time.time):
        self.path = Path(path) if path is not None else None
        self.clock = clock
        self._sessions: dict[str, list[SessionStep]] = {}
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                self._sessions.setdefault(rec["session"], []).append(
                    SessionStep(rec["step"], rec.get("parent"), rec["op"], rec["createdAt"])
                )

    def _append(self, session_id: str, step: SessionStep) -> None:
        self._sessions.setdefault(session_id, []).append(step)
        if self.path is not None:
            rec = {
                "session": session_id,
                "step": step.step_id,
                "parent": step.parent,
                "op": step.op,
                "createdAt": step.created_at,
            }
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")

    def _steps(self, session_id: str) -> list[SessionStep]:
        steps = self._sessions.get(session_id)
        if steps is None:
            raise SessionError(f"unknown session: {session_id}")
        return steps

    def create(self, op: dict) -> tuple[str, str]:
        session_id = f"s{len(self._sessions) + 1}"
        while session_id in self._sessions:
            session_id = f"s{int(session_id[1:]) + 1}"
        step = SessionStep("step-0", None, op, self.clock())
        self._append(session_id, step)
        return session_id, step.step_id

    def step(self, session_id: str, op: dict) -> str:
        steps = self._steps(session_id)
        parent = steps[-1].step_id
        new = SessionStep(f"step-{len(steps)}", parent, op, self.clock())
        self._append(session_id, new)
        return new.step_id

    def branch(self, session_id: str, from_step: str, op: dict) -> str:
        steps = self._steps(session_id)
        if from_step not in {s.step_id for s in steps}:
            raise SessionError(f"unknown step: {from_step}")
        new = SessionStep(f"step-{len(steps)}", from_step, op, self.clock())
        self._append(session_id, new)
        return new.step_id

    def pointer(self, session_id: str) -> str:
        return self._steps(session_id)[-1].step_id

    def tree(self, session_id: str) -> dict:
        steps = self._steps(session_id)
        return {
            "sessionId": session_id,
            "pointer": steps[-1].step_id,
            "steps": [
                {
                    "stepId": s.step_id,
                    "parent": s.parent,
                    "op": s.op,
                    "createdAt": s.created_at,
                }
                for s in steps
            ],
        }

    def path_to_pointer(self, session_id: str) -> list[SessionStep]:
        steps = self._steps(session_id)
        by_id = {s.step_id: s for s in steps}
        chain = [steps[-1]]
        while chain[-1].parent is not None:
            chain.append(by_id[chain[-1].parent])
        chain.reverse()
        return chain


def compose_request(path: list[SessionStep]) -> dict:
    """Fold a step path into one search request.

    The root op holds a full request; later steps either replace it
    ({"kind": "search", ...}) or merge facets ({"kind": "refine", ...}).
    """
    if not path:
        raise SessionError("empty step path")
    root = path[0].op
    request = dict(root.get("request", root))
    facets = {f: list(v) for f, v in (request.get("facets") or {}).items()}
    for step in path[1:]:
        op = step.op
        kind = op.get("kind", "refine")
        if kind == "search":
            request = dict(op.get("request", {}))
            facets = {f: list(v) for f, v in (request.get("facets") or {}).items()}
        elif kind == "refine":
            for fld, values in (op.get("facets") or {}).items():
                facets[fld] = list(values)
            if "q" in op:
                request["q"] = op["q"]
        else:
            raise SessionError(f"unknown operation kind: {kind!r}")
    request["facets"] = facets
    return request


def replay(ws: Workspace, log: SessionLog, session_id: str) -> dict:
    path = log.path_to_pointer(session_id)
    request = compose_request(path)
    return {
        "session": log.tree(session_id),
        "result": search(ws, request),
    }


# ---------------------------------------------------------------------------
# Application


def _json_response(payload: dict, status: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status,
        media_type="application/json",
    )


def _error(code: str, message: str, details=None) -> Response:
    payload = {"code": code, "message": message}
    if details is not None:
        payload["details"] = details
    return _json_response(payload, _STATUS.get(code, 400))


def create_app(ws: Workspace, sessions: SessionLog | None = None) -> FastAPI:
    log = sessions if sessions is not None else SessionLog()
    app = FastAPI(title="biograph", openapi_url=None)

    @app.exception_handler(ViewError)
    async def _view_error(_request: Request, exc: ViewError):
        return _error(exc.code, str(exc), exc.details)

    @app.exception_handler(SessionError)
    async def _session_error(_request: Request, exc: SessionError):
        code = "not-found" if "unknown" in str(exc) else "bad-request"
        return _error(code, str(exc))

    @app.post("/api/v1/search")
    async def _search(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error("bad-request", "request body must be JSON")
        return _json_response(search(ws, body))

    @app.get("/api/v1/person/{person_id}")
    async def _person(person_id: str):
        return _json_response(person_bundle(ws, person_id))

    @app.get("/api/v1/person/{person_id}/timeline")
    async def _timeline(person_id: str):
        return _json_response(timeline_payload(ws, person_id))

    @app.get("/api/v1/person/{person_id}/fact/{kind}")
    async def _fact(person_id: str, kind: str):
        return _json_response(fact_payload(ws, person_id, kind))

    @app.post("/api/v1/session")
    async def _session_create(request: Request):
        body = await request.json()
        session_id, step_id = log.create(body)
        return _json_response({"sessionId": session_id, "stepId": step_id})

    @app.post("/api/v1/session/{session_id}/step")
    async def _session_step(session_id: str, request: Request):
        body = await request.json()
        step_id = log.step(session_id, body)
        return _json_response({"sessionId": session_id, "stepId": step_id})

    @app.post("/api/v1/session/{session_id}/branch")
    async def _session_branch(session_id: str, request: Request):
        body = await request.json()
        from_step = body.get("fromStep")
        if not from_step:
            return _error("bad-request", "fromStep is required")
        op = body.get("op") or {}
        step_id = log.branch(session_id, from_step, op)
        return _json_response({"sessionId": session_id, "stepId": step_id})

    @app.get("/api/v1/session/{session_id}")
    async def _session_get(session_id: str):
        return _json_response(replay(ws, log, session_id))

    @app.get("/api/v1/viz/participation")
    async def _participation(request: Request):
        persons = request.query_params.getlist("person") or None
        types = request.query_params.getlist("type") or None
        return _json_response(participation_payload(ws, persons, types))

    @app.get("/api/v1/viz/climax")
    async def _climax(scoring: str = "participants"):
        if scoring not in ("participants", "events"):
            return _error("bad-request", f"unknown scoring: {scoring!r}")
        return _json_response(climax_payload(ws, count_events=scoring == "events"))

    @app.get("/api/v1/provenance/{entity:path}")
    async def _provenance(entity: str):
        return _json_response(provenance_payload(ws, entity))

    return app


def serve(ws: Workspace, addr: str, sessions_path: str | None = None) -> None:
    import uvicorn

    host, _, port = addr.rpartition(":")
    log = SessionLog(sessions_path)
    app = create_app(ws, log)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
