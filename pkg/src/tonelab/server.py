"""HTTP front for the survey engine.

POST /sessions creates a plan, GET /sessions/{id}/next serves the current
task (idempotent until answered), POST /sessions/{id}/responses appends a
response, GET /scales lists the loaded scales, GET /images/{id} streams a
stimulus image from the asset directory. Swatch hex values are served
verbatim from the scale definitions; no display transformation happens
server side.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse
from pydantic import BaseModel

from .scales import scale_to_json
from .survey import (
    DuplicateResponseError,
    ResponseRangeError,
    SessionCompleteError,
    StaleTaskError,
    SurveyEngine,
    UnknownSessionError,
)


class CreateSessionRequest(BaseModel):
    rater_id: str
    study: int
    seed: int | None = None


class SubmitResponseRequest(BaseModel):
    task_id: str
    response: int | str


def create_app(engine: SurveyEngine, asset_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="tonelab survey service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    assets = Path(asset_dir) if asset_dir else None
    stimuli_by_id = {s.image_id: s for s in engine.stimuli}

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        try:
            plan = engine.create_session(req.rater_id, req.study, req.seed)
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return {
            "session_id": plan.session_id,
            "rater_id": plan.rater_id,
            "study": plan.study,
            "background": plan.background,
            "scale_order": list(plan.scale_order),
            "n_tasks": len(plan.tasks),
        }

    @app.get("/sessions/{session_id}/next")
    def next_task(session_id: str):
        try:
            return engine.next_task(session_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.post("/sessions/{session_id}/responses")
    def submit_response(session_id: str, req: SubmitResponseRequest):
        try:
            record = engine.submit_response(session_id, req.task_id, req.response)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        except DuplicateResponseError as e:
            raise HTTPException(status_code=409, detail=str(e))
        except (StaleTaskError, SessionCompleteError) as e:
            raise HTTPException(status_code=409, detail=str(e))
        except ResponseRangeError as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"accepted": True, "task_id": record.task_id, "kind": record.kind}

    @app.get("/scales")
    def list_scales():
        return {"scales": [scale_to_json(s) for s in engine.scales.values()]}

    @app.get("/images/{image_id}")
    def get_image(image_id: str):
        stim = stimuli_by_id.get(image_id)
        if stim is None:
            raise HTTPException(status_code=404, detail=f"unknown image {image_id}")
        if assets is None:
            raise HTTPException(status_code=404, detail="no asset directory configured")
        path = (assets / Path(stim.file).name) if stim.file else (assets / f"{image_id}.png")
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"missing asset {path.name}")
        return FileResponse(path)

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    return app
