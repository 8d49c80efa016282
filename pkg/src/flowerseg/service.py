"""HTTP service for the scribble-annotation workflow.

One session holds one uploaded image plus its current stroke sets,
refinement parameters, and the last computed mask. Strokes arrive as
vector polylines and are rasterized here with a disk brush, so the
server is the single source of truth for the pixel sets refinement
uses. Mask responses are PNG bytes produced by the same encoder as the
CLI, byte for byte.

Sessions are kept in memory with TTL eviction; requests within one
session are serialized by a per-session lock while `/healthz` stays
lock-free.
"""

from __future__ import annotations

import io
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, Field

from .core import RasterImage, ScoreMap, SegMask, encode_mask_png
from .errors import CorruptData
from .rgr import RgrParams, refine, refine_from_scribbles
from .scorer import normalize, read_scoremap_pair

DEFAULT_MAX_UPLOAD = 32 * 1024 * 1024
DEFAULT_TTL_SECONDS = 3600.0


class Stroke(BaseModel):
    """One brush stroke; "erase" removes pixels from both classes."""

    label: Literal["fg", "bg", "erase"]
    radius: float = Field(ge=0)
    points: list[tuple[float, float]] = Field(min_length=1)


class StrokesRequest(BaseModel):
    strokes: list[Stroke] = Field(min_length=1)


class RefineRequest(BaseModel):
    mode: Literal["scribble", "scoremap"] | None = None
    tau0: float | None = None
    tau_b: float | None = None
    tau_f: float | None = None
    mc_runs: int | None = None
    seed_fraction: float | None = None
    theta: float | None = None
    rng_seed: int | None = None


class ParamsPatch(BaseModel):
    tau0: float


def stamp_stroke(target: np.ndarray, stroke: Stroke) -> None:
    """Rasterize one polyline with a disk brush into a boolean mask.

    A pixel is covered when its center lies within `radius` of any
    segment of the polyline; each vertex also stamps its rounded pixel,
    so a radius-0 dot covers exactly one pixel.
    """
    height, width = target.shape
    pts = [(float(x), float(y)) for x, y in stroke.points]
    for x, y in pts:
        xi, yi = round(x), round(y)
        if 0 <= xi < width and 0 <= yi < height:
            target[yi, xi] = True
    r = stroke.radius
    segments = list(zip(pts, pts[1:])) if len(pts) > 1 else [(pts[0], pts[0])]
    for (ax, ay), (bx, by) in segments:
        x_lo = max(0, int(np.floor(min(ax, bx) - r)))
        x_hi = min(width - 1, int(np.ceil(max(ax, bx) + r)))
        y_lo = max(0, int(np.floor(min(ay, by) - r)))
        y_hi = min(height - 1, int(np.ceil(max(ay, by) + r)))
        if x_lo > x_hi or y_lo > y_hi:
            continue
        xs = np.arange(x_lo, x_hi + 1, dtype=np.float64)
        ys = np.arange(y_lo, y_hi + 1, dtype=np.float64)
        gx, gy = np.meshgrid(xs, ys)
        dx, dy = bx - ax, by - ay
        seg_sq = dx * dx + dy * dy
        if seg_sq == 0.0:
            dist = np.hypot(gx - ax, gy - ay)
        else:
            t = np.clip(((gx - ax) * dx + (gy - ay) * dy) / seg_sq, 0.0, 1.0)
            dist = np.hypot(gx - (ax + t * dx), gy - (ay + t * dy))
        target[y_lo : y_hi + 1, x_lo : x_hi + 1] |= dist <= r


@dataclass
class Session:
    image: RasterImage
    name: str
    fg_strokes: np.ndarray
    bg_strokes: np.ndarray
    params: RgrParams
    prob_fg: ScoreMap | None = None
    mask: SegMask | None = None
    last_access: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)


def create_app(
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD,
    session_ttl_seconds: float = DEFAULT_TTL_SECONDS,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="flowerseg annotation service")
    # the browser UI may be served from elsewhere during development
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-Refine-Stats", "Content-Disposition"],
    )
    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    sessions: dict[str, Session] = {}
    store_lock = threading.Lock()

    def _purge(now: float) -> None:
        stale = [sid for sid, s in sessions.items() if now - s.last_access > session_ttl_seconds]
        for sid in stale:
            sessions.pop(sid, None)

    def _get(session_id: str) -> Session:
        now = time.monotonic()
        with store_lock:
            _purge(now)
            session = sessions.get(session_id)
            if session is None:
                raise HTTPException(status_code=404, detail="unknown session")
            session.last_access = now
            return session

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request, name: str = "session"):
        body = await request.body()
        if len(body) > max_upload_bytes:
            raise HTTPException(status_code=413, detail="image too large")
        try:
            with Image.open(io.BytesIO(body)) as im:
                if im.format not in ("PNG", "JPEG"):
                    raise HTTPException(status_code=415, detail=f"unsupported format {im.format}")
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
        except UnidentifiedImageError:
            raise HTTPException(status_code=415, detail="not a PNG or JPEG image")
        except HTTPException:
            raise
        except (OSError, SyntaxError, ValueError):
            raise HTTPException(status_code=415, detail="damaged image data")
        image = RasterImage(arr)
        session = Session(
            image=image,
            name=name,
            fg_strokes=np.zeros((image.height, image.width), dtype=bool),
            bg_strokes=np.zeros((image.height, image.width), dtype=bool),
            params=RgrParams(),
        )
        session_id = uuid.uuid4().hex
        with store_lock:
            _purge(time.monotonic())
            sessions[session_id] = session
        return {"session_id": session_id, "width": image.width, "height": image.height}

    @app.post("/sessions/{session_id}/strokes")
    def add_strokes(session_id: str, request: StrokesRequest):
        session = _get(session_id)
        with session.lock:
            for stroke in request.strokes:
                pixels = np.zeros_like(session.fg_strokes)
                stamp_stroke(pixels, stroke)
                if stroke.label == "fg":
                    session.fg_strokes |= pixels
                    session.bg_strokes &= ~pixels
                elif stroke.label == "bg":
                    session.bg_strokes |= pixels
                    session.fg_strokes &= ~pixels
                else:
                    session.fg_strokes &= ~pixels
                    session.bg_strokes &= ~pixels
            return {
                "fg_pixels": int(session.fg_strokes.sum()),
                "bg_pixels": int(session.bg_strokes.sum()),
            }

    @app.post("/sessions/{session_id}/scoremap")
    async def attach_scoremap(session_id: str, request: Request):
        """Attach raw fused score maps (.bsgs payload); they are softmax-
        normalized here, mirroring the pipeline."""
        session = _get(session_id)
        body = await request.body()
        if len(body) > 2 * max_upload_bytes:
            raise HTTPException(status_code=413, detail="score map too large")
        import tempfile

        with tempfile.NamedTemporaryFile(suffix=".bsgs") as tmp:
            tmp.write(body)
            tmp.flush()
            try:
                raw_fg, raw_bg = read_scoremap_pair(tmp.name)
            except CorruptData as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        with session.lock:
            if (raw_fg.height, raw_fg.width) != (session.image.height, session.image.width):
                raise HTTPException(
                    status_code=422,
                    detail=f"score map is {raw_fg.height}x{raw_fg.width}, image is "
                    f"{session.image.height}x{session.image.width}",
                )
            session.prob_fg = normalize(raw_fg, raw_bg)[0]
            return {"attached": True}

    def _apply_overrides(params: RgrParams, req: RefineRequest) -> RgrParams:
        fields = {
            "tau0": req.tau0, "tau_b": req.tau_b, "tau_f": req.tau_f,
            "mc_runs": req.mc_runs, "seed_fraction": req.seed_fraction,
            "theta": req.theta, "rng_seed": req.rng_seed,
        }
        updates = {k: v for k, v in fields.items() if v is not None}
        if not updates:
            return params
        try:
            return RgrParams(
                tau0=updates.get("tau0", params.tau0),
                tau_b=updates.get("tau_b", params.tau_b),
                tau_f=updates.get("tau_f", params.tau_f),
                mc_runs=updates.get("mc_runs", params.mc_runs),
                seed_fraction=updates.get("seed_fraction", params.seed_fraction),
                theta=updates.get("theta", params.theta),
                rng_seed=updates.get("rng_seed", params.rng_seed),
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    def _run_refinement(session: Session, mode: str) -> Response:
        if mode == "scribble":
            if not session.fg_strokes.any() or not session.bg_strokes.any():
                raise HTTPException(status_code=409, detail="need fg and bg strokes to refine")
            mask = refine_from_scribbles(
                session.image, session.fg_strokes, session.bg_strokes, session.params
            )
        else:
            if session.prob_fg is None:
                raise HTTPException(status_code=409, detail="no score map attached")
            mask = refine(session.image, session.prob_fg, session.params)
        session.mask = mask
        stats = {
            "mode": mode,
            "mc_runs": session.params.mc_runs,
            "tau0": session.params.tau0,
            "foreground_pixels": int(mask.values.sum()),
            "total_pixels": int(mask.values.size),
        }
        return Response(
            content=encode_mask_png(mask),
            media_type="image/png",
            headers={"X-Refine-Stats": json.dumps(stats)},
        )

    @app.post("/sessions/{session_id}/refine")
    def refine_session(session_id: str, request: RefineRequest | None = None):
        session = _get(session_id)
        req = request or RefineRequest()
        with session.lock:
            session.params = _apply_overrides(session.params, req)
            mode = req.mode
            if mode is None:
                mode = "scoremap" if session.prob_fg is not None else "scribble"
            return _run_refinement(session, mode)

    @app.patch("/sessions/{session_id}/params")
    def patch_params(session_id: str, patch: ParamsPatch):
        session = _get(session_id)
        if not 0.0 < patch.tau0 < 1.0:
            raise HTTPException(status_code=422, detail="tau0 must be in (0, 1)")
        with session.lock:
            if session.prob_fg is None:
                raise HTTPException(
                    status_code=409, detail="tau0 tuning needs an attached score map"
                )
            session.params = session.params.with_tau0(patch.tau0)
            return _run_refinement(session, "scoremap")

    @app.get("/sessions/{session_id}/export")
    def export_mask(session_id: str):
        session = _get(session_id)
        with session.lock:
            if session.mask is None:
                raise HTTPException(status_code=409, detail="no mask computed yet")
            return Response(
                content=encode_mask_png(session.mask),
                media_type="image/png",
                headers={
                    "Content-Disposition": f'attachment; filename="{session.name}.mask.png"'
                },
            )

    return app
