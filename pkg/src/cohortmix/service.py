"""HTTP facade over the design-optimization library.

Stateless JSON-in/JSON-out endpoints mirroring the CLI config schema; every
response carries schema_version and server-side timing. All numerical work
happens in the same library calls the CLI uses, so responses are
numerically identical to direct invocation.
"""

from __future__ import annotations

import math
import time

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .config import emit_design, parse_design, parse_effect
from .design import DegenerateDesignError
from .distributions import ConfigurationError
from .inference import cox_criterion
from .objective import CurveObjective
from .optimize import InfeasibleDesignError, optimize_curve

SCHEMA_VERSION = "1"
WALL_TIME_BUDGET_S = 5.0
PREVIEW_POINTS = 201


def _jsonable(x):
    if isinstance(x, float):
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
    return x


def _series(values) -> list:
    return [_jsonable(float(v)) for v in values]


def _error(status: int, message: str, fields=None):
    body = {"schema_version": SCHEMA_VERSION, "error": message}
    if fields:
        body["fields"] = fields
    return JSONResponse(status_code=status, content=body)


def create_app() -> FastAPI:
    app = FastAPI(title="cohortmix", version=__version__)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/v1/health")
    def health():
        return {"schema_version": SCHEMA_VERSION, "status": "ok",
                "version": __version__}

    async def _design_from(request: Request):
        body = await request.json()
        if not isinstance(body, dict) or "design" not in body:
            raise ConfigurationError("payload must be an object with a 'design' key")
        return body, parse_design(body["design"])

    @app.post("/v1/preview")
    async def preview(request: Request):
        t0 = time.perf_counter()
        try:
            body, design = await _design_from(request)
        except ConfigurationError as exc:
            return _error(400, str(exc))
        extra = set(body) - {"design"}
        if extra:
            return _error(400, f"unknown payload keys: {sorted(extra)}")
        grid = np.linspace(0.0, design.tau, PREVIEW_POINTS)
        wvals = np.asarray(design.weight.pdf(grid), dtype=float)
        wvals = np.where(np.isfinite(wvals), wvals, np.nan)
        return {
            "schema_version": SCHEMA_VERSION,
            "echo": {"design": emit_design(design)},
            "grid": _series(grid),
            "survival": _series(design.survival.sf(grid)),
            "arrival_cdf": _series(design.arrival.cdf(grid)),
            "weight": _series(wvals),
            "timing_ms": 1000.0 * (time.perf_counter() - t0),
        }

    @app.post("/v1/optimize/estimation")
    async def optimize_estimation(request: Request):
        t0 = time.perf_counter()
        try:
            body, design = await _design_from(request)
        except ConfigurationError as exc:
            return _error(400, str(exc))
        extra = set(body) - {"design"}
        if extra:
            return _error(400, f"unknown payload keys: {sorted(extra)}")
        try:
            ev = CurveObjective(design)
            result = optimize_curve(design, evaluator=ev)
            grid = np.linspace(0.0, design.tau, PREVIEW_POINTS)
            curve_opt = ev.variance_curve(grid, result.pi_opt)
            curve_even = ev.variance_curve(grid, 0.5)
        except (InfeasibleDesignError, DegenerateDesignError) as exc:
            return _error(422, str(exc))
        elapsed = time.perf_counter() - t0
        if elapsed > WALL_TIME_BUDGET_S:
            return _error(503, "computation exceeded the wall-time budget; "
                               "retry with a coarser design")
        payload = result.to_payload()
        payload["are_table"] = [
            {"pi": row["pi"], "are": _jsonable(row["are"]) if isinstance(row["are"], float) else row["are"]}
            for row in payload["are_table"]
        ]
        return {
            "schema_version": SCHEMA_VERSION,
            "echo": {"design": emit_design(design)},
            "result": payload,
            "curves": {
                "grid": _series(grid),
                "optimal": _series(curve_opt.values),
                "even_mix": _series(curve_even.values),
            },
            "timing_ms": 1000.0 * elapsed,
        }

    @app.post("/v1/optimize/inference")
    async def optimize_inference(request: Request):
        t0 = time.perf_counter()
        try:
            body = await request.json()
            if not isinstance(body, dict) or "design" not in body:
                raise ConfigurationError("payload must be an object with a 'design' key")
            extra = set(body) - {"design", "effect", "alpha"}
            if extra:
                raise ConfigurationError(f"unknown payload keys: {sorted(extra)}")
            design = parse_design(body["design"])
            effect = parse_effect(body["effect"]) if "effect" in body else None
            alpha = body.get("alpha", 0.05)
            if not isinstance(alpha, (int, float)) or not (0 < alpha < 1):
                raise ConfigurationError("alpha must lie in (0, 1)")
        except ConfigurationError as exc:
            return _error(400, str(exc))
        try:
            decision = cox_criterion(design, effect=effect, alpha=float(alpha))
        except DegenerateDesignError as exc:
            return _error(422, str(exc))
        payload = {k: _jsonable(v) for k, v in decision.to_payload().items()}
        return {
            "schema_version": SCHEMA_VERSION,
            "echo": {"design": emit_design(design)},
            "result": payload,
            "timing_ms": 1000.0 * (time.perf_counter() - t0),
        }

    return app


app = create_app()
