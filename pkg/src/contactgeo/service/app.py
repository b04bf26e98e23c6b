"""FastAPI wrapper over the analysis runner."""

from __future__ import annotations

from fastapi import FastAPI

from .models import (
    BatchReport,
    CurvatureRequest,
    EWRequest,
    ENGINE_VERSION,
    EngineSettings,
    InvariantsRequest,
    IsometryRequest,
    LiftRequest,
    Report,
    SelftestRequest,
    StructureDoc,
)
from .runner import (
    list_builtins,
    run_batch,
    run_curvature,
    run_ew,
    run_invariants,
    run_isometry,
    run_lift,
    run_selftest_task,
)


class BatchRequest(EngineSettings):
    structure: StructureDoc


def create_app() -> FastAPI:
    app = FastAPI(
        title="contactgeo",
        version=ENGINE_VERSION,
        description="Invariants, connections, curvature decompositions, "
        "Einstein-Weyl verdicts and isometry checks for contact "
        "sub-pseudo-Riemannian structures.",
    )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "engine_version": ENGINE_VERSION}

    @app.get("/builtins")
    def builtins() -> dict:
        return {"builtins": list_builtins()}

    @app.post("/invariants", response_model=Report)
    def invariants(req: InvariantsRequest) -> Report:
        return run_invariants(req)

    @app.post("/curvature", response_model=Report)
    def curvature(req: CurvatureRequest) -> Report:
        return run_curvature(req)

    @app.post("/einstein-weyl", response_model=Report)
    def einstein_weyl(req: EWRequest) -> Report:
        return run_ew(req)

    @app.post("/isometry", response_model=Report)
    def isometry(req: IsometryRequest) -> Report:
        return run_isometry(req)

    @app.post("/lift", response_model=Report)
    def lift(req: LiftRequest) -> Report:
        return run_lift(req)

    @app.post("/selftest", response_model=Report)
    def selftest(req: SelftestRequest) -> Report:
        return run_selftest_task(req)

    @app.post("/batch", response_model=BatchReport)
    def batch(req: BatchRequest) -> BatchReport:
        return run_batch(req.structure, req)

    return app


app = create_app()
