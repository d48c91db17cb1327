"""FastAPI application exposing the estimation pipeline.

Every endpoint is a pure function of its request body, so identical
requests return identical payloads; CSV rendering happens server-side to
keep the byte-level output format in one place.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..datasets import (
    LabeledDataset,
    dataset_from_csv,
    dataset_to_csv,
    make_experiment_dataset,
    make_fukunaga_dataset,
)
from ..estimators import (
    estimate_ber_upper_bound,
    estimate_functional,
    parametric_plugin,
    report_csv_header,
    report_csv_row,
    theoretical_bound_curves,
)
from ..functionals import default_eta_grid, posterior_map
from ..harness import (
    ExperimentConfig,
    render_aggregate_csv,
    render_raw_csv,
    render_theory_csv,
    run_bounds_experiment,
    run_divergence_experiment,
)
from ..optimize import FitConfig
from ..oracles import mc_integral_functional, true_ber, truth_manifest_header, truth_manifest_row
from .schemas import (
    BoundsRequest,
    BoundsResponse,
    CurvesRequest,
    CurvesResponse,
    EstimateRequest,
    EstimateResponse,
    ExperimentRequest,
    ExperimentResponse,
    GenerateRequest,
    GenerateResponse,
    OracleRequest,
    OracleResponse,
)

__all__ = ["create_app"]


def _dataset(params) -> LabeledDataset:
    if params.dataset_csv is not None:
        return dataset_from_csv(params.dataset_csv)
    if params.experiment is not None:
        return make_experiment_dataset(params.experiment, params.n // 2, params.d, params.seed)
    return make_fukunaga_dataset(params.fukunaga, params.n, params.seed)


def _specs(experiment, fukunaga, d):
    from ..datasets import experiment_specs, fukunaga_specs

    if experiment is not None:
        return experiment_specs(experiment, d), f"experiment{experiment}"
    return fukunaga_specs(fukunaga), f"fukunaga{fukunaga}"


def create_app() -> FastAPI:
    app = FastAPI(title="divbasis", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest):
        try:
            ds = _dataset(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return GenerateResponse(csv=dataset_to_csv(ds), n=ds.n, d=ds.d)

    @app.post("/estimate", response_model=EstimateResponse)
    def estimate(req: EstimateRequest):
        try:
            ds = _dataset(req)
            grid_kind = req.grid
            if grid_kind == "auto":
                grid_kind = "kl_clipped" if req.functional.startswith("kl") else "standard"
            if req.method == "parametric_plugin":
                report = parametric_plugin(ds, req.functional, seed=req.seed)
            elif req.method == "convex_bound":
                cfg = FitConfig(
                    k=req.k, lam=req.lam, grid=default_eta_grid(grid_kind), constraint="upper_bound"
                )
                report = estimate_ber_upper_bound(ds, cfg, seed=req.seed)
            else:
                cfg = FitConfig(k=req.k, lam=req.lam, grid=default_eta_grid(grid_kind))
                pm = posterior_map(req.functional, ds.p0, ds.p1)
                report = estimate_functional(ds, pm, cfg, req.method, seed=req.seed)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return EstimateResponse(
            value=report.value,
            method=report.method,
            functional=req.functional,
            k=report.k,
            lam=report.lam,
            n=report.n,
            seed=report.seed,
            csv=report_csv_header() + "\n" + report_csv_row(report) + "\n",
        )

    @app.post("/experiment", response_model=ExperimentResponse)
    def experiment(req: ExperimentRequest):
        try:
            cfg = ExperimentConfig(
                experiment=req.experiment,
                fukunaga=req.fukunaga,
                functional=req.functional,
                methods=tuple(req.methods),
                k=req.k,
                lam=req.lam,
                grid_kind=req.grid,
                n_values=tuple(req.n_values),
                trials=req.trials,
                seed_base=req.seed_base,
                d=req.d,
                oracle_draws=req.oracle_draws,
                oracle_seed=req.oracle_seed,
            )
            table = run_divergence_experiment(cfg)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return ExperimentResponse(
            truth=table.truth.value,
            truth_std_error=table.truth.std_error,
            raw_csv=render_raw_csv(table),
            aggregate_csv=render_aggregate_csv(table),
        )

    @app.post("/bounds", response_model=BoundsResponse)
    def bounds(req: BoundsRequest):
        try:
            cfg = ExperimentConfig(
                experiment=req.experiment,
                fukunaga=req.fukunaga,
                functional="ber",
                methods=("bc_bound", "mst_dp", "convex_bound"),
                k=req.k,
                lam=req.lam,
                grid_kind="standard",
                n_values=tuple(req.n_values),
                trials=req.trials,
                seed_base=req.seed_base,
                d=req.d,
                oracle_draws=req.oracle_draws,
                oracle_seed=req.oracle_seed,
            )
            table = run_bounds_experiment(cfg)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return BoundsResponse(
            true_ber=table.truth.value,
            raw_csv=render_raw_csv(table),
            aggregate_csv=render_aggregate_csv(table),
            theory_csv=render_theory_csv(table),
        )

    @app.post("/curves", response_model=CurvesResponse)
    def curves(req: CurvesRequest):
        try:
            cols = theoretical_bound_curves(req.k, req.lam)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        lines = ["eta,ber,bc,dp,convex"]
        for i in range(cols["eta"].size):
            lines.append(
                ",".join(
                    repr(float(cols[name][i])) for name in ("eta", "ber", "bc", "dp", "convex")
                )
            )
        return CurvesResponse(csv="\n".join(lines) + "\n")

    @app.post("/oracle", response_model=OracleResponse)
    def oracle(req: OracleRequest):
        try:
            (f0, f1), label = _specs(req.experiment, req.fukunaga, req.d)
            if req.functional == "ber":
                gt = true_ber(f0, f1, method="mc", n_draws=req.draws, seed=req.seed)
            else:
                pm = posterior_map(req.functional, 0.5, 0.5)
                gt = mc_integral_functional(f0, f1, pm, 0.5, req.draws, req.seed)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return OracleResponse(
            experiment=label,
            functional=req.functional,
            value=gt.value,
            std_error=gt.std_error,
            method=gt.method,
            mc_samples=gt.mc_samples,
            seed=req.seed,
            manifest_header=truth_manifest_header(),
            manifest_row=truth_manifest_row(label, req.functional, req.seed, gt),
        )

    return app
