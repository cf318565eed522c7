"""FastAPI service wrapping the restoration library.

Every endpoint is a stateless wrapper over the corresponding library call:
images travel as JSON arrays, iteration logs come back with the result.
Domain errors (bad parameters, solver failures) surface as HTTP 400 with
the library's message; schema violations are FastAPI's usual 422.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..blur import embed, forward_map, make_psf
from ..errors import BetaEstimationError, ConvergenceError, DivergenceError, StepSizeError
from ..grid import NoiseSpec, add_gaussian_noise, misfit, psnr, relative_error
from ..pipelines import (
    PipelineReport,
    deblur,
    denoise_explicit,
    denoise_hybrid,
    restore_split,
    sharpen_tukey,
)
from ..regularization import RegKind, RegularizerSpec
from ..solvers import PolicyKind, StepPolicy, StopRule
from .schemas import (
    BlurRequest,
    DeblurRequest,
    DenoiseRequest,
    HealthResponse,
    ImagePayload,
    ImageResponse,
    MetricsRequest,
    MetricsResponse,
    NoiseRequest,
    PsfResponse,
    PsfSpecModel,
    RecordModel,
    RestorationResponse,
    RestoreRequest,
    StageModel,
)

_DOMAIN_ERRORS = (
    ValueError,
    ZeroDivisionError,
    StepSizeError,
    DivergenceError,
    ConvergenceError,
    BetaEstimationError,
)


def _kernel(spec: PsfSpecModel):
    params = {
        "motion": lambda: {"length": spec.length, "theta_deg": spec.theta},
        "log": lambda: {"hsize": spec.hsize, "sigma": spec.sigma},
        "gaussian": lambda: {"hsize": spec.hsize, "sigma": spec.sigma},
        "disk": lambda: {"radius": spec.radius},
        "unsharp": lambda: {"alpha": spec.alpha},
        "laplacian": lambda: {"alpha": spec.alpha},
        "delta": lambda: {},
    }[spec.kind]()
    kwargs = {k: v for k, v in params.items() if v is not None}
    return make_psf(spec.kind, **kwargs)


def _policy(name: str, fixed_tau: float | None) -> StepPolicy:
    kind = PolicyKind(name)
    if kind is PolicyKind.FIXED:
        if fixed_tau is None:
            raise ValueError("fixed policy requires fixed_tau")
        return StepPolicy(kind, fixed_tau)
    return StepPolicy(kind)


def _restoration_response(report: PipelineReport) -> RestorationResponse:
    stages = [
        StageModel(
            name=s.name,
            iterations=s.iterations,
            seconds=s.seconds,
            records=[RecordModel(**vars(r)) for r in s.records],
        )
        for s in report.stages
    ]
    return RestorationResponse(
        image=ImagePayload.from_grid(report.output),
        stages=stages,
        beta_used=report.beta_used,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="imgrestore",
        version=__version__,
        description="Variational image denoising and deblurring service.",
    )

    def guard(fn, *args):
        try:
            return fn(*args)
        except _DOMAIN_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/psf", response_model=PsfResponse)
    def psf(spec: PsfSpecModel) -> PsfResponse:
        kernel = guard(_kernel, spec)
        return PsfResponse(
            kind=kernel.kind.value,
            taps=kernel.taps.tolist(),
            center=kernel.center,
        )

    @app.post("/blur", response_model=ImageResponse)
    def blur_endpoint(req: BlurRequest) -> ImageResponse:
        def run():
            image = req.image.to_grid()
            out = forward_map(image, embed(_kernel(req.psf), image.side))
            if req.eta > 0:
                out = add_gaussian_noise(out, NoiseSpec(req.eta, req.seed))
            return out

        return ImageResponse(image=ImagePayload.from_grid(guard(run)))

    @app.post("/noise", response_model=ImageResponse)
    def noise_endpoint(req: NoiseRequest) -> ImageResponse:
        def run():
            return add_gaussian_noise(req.image.to_grid(), NoiseSpec(req.eta, req.seed))

        return ImageResponse(image=ImagePayload.from_grid(guard(run)))

    @app.post("/denoise", response_model=RestorationResponse)
    def denoise_endpoint(req: DenoiseRequest) -> RestorationResponse:
        def run():
            image = req.image.to_grid()
            policy = _policy(req.policy, req.fixed_tau)
            stop = StopRule(req.tol, req.max_iters)
            reg = RegularizerSpec(RegKind(req.reg), req.threshold)
            if req.mode == "explicit":
                return denoise_explicit(image, policy, stop, reg)
            if req.mode == "hybrid":
                if reg.kind is not RegKind.HUBER:
                    raise ValueError("hybrid mode uses the Huber family")
                return denoise_hybrid(image, pre_tol=req.tol, irls_iters=req.irls_iters,
                                      policy=policy, pre_max_iters=req.max_iters)
            return sharpen_tukey(image, steps=req.sharpen_steps)

        return _restoration_response(guard(run))

    @app.post("/deblur", response_model=RestorationResponse)
    def deblur_endpoint(req: DeblurRequest) -> RestorationResponse:
        def run():
            return deblur(
                req.image.to_grid(),
                _kernel(req.psf),
                req.beta,
                _policy(req.policy, req.fixed_tau),
                StopRule(req.tol, req.max_iters),
            )

        return _restoration_response(guard(run))

    @app.post("/restore", response_model=RestorationResponse)
    def restore_endpoint(req: RestoreRequest) -> RestorationResponse:
        def run():
            return restore_split(
                req.image.to_grid(),
                _kernel(req.psf),
                req.beta,
                pre_tol=req.pre_tol,
                sharpen_steps=req.sharpen_steps,
                stop=StopRule(req.tol, req.max_iters),
            )

        return _restoration_response(guard(run))

    @app.post("/metrics", response_model=MetricsResponse)
    def metrics_endpoint(req: MetricsRequest) -> MetricsResponse:
        def run():
            a = req.image.to_grid()
            b = req.reference.to_grid()
            value = psnr(a, b)
            return MetricsResponse(
                misfit=misfit(a, b),
                relative_error=relative_error(a, b),
                psnr=value if math.isfinite(value) else None,
            )

        return guard(run)

    return app


app = create_app()
