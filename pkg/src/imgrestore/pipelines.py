"""Composite restoration procedures built from the descent and IRLS solvers.

* ``denoise_explicit``  -- smoothing flow from the data down to a tolerance.
* ``denoise_hybrid``    -- short explicit pre-denoise, weight estimation from
                           the discrepancy, then a few implicit IRLS steps.
* ``sharpen_tukey``     -- a handful of redescending-penalty steps that steepen
                           edges of an already-denoised image.
* ``deblur``            -- penalized least-squares descent against a blur
                           operator, started from the data.
* ``restore_split``     -- pre-denoise, deblur the cleaned data, then sharpen;
                           the remedy when both blur and real noise are present.
"""

from __future__ import annotations

import dataclasses
import time

import numpy as np

from .blur import PsfKernel, embed
from .errors import BetaEstimationError
from .grid import ImageGrid
from .regularization import (
    RegKind,
    RegularizerSpec,
    TUKEY_SCALE,
    adaptive_threshold,
    reg_gradient,
)
from .solvers import (
    IterationRecord,
    Mode,
    PolicyKind,
    ProblemSpec,
    StepPolicy,
    StopRule,
    descent_run,
    irls_solve,
)

LSD = StepPolicy(PolicyKind.LSD)
SD = StepPolicy(PolicyKind.SD)

_DEFAULT_STOP = StopRule(tol=1e-4, max_iters=2000)
# Effectively "run max_iters steps"; only an exactly-zero gradient exits early.
_NO_TOL = float(np.finfo(np.float64).tiny)


@dataclasses.dataclass(frozen=True)
class StageLog:
    name: str
    records: list[IterationRecord]
    seconds: float

    @property
    def iterations(self) -> int:
        return len(self.records)


@dataclasses.dataclass(frozen=True)
class PipelineReport:
    """Output image plus per-stage iteration logs and wall-clock timings."""

    output: ImageGrid
    stages: list[StageLog]
    beta_used: float | None = None

    @property
    def total_iterations(self) -> int:
        return sum(stage.iterations for stage in self.stages)

    def stage(self, name: str) -> StageLog:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    def all_records(self) -> list[IterationRecord]:
        return [rec for stage in self.stages for rec in stage.records]


def denoise_explicit(
    data: ImageGrid,
    policy: StepPolicy = LSD,
    stop: StopRule = _DEFAULT_STOP,
    reg: RegularizerSpec | None = None,
) -> PipelineReport:
    """Run the explicit smoothing flow starting from the data itself."""
    reg = reg or RegularizerSpec(RegKind.HUBER)
    prob = ProblemSpec(data_b=data, reg=reg, mode=Mode.PURE_DIFFUSION)
    t0 = time.perf_counter()
    result = descent_run(prob, policy, stop, start=data)
    dt = time.perf_counter() - t0
    return PipelineReport(result.image, [StageLog("denoise", result.records, dt)])


def estimate_beta(m_bar: ImageGrid, data: ImageGrid, reg: RegularizerSpec | None = None) -> float:
    """Regularization weight from the discrepancy of a roughly-denoised image.

    beta = -sum((m_bar - b)^2) / sum((m_bar - b) * reg_gradient(m_bar)):
    the weight that keeps the data discrepancy stationary under the implicit
    flow.  Positive whenever m_bar came from descent smoothing of b.  Raises
    :class:`BetaEstimationError` (degenerate=True) when nothing was smoothed
    away, or (degenerate=False) when the estimate comes out nonpositive.
    """
    reg = (reg or RegularizerSpec(RegKind.HUBER)).resolve(m_bar)
    diff = m_bar.values - data.values
    rm = reg_gradient(m_bar, reg).values
    denominator = float(np.vdot(diff, rm).real)
    guard = 1e-14 * float(np.vdot(data.values, data.values).real)
    if abs(denominator) <= guard:
        raise BetaEstimationError(
            "discrepancy denominator is numerically zero (no noise removed?)",
            degenerate=True,
        )
    beta = -float(np.vdot(diff, diff).real) / denominator
    if beta <= 0:
        raise BetaEstimationError(
            f"estimated weight {beta:.3e} is not positive; "
            "the smoothed image does not look like a descent iterate of the data"
        )
    return beta


def denoise_hybrid(
    data: ImageGrid,
    pre_tol: float = 1e-4,
    irls_iters: int = 3,
    policy: StepPolicy = LSD,
    pre_max_iters: int = 2000,
) -> PipelineReport:
    """Explicit pre-denoise, then estimate the weight, then implicit IRLS.

    If the weight estimate degenerates (noise-free or constant data) the
    implicit stage is skipped and the pre-denoised image is returned.
    """
    reg = RegularizerSpec(RegKind.HUBER)
    pre = denoise_explicit(data, policy, StopRule(pre_tol, pre_max_iters), reg)
    m_bar = pre.output
    try:
        beta = estimate_beta(m_bar, data, reg)
    except BetaEstimationError as exc:
        if exc.degenerate:
            return PipelineReport(m_bar, pre.stages)
        raise
    prob = ProblemSpec(data_b=data, reg=reg, beta=beta, mode=Mode.TIKHONOV)
    t0 = time.perf_counter()
    result = irls_solve(prob, start=m_bar, outer_iters=irls_iters)
    dt = time.perf_counter() - t0
    stages = pre.stages + [StageLog("irls", result.records, dt)]
    return PipelineReport(result.image, stages, beta_used=beta)


def sharpen_tukey(pre_denoised: ImageGrid, steps: int = 10) -> PipelineReport:
    """Sharpen edges with a fixed number of redescending-penalty SD steps.

    The Tukey threshold is fixed at entry from the input image.  Meant for
    images that have already been denoised: on raw noisy data the
    redescending penalty would preserve the noise spikes it should remove.
    A piecewise-constant image whose jumps all exceed the threshold is an
    exact fixed point.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    threshold = TUKEY_SCALE * adaptive_threshold(pre_denoised)
    reg = RegularizerSpec(RegKind.TUKEY, threshold)
    prob = ProblemSpec(data_b=pre_denoised, reg=reg, mode=Mode.PURE_DIFFUSION)
    t0 = time.perf_counter()
    result = descent_run(prob, SD, StopRule(_NO_TOL, steps), start=pre_denoised)
    dt = time.perf_counter() - t0
    return PipelineReport(result.image, [StageLog("sharpen", result.records, dt)])


def deblur(
    data: ImageGrid,
    psf: PsfKernel,
    beta: float,
    policy: StepPolicy = LSD,
    stop: StopRule = _DEFAULT_STOP,
) -> PipelineReport:
    """Penalized least-squares deblurring by gradient descent from the data."""
    if beta <= 0:
        raise ValueError("deblurring requires beta > 0")
    tf = embed(psf, data.side)
    reg = RegularizerSpec(RegKind.HUBER)
    prob = ProblemSpec(data_b=data, reg=reg, beta=beta, tf=tf, mode=Mode.TIKHONOV)
    t0 = time.perf_counter()
    result = descent_run(prob, policy, stop, start=data)
    dt = time.perf_counter() - t0
    return PipelineReport(result.image, [StageLog("deblur", result.records, dt)], beta_used=beta)


def restore_split(
    data: ImageGrid,
    psf: PsfKernel,
    beta: float,
    pre_tol: float = 1e-4,
    sharpen_steps: int = 10,
    stop: StopRule = _DEFAULT_STOP,
    policy: StepPolicy = LSD,
) -> PipelineReport:
    """Split restoration for noisy blurred data: denoise, deblur, sharpen.

    Stage 1 smooths the data to ``pre_tol`` (it exits immediately when there
    is nothing to smooth); stage 2 deblurs the cleaned data with the given
    weight under ``policy``; stage 3 applies ``sharpen_steps``
    redescending-penalty steps.
    """
    if beta <= 0:
        raise ValueError("restoration requires beta > 0")
    pre = denoise_explicit(data, LSD, StopRule(pre_tol, _DEFAULT_STOP.max_iters))
    deb = deblur(pre.output, psf, beta, policy, stop)
    sharp = sharpen_tukey(deb.output, sharpen_steps)
    stages = [
        StageLog("pre_denoise", pre.stages[0].records, pre.stages[0].seconds),
        StageLog("deblur", deb.stages[0].records, deb.stages[0].seconds),
        StageLog("sharpen", sharp.stages[0].records, sharp.stages[0].seconds),
    ]
    return PipelineReport(sharp.output, stages, beta_used=beta)
