"""Gradient-descent engine, step-size policies, preconditioned CG, and IRLS.

The objective is the penalized least-squares functional

    T(m) = 1/2 * h^2 * ||J m - b||^2 + beta * reg_value(m),

whose gradient under the h^2-weighted inner product is
Jt(Jm - b) + beta * reg_gradient(m).  In pure-diffusion mode the data term
is dropped entirely and descent integrates the smoothing flow from the data.

Step policies:

* SD    -- Rayleigh-quotient step <G,G>/<G,AG> with A the Hessian of the
           frozen-coefficient quadratic model at the current iterate.
* LSD   -- the same quotient evaluated entirely at the previous iterate
           (first step falls back to SD).
* HLSD  -- the SD quotient recomputed at even steps and reused at odd ones.
* FIXED -- a constant user-supplied step.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Callable

import numpy as np

from .blur import TransferFunction, adjoint_map, forward_map
from .errors import ConvergenceError, DivergenceError, StepSizeError
from .grid import ImageGrid, misfit, relative_error
from .regularization import (
    RegKind,
    RegularizerSpec,
    diffusion_apply,
    edge_stop_field,
    reg_gradient,
    reg_value,
)


class Mode(enum.Enum):
    TIKHONOV = "tikhonov"
    PURE_DIFFUSION = "pure_diffusion"


class PolicyKind(enum.Enum):
    SD = "sd"
    LSD = "lsd"
    HLSD = "hlsd"
    FIXED = "fixed"


@dataclasses.dataclass(frozen=True)
class StepPolicy:
    kind: PolicyKind
    fixed_tau: float | None = None

    def __post_init__(self):
        if self.kind is PolicyKind.FIXED:
            if self.fixed_tau is None or not math.isfinite(self.fixed_tau) or self.fixed_tau <= 0:
                raise ValueError("fixed policy requires fixed_tau > 0")
        elif self.fixed_tau is not None:
            raise ValueError("fixed_tau only applies to the fixed policy")


@dataclasses.dataclass(frozen=True)
class StopRule:
    """Terminate when the relative iterate change drops below tol."""

    tol: float
    max_iters: int

    def __post_init__(self):
        if not math.isfinite(self.tol) or self.tol <= 0:
            raise ValueError("tol must be finite and > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclasses.dataclass(frozen=True)
class ProblemSpec:
    """Restoration problem: data, blur operator, penalty, and weight."""

    data_b: ImageGrid
    reg: RegularizerSpec
    beta: float = 0.0
    tf: TransferFunction | None = None
    mode: Mode = Mode.TIKHONOV

    def __post_init__(self):
        if not math.isfinite(self.beta) or self.beta < 0:
            raise ValueError("beta must be finite and >= 0")
        if self.tf is not None and self.tf.side != self.data_b.side:
            raise ValueError("transfer function lattice does not match the data")
        if self.mode is Mode.PURE_DIFFUSION and self.tf is not None:
            raise ValueError("pure-diffusion mode has no blur operator")
        if self.mode is Mode.TIKHONOV and self.beta == 0 and self.tf is None:
            raise ValueError("identity-operator problem needs beta > 0")


@dataclasses.dataclass(frozen=True)
class IterationRecord:
    k: int
    tau: float
    rel_err: float
    misfit: float
    objective: float


@dataclasses.dataclass(frozen=True)
class DescentState:
    """Quantities a step policy may consult when choosing tau."""

    k: int
    iterate: ImageGrid
    gradient: ImageGrid
    sd_quotient: float | None = None
    prev_sd_quotient: float | None = None
    held_tau: float | None = None


@dataclasses.dataclass(frozen=True)
class DescentResult:
    image: ImageGrid
    records: list[IterationRecord]
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.records)


def _apply_J(values: np.ndarray, tf: TransferFunction | None) -> np.ndarray:
    if tf is None:
        return values
    return np.fft.ifft2(np.fft.fft2(values) * tf.spectrum).real


def _apply_Jt(values: np.ndarray, tf: TransferFunction | None) -> np.ndarray:
    if tf is None:
        return values
    return np.fft.ifft2(np.fft.fft2(values) * np.conj(tf.spectrum)).real


def objective_value(image: ImageGrid, prob: ProblemSpec, reg: RegularizerSpec | None = None) -> float:
    """T(m) in Tikhonov mode; the bare penalty in pure-diffusion mode."""
    reg = (reg or prob.reg).resolve(image)
    penalty = reg_value(image, reg)
    if prob.mode is Mode.PURE_DIFFUSION:
        return penalty
    residual = _apply_J(image.values, prob.tf) - prob.data_b.values
    data_term = 0.5 * image.h ** 2 * float(np.vdot(residual, residual).real)
    return data_term + prob.beta * penalty


def objective_gradient(image: ImageGrid, prob: ProblemSpec, reg: RegularizerSpec | None = None) -> ImageGrid:
    """Gradient of the objective at ``image`` (penalty threshold frozen here)."""
    reg = (reg or prob.reg).resolve(image)
    rg = reg_gradient(image, reg)
    if prob.mode is Mode.PURE_DIFFUSION:
        return rg
    residual = _apply_J(image.values, prob.tf) - prob.data_b.values
    return ImageGrid(_apply_Jt(residual, prob.tf) + prob.beta * rg.values)


def _frozen_hessian(prob: ProblemSpec, g_field: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """v -> JtJ v + beta * (-div(g grad v)) with the given coefficient field."""
    if prob.mode is Mode.PURE_DIFFUSION:
        return lambda v: diffusion_apply(g_field, ImageGrid(v)).values
    power = None if prob.tf is None else np.abs(prob.tf.spectrum) ** 2
    beta = prob.beta

    def apply_hessian(v: np.ndarray) -> np.ndarray:
        out = v if power is None else np.fft.ifft2(np.fft.fft2(v) * power).real
        if beta > 0:
            out = out + beta * diffusion_apply(g_field, ImageGrid(v)).values
        return out

    return apply_hessian


def apply_frozen_hessian(frozen: ImageGrid, v: ImageGrid, prob: ProblemSpec) -> ImageGrid:
    """Apply the quadratic-model operator JtJ + beta*L with L frozen at ``frozen``.

    Defined for the Huber family only (the reweighting coefficient); linear
    and symmetric positive semidefinite in v.
    """
    reg = prob.reg.resolve(frozen)
    if reg.kind is not RegKind.HUBER:
        raise ValueError("frozen quadratic operator requires the Huber family")
    if frozen.side != v.side:
        raise ValueError(f"lattice mismatch: {frozen.side} vs {v.side}")
    g_field = edge_stop_field(frozen, reg)
    return ImageGrid(_frozen_hessian(prob, g_field)(v.values))


def rayleigh_step(gradient_values: np.ndarray, apply_hessian: Callable[[np.ndarray], np.ndarray]) -> float:
    """Exact line-search step <G,G>/<G,AG> for a quadratic model."""
    num = float(np.vdot(gradient_values, gradient_values).real)
    den = float(np.vdot(gradient_values, apply_hessian(gradient_values)).real)
    if not math.isfinite(den) or den <= 0.0:
        raise StepSizeError(f"curvature term is {den:.3e}; step size undefined")
    return num / den


def sd_quotient(
    iterate: ImageGrid,
    grad: ImageGrid,
    prob: ProblemSpec,
    reg: RegularizerSpec | None = None,
) -> float:
    """Rayleigh-quotient step at ``iterate`` with coefficients frozen there."""
    reg = (reg or prob.reg).resolve(iterate)
    g_field = edge_stop_field(iterate, reg)
    return rayleigh_step(grad.values, _frozen_hessian(prob, g_field))


def step_size(policy: StepPolicy, state: DescentState, prob: ProblemSpec) -> float:
    """Choose tau for the step from ``state`` according to the policy."""
    if policy.kind is PolicyKind.FIXED:
        return float(policy.fixed_tau)
    current = state.sd_quotient
    if current is None and (
        policy.kind is PolicyKind.SD
        or (policy.kind is PolicyKind.LSD and (state.k == 0 or state.prev_sd_quotient is None))
        or (policy.kind is PolicyKind.HLSD and state.k % 2 == 0)
    ):
        current = sd_quotient(state.iterate, state.gradient, prob)
    if policy.kind is PolicyKind.SD:
        return current
    if policy.kind is PolicyKind.LSD:
        if state.k >= 1 and state.prev_sd_quotient is not None:
            return state.prev_sd_quotient
        return current
    # HLSD: recompute at even steps, reuse at odd ones.
    if state.k % 2 == 0:
        return current
    if state.held_tau is None:
        raise ValueError("half-lagged policy needs the held step at odd iterations")
    return state.held_tau


def descent_run(
    prob: ProblemSpec,
    policy: StepPolicy,
    stop: StopRule,
    start: ImageGrid,
) -> DescentResult:
    """Iterate m <- m - tau * G(m) until the stop rule fires.

    The penalty threshold (when adaptive) and the reweighting coefficients
    are refreshed from the current iterate once per step and frozen inside
    the step-size evaluation.  A zero gradient terminates immediately with
    converged status.  Non-finite iterates raise :class:`DivergenceError`.
    """
    if start.side != prob.data_b.side:
        raise ValueError("start image does not match the data lattice")
    m = start
    records: list[IterationRecord] = []
    prev_q: float | None = None
    held_tau: float | None = None
    converged = False

    for k in range(stop.max_iters):
        reg_k = prob.reg.resolve(m)
        grad_k = objective_gradient(m, prob, reg_k)
        if not float(np.vdot(grad_k.values, grad_k.values).real) > 0.0:
            converged = True
            break

        needs_quotient = policy.kind in (PolicyKind.SD, PolicyKind.LSD) or (
            policy.kind is PolicyKind.HLSD and k % 2 == 0
        )
        q = sd_quotient(m, grad_k, prob, reg_k) if needs_quotient else None
        state = DescentState(
            k=k,
            iterate=m,
            gradient=grad_k,
            sd_quotient=q,
            prev_sd_quotient=prev_q,
            held_tau=held_tau,
        )
        tau = step_size(policy, state, prob)
        prev_q = q
        if policy.kind is PolicyKind.HLSD and k % 2 == 0:
            held_tau = q

        next_values = m.values - tau * grad_k.values
        if not np.all(np.isfinite(next_values)):
            raise DivergenceError(k)
        m_next = ImageGrid(next_values)

        rel = relative_error(m_next, m)
        records.append(
            IterationRecord(
                k=k,
                tau=tau,
                rel_err=rel,
                misfit=misfit(m_next, prob.data_b),
                objective=objective_value(m_next, prob, reg_k),
            )
        )
        m = m_next
        if rel <= stop.tol:
            converged = True
            break

    return DescentResult(m, records, converged)


def _diffusion_diagonal(g_field: np.ndarray, h: float) -> np.ndarray:
    """Diagonal of -div(g grad .) with node-centered coefficients."""
    d = np.zeros_like(g_field)
    d[:, :-1] += g_field[:, :-1]
    d[:, 1:] += g_field[:, :-1]
    d[:-1, :] += g_field[:-1, :]
    d[1:, :] += g_field[:-1, :]
    return d / (h * h)


def cg_solve(
    frozen: ImageGrid,
    prob: ProblemSpec,
    rhs: ImageGrid,
    tol: float = 1e-6,
    max_iters: int = 500,
    x0: ImageGrid | None = None,
) -> ImageGrid:
    """Solve (JtJ + beta*L) x = rhs by Jacobi-preconditioned CG.

    L is the lagged-diffusion operator frozen at ``frozen`` (Huber family).
    Terminates when ||A x - rhs|| <= tol * ||rhs||; raises
    :class:`ConvergenceError` with the achieved residual otherwise.
    """
    reg = prob.reg.resolve(frozen)
    if reg.kind is not RegKind.HUBER:
        raise ValueError("CG solve requires the Huber family")
    if prob.mode is not Mode.TIKHONOV:
        raise ValueError("CG solve needs the positive definite data term")
    g_field = edge_stop_field(frozen, reg)
    apply_A = _frozen_hessian(prob, g_field)

    data_diag = 1.0 if prob.tf is None else float(np.mean(np.abs(prob.tf.spectrum) ** 2))
    diag = data_diag + prob.beta * _diffusion_diagonal(g_field, frozen.h)

    b = rhs.values
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return ImageGrid(np.zeros_like(b))
    x = np.zeros_like(b) if x0 is None else x0.values.copy()
    r = b - apply_A(x)
    z = r / diag
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    for _ in range(max_iters):
        if float(np.linalg.norm(r)) <= tol * norm_b:
            return ImageGrid(x)
        Ap = apply_A(p)
        alpha = rz / float(np.vdot(p, Ap).real)
        x = x + alpha * p
        r = r - alpha * Ap
        z = r / diag
        rz_next = float(np.vdot(r, z).real)
        p = z + (rz_next / rz) * p
        rz = rz_next
    achieved = float(np.linalg.norm(r)) / norm_b
    if achieved <= tol:
        return ImageGrid(x)
    raise ConvergenceError(max_iters, achieved)


@dataclasses.dataclass(frozen=True)
class IrlsResult:
    image: ImageGrid
    records: list[IterationRecord]


def irls_solve(
    prob: ProblemSpec,
    start: ImageGrid,
    outer_iters: int,
    cg_tol: float = 1e-6,
    cg_max_iters: int = 500,
) -> IrlsResult:
    """Iteratively reweighted least squares: freeze L, solve, repeat.

    Each outer iterate solves (JtJ + beta*L(m_k)) m = Jt b by CG, warm
    started from m_k, with the adaptive threshold re-derived from m_k.
    Records carry tau = 1.0 (one implicit unit step per outer iteration).
    """
    reg0 = prob.reg
    if reg0.kind is not RegKind.HUBER:
        raise ValueError("IRLS requires the Huber family")
    if prob.beta <= 0:
        raise ValueError("IRLS requires beta > 0")
    if outer_iters < 1:
        raise ValueError("outer_iters must be >= 1")

    rhs = ImageGrid(_apply_Jt(prob.data_b.values, prob.tf))
    m = start
    records: list[IterationRecord] = []
    for k in range(outer_iters):
        reg_k = reg0.resolve(m)
        m_next = cg_solve(m, prob, rhs, tol=cg_tol, max_iters=cg_max_iters, x0=m)
        records.append(
            IterationRecord(
                k=k,
                tau=1.0,
                rel_err=relative_error(m_next, m),
                misfit=misfit(m_next, prob.data_b),
                objective=objective_value(m_next, prob, reg_k),
            )
        )
        m = m_next
    return IrlsResult(m, records)
