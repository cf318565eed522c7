"""Variational image denoising and deblurring with fast gradient descent.

Core pieces: a square image lattice with exact adjoint gradient/divergence
operators, Huber and Tukey edge-preserving penalties with an adaptive
switching threshold, FFT-based circulant blur operators, a gradient-descent
engine with steepest / lagged / half-lagged step policies, preconditioned CG
with an IRLS outer loop, and the composite restoration pipelines on top.
"""

__version__ = "0.1.0"

from .blur import (
    PsfKernel,
    PsfKind,
    TransferFunction,
    adjoint_map,
    custom_psf,
    delta_psf,
    direct_convolve,
    disk_psf,
    embed,
    forward_map,
    gaussian_psf,
    laplacian_psf,
    load_psf_text,
    log_psf,
    make_psf,
    motion_psf,
    parse_psf_spec,
    save_psf_text,
    unsharp_psf,
)
from .errors import (
    BetaEstimationError,
    ConvergenceError,
    DivergenceError,
    StepSizeError,
)
from .grid import (
    GradientField,
    ImageGrid,
    NoiseSpec,
    add_gaussian_noise,
    divergence,
    gradient,
    misfit,
    psnr,
    relative_error,
)
from .logs import write_log
from .pgm import (
    MalformedHeaderError,
    PgmError,
    TruncatedPayloadError,
    UnsupportedMaxvalError,
    read_image,
    write_image,
)
from .pipelines import (
    PipelineReport,
    StageLog,
    deblur,
    denoise_explicit,
    denoise_hybrid,
    estimate_beta,
    restore_split,
    sharpen_tukey,
)
from .regularization import (
    RegKind,
    RegularizerSpec,
    adaptive_threshold,
    apply_lagged_diffusion,
    diffusion_apply,
    edge_stop,
    edge_stop_field,
    reg_gradient,
    reg_value,
    rho,
    rho_prime,
)
from .solvers import (
    DescentResult,
    DescentState,
    IrlsResult,
    IterationRecord,
    Mode,
    PolicyKind,
    ProblemSpec,
    StepPolicy,
    StopRule,
    apply_frozen_hessian,
    cg_solve,
    descent_run,
    irls_solve,
    objective_gradient,
    objective_value,
    rayleigh_step,
    sd_quotient,
    step_size,
)
