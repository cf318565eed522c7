"""Command-line interface.

Thin dispatch onto the library: each subcommand validates its flags, reads
inputs, runs one pipeline, and only then writes outputs, so a failed run
never leaves partial files behind.  All randomness flows through ``--seed``;
rerunning an identical command line reproduces images and CSV logs
byte-for-byte.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import math
import sys

from .blur import (
    PsfKernel,
    delta_psf,
    disk_psf,
    embed,
    forward_map,
    gaussian_psf,
    laplacian_psf,
    log_psf,
    motion_psf,
    parse_psf_spec,
    save_psf_text,
    unsharp_psf,
)
from .grid import ImageGrid, NoiseSpec, add_gaussian_noise, misfit, psnr, relative_error
from .logs import write_log
from .pgm import read_image, write_image
from .pipelines import (
    PipelineReport,
    deblur,
    denoise_explicit,
    denoise_hybrid,
    restore_split,
    sharpen_tukey,
)
from .regularization import RegKind, RegularizerSpec
from .solvers import PolicyKind, StepPolicy, StopRule

_PSF_SYNTAX = (
    "PSF spec: motion:LEN:THETA | log:[HSIZE:]SIGMA | disk:RADIUS | "
    "unsharp:ALPHA | gaussian:[HSIZE:]SIGMA | laplacian:ALPHA | delta | file:PATH"
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imgrestore",
        description="Variational image denoising and deblurring (PGM in, PGM out).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("psf", help="generate a point spread function as a text matrix")
    p.add_argument("--type", required=True,
                   choices=["motion", "log", "disk", "unsharp", "gaussian", "laplacian", "delta"])
    p.add_argument("--len", type=float, dest="length", help="motion length in pixels")
    p.add_argument("--theta", type=float, help="motion angle, degrees counterclockwise")
    p.add_argument("--sigma", type=float, help="gaussian / log standard deviation")
    p.add_argument("--hsize", type=int, help="gaussian / log window size (odd)")
    p.add_argument("--radius", type=float, help="disk radius in pixels")
    p.add_argument("--alpha", type=float, help="unsharp / laplacian shape in [0, 1]")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_psf)

    p = sub.add_parser("blur", help="convolve an image with a PSF, optionally adding noise")
    _add_io(p)
    p.add_argument("--psf", required=True, help=_PSF_SYNTAX)
    _add_noise(p)
    p.set_defaults(handler=_cmd_blur)

    p = sub.add_parser("noise", help="add Gaussian noise at a percentage of image RMS")
    _add_io(p)
    _add_noise(p, required=True)
    p.set_defaults(handler=_cmd_noise)

    p = sub.add_parser("denoise", help="remove noise (explicit, hybrid, or sharpen mode)")
    _add_io(p)
    _add_noise(p)
    _add_solver(p)
    p.add_argument("--mode", choices=["explicit", "hybrid", "sharpen"], default="explicit")
    p.add_argument("--reg", choices=["huber", "tukey"], default="huber")
    p.add_argument("--threshold", type=float,
                   help="fixed switching threshold (default: adaptive per iterate)")
    p.add_argument("--irls-iters", type=int, default=3, help="hybrid mode: implicit steps")
    p.add_argument("--steps", type=int, default=10, help="sharpen mode: descent steps")
    p.set_defaults(handler=_cmd_denoise)

    p = sub.add_parser("deblur", help="deblur an image given its PSF")
    _add_io(p)
    p.add_argument("--psf", required=True, help=_PSF_SYNTAX)
    p.add_argument("--beta", type=float, required=True,
                   help="regularization weight (typical sweep: 1e-3, 1e-4, 1e-5)")
    _add_noise(p)
    _add_solver(p)
    p.set_defaults(handler=_cmd_deblur)

    p = sub.add_parser("restore", help="denoise + deblur + sharpen for noisy blurred data")
    _add_io(p)
    p.add_argument("--psf", required=True, help=_PSF_SYNTAX)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--pre-tol", type=float, default=1e-4,
                   help="relative-error tolerance of the pre-denoise stage")
    p.add_argument("--sharpen-steps", type=int, default=10)
    _add_noise(p)
    _add_solver(p)
    p.set_defaults(handler=_cmd_restore)

    p = sub.add_parser("metrics", help="report misfit / relative error / PSNR of two images")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_metrics)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_cmd_serve)

    return parser


def _add_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", required=True, help="input image (binary PGM)")
    p.add_argument("--out", required=True, help="output image (binary PGM)")
    p.add_argument("--log", help="write the iteration log as CSV")
    p.add_argument("--threads", type=int, help="cap internal thread pools")


def _add_noise(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--eta", type=float, default=None, required=required,
                   help="noise level, percent of image RMS")
    p.add_argument("--seed", type=int, default=0)


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", choices=["sd", "lsd", "hlsd", "fixed"], default="lsd")
    p.add_argument("--tau", type=float, help="step size for --policy fixed")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iters", type=int, default=2000)


def _policy(args) -> StepPolicy:
    kind = PolicyKind(args.policy)
    if kind is PolicyKind.FIXED:
        if args.tau is None:
            raise ValueError("--policy fixed requires --tau")
        return StepPolicy(kind, args.tau)
    if args.tau is not None:
        raise ValueError("--tau only applies to --policy fixed")
    return StepPolicy(kind)


def _load_input(args) -> ImageGrid:
    image = read_image(args.input)
    eta = getattr(args, "eta", None)
    if eta is not None:
        image = add_gaussian_noise(image, NoiseSpec(eta, args.seed))
    return image


def _emit(args, report: PipelineReport) -> None:
    for stage in report.stages:
        print(f"{stage.name}: {stage.iterations} iterations ({stage.seconds:.2f} s)")
    if report.beta_used is not None:
        print(f"beta = {report.beta_used:.6g}")
    write_image(report.output, args.out)
    if args.log:
        records = [dataclasses.replace(r, k=i) for i, r in enumerate(report.all_records())]
        if records:
            write_log(records, args.log)
        else:
            print("no iterations recorded; log not written")


def _cmd_psf(args) -> int:
    builders = {
        "motion": lambda: motion_psf(_req(args.length, "--len"), _req(args.theta, "--theta")),
        "log": lambda: log_psf(args.hsize, args.sigma if args.sigma is not None else 0.5),
        "disk": lambda: disk_psf(_req(args.radius, "--radius")),
        "unsharp": lambda: unsharp_psf(_req(args.alpha, "--alpha")),
        "gaussian": lambda: gaussian_psf(args.hsize, args.sigma if args.sigma is not None else 0.5),
        "laplacian": lambda: laplacian_psf(_req(args.alpha, "--alpha")),
        "delta": delta_psf,
    }
    kernel: PsfKernel = builders[args.type]()
    save_psf_text(kernel, args.out)
    print(f"{args.type} PSF {kernel.taps.shape[0]}x{kernel.taps.shape[1]} -> {args.out}")
    return 0


def _req(value, flag: str):
    if value is None:
        raise ValueError(f"{flag} is required for this PSF type")
    return value


def _cmd_blur(args) -> int:
    psf = parse_psf_spec(args.psf)
    noise = NoiseSpec(args.eta, args.seed) if args.eta is not None else None
    image = read_image(args.input)
    blurred = forward_map(image, embed(psf, image.side))
    if noise is not None:
        blurred = add_gaussian_noise(blurred, noise)
    write_image(blurred, args.out)
    return 0


def _cmd_noise(args) -> int:
    spec = NoiseSpec(args.eta, args.seed)
    image = read_image(args.input)
    write_image(add_gaussian_noise(image, spec), args.out)
    return 0


def _cmd_denoise(args) -> int:
    policy = _policy(args)
    stop = StopRule(args.tol, args.max_iters)
    reg = RegularizerSpec(RegKind(args.reg), args.threshold)
    image = _load_input(args)
    if args.mode == "explicit":
        report = denoise_explicit(image, policy, stop, reg)
    elif args.mode == "hybrid":
        if reg.kind is not RegKind.HUBER:
            raise ValueError("hybrid mode uses the Huber family")
        report = denoise_hybrid(image, pre_tol=args.tol, irls_iters=args.irls_iters,
                                policy=policy, pre_max_iters=args.max_iters)
    else:
        report = sharpen_tukey(image, steps=args.steps)
    _emit(args, report)
    return 0


def _cmd_deblur(args) -> int:
    policy = _policy(args)
    stop = StopRule(args.tol, args.max_iters)
    if args.beta <= 0:
        raise ValueError("--beta must be > 0")
    psf = parse_psf_spec(args.psf)
    image = _load_input(args)
    report = deblur(image, psf, args.beta, policy, stop)
    _emit(args, report)
    return 0


def _cmd_restore(args) -> int:
    policy = _policy(args)  # drives the deblur stage
    stop = StopRule(args.tol, args.max_iters)
    if args.beta <= 0:
        raise ValueError("--beta must be > 0")
    if args.pre_tol <= 0 or args.pre_tol >= 1:
        raise ValueError("--pre-tol must lie in (0, 1)")
    psf = parse_psf_spec(args.psf)
    image = _load_input(args)
    report = restore_split(image, psf, args.beta, pre_tol=args.pre_tol,
                           sharpen_steps=args.sharpen_steps, stop=stop, policy=policy)
    _emit(args, report)
    return 0


def _cmd_metrics(args) -> int:
    image = read_image(args.input)
    reference = read_image(args.ref)
    values = {
        "misfit": misfit(image, reference),
        "relative_error": relative_error(image, reference),
        "psnr": psnr(image, reference),
    }
    if args.json:
        safe = {k: (v if math.isfinite(v) else None) for k, v in values.items()}
        print(json.dumps(safe))
    else:
        for key, value in values.items():
            print(f"{key} = {value:.6g}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


@contextlib.contextmanager
def _thread_limit(threads: int | None):
    if threads is None:
        yield
        return
    if threads < 1:
        raise ValueError("--threads must be >= 1")
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=threads):
        yield


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        with _thread_limit(getattr(args, "threads", None)):
            return args.handler(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
