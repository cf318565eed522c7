"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from ..grid import ImageGrid


class ImagePayload(BaseModel):
    """Square grayscale image as nested rows of real intensities."""

    pixels: list[list[float]]

    @field_validator("pixels")
    @classmethod
    def _square(cls, pixels):
        side = len(pixels)
        if side < 2 or any(len(row) != side for row in pixels):
            raise ValueError("pixels must form a square array with side >= 2")
        if not all(math.isfinite(x) for row in pixels for x in row):
            raise ValueError("pixels must be finite")
        return pixels

    def to_grid(self) -> ImageGrid:
        return ImageGrid(np.asarray(self.pixels, dtype=np.float64))

    @classmethod
    def from_grid(cls, image: ImageGrid) -> "ImagePayload":
        return cls(pixels=image.values.tolist())


class PsfSpecModel(BaseModel):
    """Structured PSF parameters; mirrors the CLI type:params syntax."""

    kind: Literal["motion", "log", "disk", "unsharp", "gaussian", "laplacian", "delta"]
    length: Optional[float] = Field(default=None, description="motion length, pixels")
    theta: Optional[float] = Field(default=None, description="motion angle, degrees")
    sigma: Optional[float] = None
    hsize: Optional[int] = None
    radius: Optional[float] = None
    alpha: Optional[float] = None


class RecordModel(BaseModel):
    k: int
    tau: float
    rel_err: float
    misfit: float
    objective: float


class StageModel(BaseModel):
    name: str
    iterations: int
    seconds: float
    records: list[RecordModel]


class RestorationResponse(BaseModel):
    image: ImagePayload
    stages: list[StageModel]
    beta_used: Optional[float] = None


class DenoiseRequest(BaseModel):
    image: ImagePayload
    mode: Literal["explicit", "hybrid", "sharpen"] = "explicit"
    policy: Literal["sd", "lsd", "hlsd", "fixed"] = "lsd"
    fixed_tau: Optional[float] = Field(default=None, gt=0)
    reg: Literal["huber", "tukey"] = "huber"
    threshold: Optional[float] = Field(default=None, gt=0)
    tol: float = Field(default=1e-4, gt=0)
    max_iters: int = Field(default=2000, ge=1)
    irls_iters: int = Field(default=3, ge=1)
    sharpen_steps: int = Field(default=10, ge=1)


class DeblurRequest(BaseModel):
    image: ImagePayload
    psf: PsfSpecModel
    beta: float = Field(gt=0)
    policy: Literal["sd", "lsd", "hlsd", "fixed"] = "lsd"
    fixed_tau: Optional[float] = Field(default=None, gt=0)
    tol: float = Field(default=1e-4, gt=0)
    max_iters: int = Field(default=2000, ge=1)


class RestoreRequest(BaseModel):
    image: ImagePayload
    psf: PsfSpecModel
    beta: float = Field(gt=0)
    pre_tol: float = Field(default=1e-4, gt=0, lt=1)
    sharpen_steps: int = Field(default=10, ge=1)
    tol: float = Field(default=1e-4, gt=0)
    max_iters: int = Field(default=2000, ge=1)


class BlurRequest(BaseModel):
    image: ImagePayload
    psf: PsfSpecModel
    eta: float = Field(default=0.0, ge=0)
    seed: int = 0


class NoiseRequest(BaseModel):
    image: ImagePayload
    eta: float = Field(ge=0)
    seed: int = 0


class ImageResponse(BaseModel):
    image: ImagePayload


class PsfResponse(BaseModel):
    kind: str
    taps: list[list[float]]
    center: tuple[int, int]


class MetricsRequest(BaseModel):
    image: ImagePayload
    reference: ImagePayload


class MetricsResponse(BaseModel):
    misfit: float
    relative_error: float
    psnr: Optional[float] = Field(default=None, description="null when images are identical")


class HealthResponse(BaseModel):
    status: str
    version: str
