"""Motion-blur capture simulation and deconvolution harness.

Models the full imaging chain for a horizontally moving scene captured
through a chopped shutter: the scene is attenuated by the duty cycle,
each row is convolved with the exposure kernel (full convolution, so
the frame widens by L-1 pixels), exposure-proportional Gaussian noise
is added, and the capture is deconvolved with Richardson-Lucy and gain
restored. Complement pairs and interleaved triplets are additionally
averaged, which beats any single capture because their noise is
uncorrelated.

The default experiment matrix compares a plain rect exposure against a
coded pair, an interleaved triplet, and three averaged short exposures,
reporting RMSE/PSNR of every reconstruction against the ground truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import convolve2d

from .raster import GeometryMismatchError, RasterImage, write_image
from .sequences import ExposureSequence, InterleavedCode
from . import reference_codes

RL_EPSILON = 1e-12
PSNR_CAP_DB = 300.0


class EmptySequenceError(ValueError):
    """An all-zero sequence has no light and no kernel."""


@dataclass(frozen=True)
class MotionPsf:
    """Normalized 1-D motion-blur kernel (unit sum, non-negative taps)."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("psf must be a non-empty 1-D tap vector")
        if np.any(taps < 0):
            raise ValueError("psf taps must be non-negative")
        if abs(taps.sum() - 1.0) > 1e-9:
            raise ValueError("psf taps must sum to 1")
        taps = taps.copy()
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    def __len__(self) -> int:
        return self.taps.size

    @classmethod
    def normalized(cls, raw) -> "MotionPsf":
        raw = np.asarray(raw, dtype=np.float64)
        total = raw.sum()
        if total <= 0:
            raise EmptySequenceError("kernel has no positive mass")
        return cls(raw / total)


def sequence_to_psf(seq: ExposureSequence) -> MotionPsf:
    """Each open chip becomes one tap of weight 1/ones; zeros stay zero."""
    if seq.ones() == 0:
        raise EmptySequenceError("all-zero sequence cannot form a psf")
    return MotionPsf.normalized(np.asarray(seq.bits, dtype=np.float64))


def _conv_full(pixels: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Row-wise full convolution of every channel; width grows by L-1."""
    kernel = taps[np.newaxis, :]
    return np.stack(
        [convolve2d(pixels[:, :, c], kernel, mode="full")
         for c in range(pixels.shape[2])],
        axis=2,
    )


def blur(img: RasterImage, psf: MotionPsf, dc: float) -> RasterImage:
    """Duty-cycle-attenuated capture: scale by dc, then convolve each row."""
    return RasterImage(_conv_full(img.pixels * dc, psf.taps))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def add_noise(img: RasterImage, nf: float, dc: float, seed) -> RasterImage:
    """Exposure-proportional Gaussian noise with mean = std = nf*dc.

    No clamping: negative excursions stay, exactly as captured data
    would enter the deconvolution.
    """
    if nf < 0:
        raise ValueError("noise factor must be >= 0")
    if nf == 0:
        return img
    rng = _as_rng(seed)
    level = nf * dc
    noise = level + level * rng.standard_normal(img.pixels.shape)
    return RasterImage(img.pixels + noise)


def _conv_same(pixels2d: np.ndarray, taps: np.ndarray, offset: int) -> np.ndarray:
    full = convolve2d(pixels2d, taps[np.newaxis, :], mode="full")
    return full[:, offset:offset + pixels2d.shape[1]]


def richardson_lucy(observed: RasterImage, psf: MotionPsf,
                    iterations: int) -> RasterImage:
    """Multiplicative Richardson-Lucy deconvolution, per channel.

    x <- x * corr(psf, obs / conv(psf, x)), starting from the observed
    image clamped to a small positive epsilon. The convolution is the
    centered crop of the full row convolution and the correlation uses
    the reversed kernel at the mirrored crop offset, which makes it the
    exact adjoint even for even-length kernels. Everything stays
    non-negative; iterations=0 returns the clamped observation.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    taps = psf.taps
    length = taps.size
    fwd_offset = (length - 1) // 2
    adj_offset = length - 1 - fwd_offset
    reversed_taps = taps[::-1]

    out = np.empty_like(observed.pixels)
    for c in range(observed.channels):
        obs = np.maximum(observed.pixels[:, :, c], RL_EPSILON)
        x = obs.copy()
        for _ in range(iterations):
            denom = _conv_same(x, taps, fwd_offset)
            ratio = obs / np.maximum(denom, RL_EPSILON)
            x = x * _conv_same(ratio, reversed_taps, adj_offset)
        out[:, :, c] = x
    return RasterImage(out)


def restore_gain(img: RasterImage, dc: float) -> RasterImage:
    """Undo the duty-cycle attenuation so outputs share one brightness."""
    if dc <= 0:
        raise ValueError("duty cycle must be positive")
    return RasterImage(img.pixels / dc)


def combine(images) -> RasterImage:
    """Per-sample arithmetic mean of same-geometry images."""
    images = list(images)
    if not images:
        raise ValueError("need at least one image")
    for other in images[1:]:
        if not images[0].same_geometry(other):
            raise GeometryMismatchError("combined images must share geometry")
    return RasterImage(np.mean([im.pixels for im in images], axis=0))


def rmse_psnr(a: RasterImage, b: RasterImage) -> tuple[float, float]:
    """Root-mean-square error over all samples and the matching PSNR in dB."""
    if not a.same_geometry(b):
        raise GeometryMismatchError(
            f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}"
        )
    rmse = float(np.sqrt(np.mean((a.pixels - b.pixels) ** 2)))
    if rmse == 0.0:
        return 0.0, PSNR_CAP_DB
    return rmse, min(float(20.0 * np.log10(1.0 / rmse)), PSNR_CAP_DB)


def pad_reference(truth: RasterImage, kernel_length: int) -> RasterImage:
    """Embed the ground truth in the blurred-frame geometry.

    The deconvolved estimate lands at the centered-crop alignment of the
    widened frame, columns [(L-1)//2, (L-1)//2 + width), so the reference
    is zero-padded to put the scene there.
    """
    offset = (kernel_length - 1) // 2
    h, w, c = truth.pixels.shape
    out = np.zeros((h, w + kernel_length - 1, c))
    out[:, offset:offset + w, :] = truth.pixels
    return RasterImage(out)


def interior_crop(img: RasterImage, kernel_length: int) -> RasterImage:
    """Drop the L-1 boundary columns on each side (padding-affected zone)."""
    margin = kernel_length - 1
    if img.width <= 2 * margin:
        raise ValueError("image too narrow for interior crop")
    return RasterImage(img.pixels[:, margin:img.width - margin, :])


@dataclass(frozen=True)
class ImageMetrics:
    """Full-frame error plus, when the frame is wide enough, a metric
    over the interior only (boundary ringing is a padding artifact)."""

    rmse: float
    psnr: float
    rmse_interior: float | None
    psnr_interior: float | None

    def to_dict(self) -> dict:
        return {
            "rmse": self.rmse,
            "psnr_db": self.psnr,
            "rmse_interior": self.rmse_interior,
            "psnr_interior_db": self.psnr_interior,
        }


def _measure(img: RasterImage, reference: RasterImage,
             kernel_length: int) -> ImageMetrics:
    rmse, psnr = rmse_psnr(img, reference)
    if img.width > 2 * (kernel_length - 1):
        rmse_i, psnr_i = rmse_psnr(interior_crop(img, kernel_length),
                                   interior_crop(reference, kernel_length))
    else:
        rmse_i = psnr_i = None
    return ImageMetrics(rmse, psnr, rmse_i, psnr_i)


@dataclass(frozen=True)
class SimCondition:
    """One capture setup: kernel, light fraction, noise, deconvolution depth."""

    name: str
    psf: MotionPsf
    duty_cycle: float
    noise_factor: float = 0.01
    rl_iterations: int = 20

    def __post_init__(self):
        if not 0.0 < self.duty_cycle <= 1.0:
            raise ValueError("duty cycle must be in (0, 1]")
        if self.noise_factor < 0:
            raise ValueError("noise factor must be >= 0")
        if self.rl_iterations < 0:
            raise ValueError("rl_iterations must be >= 0")


@dataclass(frozen=True)
class ConditionResult:
    condition: SimCondition
    blurred: RasterImage
    noisy: RasterImage
    restored: RasterImage
    metrics: ImageMetrics
    blurred_scaled_metrics: ImageMetrics


@dataclass(frozen=True)
class CombinedResult:
    name: str
    members: tuple[str, ...]
    image: RasterImage
    metrics: ImageMetrics


@dataclass(frozen=True)
class SimulationReport:
    seed: int
    conditions: dict[str, ConditionResult]
    combined: dict[str, CombinedResult]
    config: dict = field(default_factory=dict)

    def metrics_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config,
            "conditions": {
                name: {
                    "duty_cycle": r.condition.duty_cycle,
                    "noise_factor": r.condition.noise_factor,
                    "rl_iterations": r.condition.rl_iterations,
                    "kernel_length": len(r.condition.psf),
                    "restored": r.metrics.to_dict(),
                    "blurred_scaled": r.blurred_scaled_metrics.to_dict(),
                }
                for name, r in self.conditions.items()
            },
            "combined": {
                name: {"members": list(r.members), "metrics": r.metrics.to_dict()}
                for name, r in self.combined.items()
            },
        }


def run_condition(truth: RasterImage, cond: SimCondition, seed) -> ConditionResult:
    """blur -> noise -> Richardson-Lucy -> gain restore, with metrics."""
    blurred = blur(truth, cond.psf, cond.duty_cycle)
    noisy = add_noise(blurred, cond.noise_factor, cond.duty_cycle, seed)
    restored = restore_gain(
        richardson_lucy(noisy, cond.psf, cond.rl_iterations), cond.duty_cycle
    )
    reference = pad_reference(truth, len(cond.psf))
    metrics = _measure(restored, reference, len(cond.psf))
    scaled = restore_gain(noisy, cond.duty_cycle)
    scaled_metrics = _measure(scaled, reference, len(cond.psf))
    return ConditionResult(cond, blurred, noisy, restored, metrics, scaled_metrics)


def default_conditions(nf: float = 0.01, rl_iterations: int = 20,
                       pair_sequence: ExposureSequence | None = None,
                       triplet_code: InterleavedCode | None = None,
                       ) -> tuple[list[SimCondition], list[tuple[str, list[str]]]]:
    """The standard comparison matrix and its averaging groups.

    flat: rect exposure over the whole window (dc 1). coded/coded-inv: a
    broadband pattern and its complement, each at dc 0.25 (50% duty and
    another 50% lost to a polarizing shutter). s1..s3: the interleaved
    triplet, each at its own exact duty. a1..a3: three short rect
    exposures of a third of the window each.
    """
    if pair_sequence is None:
        pair_sequence = ExposureSequence.from_text(
            reference_codes.BROADBAND_PAIR_SEQUENCE)
    if triplet_code is None:
        triplet_code = InterleavedCode.from_word(reference_codes.TRIPLET_AVG_MIN)
    window = pair_sequence.length

    def cond(name, psf, dc):
        return SimCondition(name, psf, dc, noise_factor=nf,
                            rl_iterations=rl_iterations)

    conditions = [
        cond("flat", sequence_to_psf(ExposureSequence.flat(window)), 1.0),
        cond("coded", sequence_to_psf(pair_sequence), 0.25),
        cond("coded-inv", sequence_to_psf(pair_sequence.complement()), 0.25),
    ]
    # triplet sequences numbered in descending bit order, the customary
    # print order for these codes (s1 is the highest bit plane)
    planes = triplet_code.decode()
    for i, seq in enumerate(reversed(planes), start=1):
        conditions.append(cond(f"s{i}", sequence_to_psf(seq), float(seq.duty_cycle())))
    short = sequence_to_psf(ExposureSequence.flat(max(window // 3, 1)))
    for i in range(1, 4):
        conditions.append(cond(f"a{i}", short, 1.0 / 3.0))

    groups = [
        ("pair", ["coded", "coded-inv"]),
        ("triplet", [f"s{i}" for i in range(1, len(planes) + 1)]),
        ("short", ["a1", "a2", "a3"]),
    ]
    return conditions, groups


def run_experiment_matrix(truth: RasterImage, seed: int,
                          conditions: list[SimCondition] | None = None,
                          groups: list[tuple[str, list[str]]] | None = None,
                          nf: float = 0.01, rl_iterations: int = 20,
                          pair_sequence: ExposureSequence | None = None,
                          triplet_code: InterleavedCode | None = None,
                          ) -> SimulationReport:
    """Run every condition and average the configured groups.

    Condition i draws its noise from a generator seeded with
    SeedSequence(seed, spawn_key=(i,)), so results do not depend on
    evaluation order and stay bit-identical under any parallel schedule.
    """
    if conditions is None:
        conditions, default_groups = default_conditions(
            nf, rl_iterations, pair_sequence, triplet_code)
        if groups is None:
            groups = default_groups
    groups = groups or []

    results: dict[str, ConditionResult] = {}
    for i, cond in enumerate(conditions):
        if cond.name in results:
            raise ValueError(f"duplicate condition name {cond.name!r}")
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        results[cond.name] = run_condition(truth, cond, rng)

    combined: dict[str, CombinedResult] = {}
    for name, members in groups:
        if name in results:
            raise ValueError(f"group name {name!r} collides with a condition")
        missing = [m for m in members if m not in results]
        if missing:
            raise ValueError(f"group {name!r} references unknown conditions {missing}")
        image = combine([results[m].restored for m in members])
        kernel_length = len(results[members[0]].condition.psf)
        metrics = _measure(image, pad_reference(truth, kernel_length), kernel_length)
        combined[name] = CombinedResult(name, tuple(members), image, metrics)

    config = {
        "nf": nf,
        "rl_iterations": rl_iterations,
        "conditions": [c.name for c in conditions],
        "groups": {name: members for name, members in groups},
    }
    return SimulationReport(seed=seed, conditions=results, combined=combined,
                            config=config)


def write_report(report: SimulationReport, out_dir,
                 metrics: dict | None = None) -> list[Path]:
    """Write the capture/reconstruction file roster plus report.json.

    Per condition: blur-<name>.png (noisy capture), blur-<name>-scaled.png
    (gain-restored capture, only when dc != 1) and res-<name>.png. Per
    group: res-<name>.png of the average. `metrics` replaces the default
    report.json payload when a caller wants extra keys embedded.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name, img):
        path = out_dir / name
        write_image(path, img)
        written.append(path)

    for name, r in report.conditions.items():
        emit(f"blur-{name}.png", r.noisy)
        if r.condition.duty_cycle != 1.0:
            emit(f"blur-{name}-scaled.png",
                 restore_gain(r.noisy, r.condition.duty_cycle))
        emit(f"res-{name}.png", r.restored)
    for name, r in report.combined.items():
        emit(f"res-{name}.png", r.image)

    report_path = out_dir / "report.json"
    payload = report.metrics_dict() if metrics is None else metrics
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    written.append(report_path)
    return written
