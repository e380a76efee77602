import numpy as np
import pytest

from fluttercode.raster import RasterImage


def synthetic_scene(height: int, width: int, channels: int = 1,
                    seed: int = 1234) -> RasterImage:
    """Deterministic test scene with edges, texture, and smooth regions.

    Horizontal high-frequency content is deliberate: it is what a
    motion-blur kernel destroys and what deconvolution has to recover.
    Values stay inside [0.05, 0.95] so multiplicative deconvolution
    never touches its positivity clamp on the ground truth itself.
    """
    y, x = np.mgrid[0:height, 0:width]
    xf, yf = x / width, y / height
    img = 0.35 + 0.3 * np.sin(6.3 * xf) * np.cos(4.1 * yf)
    img += 0.25 * (((xf * 8).astype(int) % 2 == (yf * 8).astype(int) % 2)
                   & (xf > 0.55) & (yf < 0.45))
    img[(xf - 0.3) ** 2 + (yf - 0.6) ** 2 < 0.04] = 0.9
    img[(xf - 0.7) ** 2 + (yf - 0.75) ** 2 < 0.015] = 0.05
    img += 0.3 * (((xf * 40).astype(int) % 2) == 0) * ((xf < 0.4) & (yf > 0.6))
    rng = np.random.default_rng(seed)
    img = img + 0.05 * rng.standard_normal((height, width))
    lo, hi = img.min(), img.max()
    img = 0.05 + 0.9 * (img - lo) / (hi - lo)
    if channels == 3:
        shift = np.linspace(-0.02, 0.02, 3)
        img = np.clip(img[:, :, None] + shift[None, None, :], 0.05, 0.95)
    return RasterImage(img)


@pytest.fixture
def small_scene() -> RasterImage:
    return synthetic_scene(24, 40)


@pytest.fixture
def rgb_scene() -> RasterImage:
    return synthetic_scene(16, 28, channels=3)
