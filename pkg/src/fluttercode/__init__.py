"""Light-efficient flutter-shutter exposure codes.

Tools for designing binary exposure sequences whose motion-blur
kernels stay invertible: complement pairs that together catch all the
light, one-of-N interleaved codes, spectral conditioning scores, a
genetic-algorithm optimizer, and an end-to-end blur/deconvolution
simulation harness.
"""

from .sequences import (
    DEFAULT_LENGTH,
    DutyCycle,
    ExposureSequence,
    InterleavedCode,
    InvalidDigitError,
    LengthMismatchError,
    NotAPartitionError,
    complement,
    decode_word,
    duty_cycle,
    encode_word,
)
from .spectrum import (
    DEFAULT_N_FFT,
    FLOOR_DB,
    EmptyInputError,
    PowerSpectrum,
    combined_response,
    complement_spectrum_check,
    dft,
    min_db,
    power_spectrum,
)
from .optimize import (
    ArityUnsupportedError,
    GaConfig,
    GaResult,
    GaState,
    MeritKind,
    ga_init,
    ga_run,
    ga_step,
    merit,
    random_search,
)
from .raster import GeometryMismatchError, RasterImage, read_image, write_image
from .simulate import (
    EmptySequenceError,
    MotionPsf,
    SimCondition,
    SimulationReport,
    add_noise,
    blur,
    combine,
    restore_gain,
    richardson_lucy,
    rmse_psnr,
    run_experiment_matrix,
    sequence_to_psf,
)

__version__ = "0.1.0"
