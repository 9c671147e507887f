"""Phase Stretch Transform as a deterministic image standardization stage.

Images are treated as optical fields: a spectral phase kernel emulates
diffractive propagation, and the detected phase of the propagated field is
the refined, illumination-equalized output.
"""

from .core_types import (
    AmplitudeFilter,
    ColorPolicy,
    ComplexField,
    FrequencyGrid,
    ImageField,
    KernelFamily,
    KernelParams,
    Normalization,
    PhaseKernel,
    PhaseMap,
    RefineryConfig,
    RefineryError,
    SpectralField,
)
from .spectral import (
    build_frequency_grid,
    build_lowpass,
    build_pst_kernel,
    build_quadratic_kernel,
    forward_spectrum,
    inverse_spectrum,
)
from .transform import (
    apply_spectral_filters,
    detect_phase,
    laplacian_reference,
    normalize_output,
    pst,
    pst_phase,
    small_phase_convergence,
    small_phase_reference,
)

__version__ = "0.1.0"
