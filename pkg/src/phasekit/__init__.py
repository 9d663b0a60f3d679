"""Harmonic phase-space toolkit: Hermite-Gaussian bases, phase-space wavefunctions,
the closed-form overlap kernel and the momentum dispersion operator."""

__version__ = "0.1.0"

from .basis import (  # noqa: E402
    GaussianPacket,
    HermiteGaussian,
    OutOfDomain,
    SampledGrid,
    Superposition,
    eval_state,
    load_state,
    phi,
    phi_tilde,
    state_norm,
)
from .kernel import CapExceeded, TailTooHeavy, chi_closed, chi_equal_scale, chi_quadrature, kernel_transport  # noqa: E402
from .quadrature import Adaptive, GaussHermite, NonConvergence  # noqa: E402
from .scales import PhaseIndex, ScaleParam, dispersions  # noqa: E402
from .transform import Spectrum, phase_field, project, project_spectrum  # noqa: E402
