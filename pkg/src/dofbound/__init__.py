"""Degrees-of-freedom analysis for the two-user MIMO interference channel
without transmitter channel state information: exact region computation,
full-CSI comparison, and Monte Carlo verification of the underlying
Gaussian information inequalities.
"""

__version__ = "0.1.0"

from .regions import (  # noqa: F401
    AntennaConfig,
    DofRegion,
    EmptyRegionError,
    HalfPlane,
    PreconditionError,
    UnboundedRegionError,
    Vertex,
    build_exact_region,
    build_exact_region_weak_interference,
    build_exact_region_weak_interference_alt,
    build_outer_bound,
    build_tdma_region,
    exactness_case,
    fullcsit_sum_dof,
    regions_equal,
    symmetric_dof_loss,
)
from .channels import (  # noqa: F401
    ChannelSampler,
    IsotropyReport,
    SvdTriple,
    check_isotropy,
    elementwise_min_diag,
    lemma1_decompose,
    sample_haar_unitary,
    sample_rayleigh,
)
from .gaussian import (  # noqa: F401
    GaussianSource,
    GeometricPair,
    InequalityReport,
    MonteCarloEstimate,
    SlopeFit,
    build_geometric_pair,
    check_lemma2,
    check_lemma3,
    check_theorem2,
    estimate_dof_slope,
    gaussian_mi,
    immse_mi,
    mac_sum_mi,
    mmse_gaussian,
)
