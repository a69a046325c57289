"""Tools for lower bounds on the expected topology of random real hypersurfaces.

The package has two halves:

* exact-side: log-domain evaluation of the explicit constants that bound the
  expected number of components of a given topology from below (``constants``,
  ``pairs``, ``polycore``),
* empirical-side: seeded Gaussian polynomial ensembles, grid-based zero-set
  component counting, and the experiment harness that compares sample
  statistics against the predicted bounds (``ensembles``, ``zeroset``,
  ``lab``).
"""

from .constants import (
    LogReal,
    ExtremumResult,
    f_tau,
    f_tau_log,
    m_tau,
    g_R,
    rho_R,
    tau_pair,
    c_sigma_lower,
    ball_volume,
    ball_volume_factorial_bound,
    e_R_constant,
)
from .domains import Ball, Box
from .polycore import MultiPoly, fock_norm_sq, fock_basis_weight
from .pairs import (
    RegularPair,
    TransversalityWitness,
    sphere_pair,
    product_pair,
    verify_transversality,
    stability_check,
    barrier_rescale_check,
)
from .ensembles import (
    GaussianSampleSpec,
    FockField,
    sample_kostlan,
    sample_fock,
    kostlan_binary_diagonals,
    covariance_probe,
    fock_truncation_degree,
)
from .zeroset import (
    ComponentReport,
    real_root_count,
    projective_root_count,
    projective_root_counts,
    grid_components,
    sphere_components,
    compact_component_in_ball,
)
from .lab import (
    ExperimentConfig,
    ExperimentReport,
    run_kostlan_roots,
    run_kostlan_curves,
    run_sup_norm,
    run_local_presence,
    betti_lower_bound_report,
    packing_count,
    wilson_lower,
    audit,
    recompute,
)

__version__ = "0.1.0"
