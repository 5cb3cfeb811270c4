"""Achievable-rate toolkit for the two-relay channel.

Evaluates and optimizes the rate of mixed decode-forward / rate-split
quantize-forward relaying, compares it against the no-split scheme, full
decode-forward, noisy network coding and the cut-set bound, and mechanically
verifies the projection of the underlying decoding constraint system.
"""

from .channel import ChannelGains, InvalidGeometryError, NodePlacement, gains_from_geometry, line_network
from .info import GaussianSystem, JointPmf, build_joint_thm2, entropy, gaussian_mi, mutual_info
from .optimize import OptResult, SearchBox, SearchParam, SweepSpec, optimize, optimize_scheme, sweep
from .schemes import (
    RateBound,
    SchemeId,
    SnncRsParams,
    cap,
    cutset_bound_gaussian,
    dfdf_rate_gaussian,
    dfsnnc_bounds_gaussian,
    nnc_bounds_gaussian,
    remark_conditions,
    snncrs_bounds_gaussian,
    snncrs_rate,
    thm2_bounds_discrete,
    thm3_bounds_discrete,
)
from .regions import (
    AtomValuation,
    InequalitySystem,
    appendix_system,
    atoms_from_pmf,
    fm_eliminate,
    max_rate,
    remove_redundant,
    theorem2_system,
    verify_equivalence,
)

__version__ = "0.1.0"
