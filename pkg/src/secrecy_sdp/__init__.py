"""Secrecy-rate transmit design for MISO links with multi-antenna eavesdroppers.

The package solves its semidefinite programs with its own interior-point
code (:mod:`secrecy_sdp.sdp`); numpy and scipy supply the dense kernels.
"""

from .channel import (
    ChannelInstance,
    InstanceParseError,
    UncertaintySpec,
    db_to_linear,
    load_instance,
    make_rng,
    sample_channel,
    save_instance,
    uncertainty_from_ratios,
)
from .perfect import (
    InternalInconsistencyError,
    TransmitDesign,
    extract_beamformer,
    one_eve_closed_form,
    plain_mrt,
    projected_mrt,
    secrecy_rate,
    solve_src,
    solve_srm,
    solve_srm_bisection,
)
from .robust import (
    RobustDesign,
    nonneg_rate_probability,
    solve_robust_src,
    solve_robust_srm,
    worst_case_closed_form,
    worst_case_secrecy_rate,
)

__version__ = "0.1.0"
