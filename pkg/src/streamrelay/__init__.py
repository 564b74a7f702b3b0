"""Low-latency streaming codes over a chain of erasure relays."""

from __future__ import annotations

from .analysis import (
    NetworkConfig,
    achievable_rate_with_header,
    capacity_p2p,
    capacity_upper,
    code_dimensions,
    if_rate,
    loss_upper_bound,
    mdf_rate,
)
from .channel import ErasurePattern, gen_periodic, sample_iid
from .field import FieldParams, GaloisField, get_field
from .mds import build_gmax, decode_message, is_mds
from .sim import SimReport, run_chain, run_monte_carlo, verify_exhaustive, verify_sliding

__version__ = "0.1.0"

__all__ = [
    "ErasurePattern",
    "FieldParams",
    "GaloisField",
    "NetworkConfig",
    "SimReport",
    "achievable_rate_with_header",
    "build_gmax",
    "capacity_p2p",
    "capacity_upper",
    "code_dimensions",
    "decode_message",
    "gen_periodic",
    "get_field",
    "if_rate",
    "is_mds",
    "loss_upper_bound",
    "mdf_rate",
    "run_chain",
    "run_monte_carlo",
    "sample_iid",
    "verify_exhaustive",
    "verify_sliding",
]
