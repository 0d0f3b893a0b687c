"""Exact simulator of multiparty simultaneous quantum identity authentication
based on GHZ entanglement swapping."""

from .adversary import (
    CollectiveCoeffs,
    GeneralCollective,
    ImpersonateTrent,
    MeasureResend,
    NoAttack,
    collective_error_rate,
    detection_probability,
)
from .authkey import AuthKey, Counter, IdentityNumber, derive_key, extend_key
from .entanglement import GhzLabel, classify_ghz, deduce_ops, swap_distribution, transform_label
from .errors import CapacityError, GhzAuthError, InternalError, InvalidArgument, InvalidConfig
from .protocol import SessionConfig, SessionReport, run_session
from .statevec import BellOutcome, MeasBasis, PauliChoice, StateVector, make_rng, prepare_ghz

__version__ = "0.1.0"
