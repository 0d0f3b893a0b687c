"""Channel adversaries and their exact / empirical detection metrics.

An attack acts on one freshly prepared GHZ state while the users' qubits are
in flight. Every model is described by :func:`channel_branches`, which lists
all possible post-attack registers with exact probabilities; the session
pipeline samples one branch, and :func:`detection_probability` sums over
all of them.

``MeasureResend`` is an extra baseline attack; it is not one of the attacks
analysed for the protocol itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from . import statevec as sv
from .errors import InvalidArgument
from .statevec import MeasBasis, StateVector

COEFF_NAMES = ("alpha1", "beta1", "gamma1", "delta1", "delta2", "gamma2", "beta2", "alpha2")


@dataclass(frozen=True)
class PartyRegister:
    """One GHZ position: a joint state plus who holds which qubit."""

    state: StateVector
    trent: int
    users: tuple[int, ...]
    eve: tuple[int, ...] = ()

    @classmethod
    def fresh(cls, r: int) -> "PartyRegister":
        return cls(sv.prepare_ghz(r + 1), 0, tuple(range(1, r + 1)))

    @property
    def honest_qubits(self) -> list[int]:
        return [self.trent, *self.users]


@dataclass(frozen=True)
class NoAttack:
    name = "none"


@dataclass(frozen=True)
class ImpersonateTrent:
    """Eve keeps the users' qubits and forwards halves of her own GHZ states."""

    name = "impersonate_trent"


@dataclass(frozen=True)
class MeasureResend:
    basis: MeasBasis = MeasBasis.Z
    name = "measure_resend"

    def __post_init__(self):
        object.__setattr__(self, "basis", MeasBasis(self.basis))


@dataclass(frozen=True)
class CollectiveCoeffs:
    """Amplitudes of the collective attack on a three-qubit GHZ state.

    Order is (alpha1, beta1, gamma1, delta1 | delta2, gamma2, beta2, alpha2):
    the first four weight users' values 00, 01, 10, 11 when Trent holds 0,
    the last four weight 11, 10, 01, 00 when Trent holds 1. Each branch must
    have unit norm. Probe states are orthonormal except that the alpha1 and
    delta2 terms share one, which makes the attack an isometry on the users'
    qubits and the probe alone.
    """

    values: tuple[complex, ...]
    symmetric: bool = False

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        if len(vals) != 8:
            raise InvalidArgument(f"collective attack needs 8 coefficients, got {len(vals)}")
        if not all(np.isfinite(v.real) and np.isfinite(v.imag) for v in vals):
            raise InvalidArgument("collective coefficients must be finite")
        n0 = sum(abs(v) ** 2 for v in vals[:4])
        n1 = sum(abs(v) ** 2 for v in vals[4:])
        if abs(n0 - 1) > sv.NORM_TOL:
            raise InvalidArgument(
                f"branch normalization violated: |alpha1|^2+|beta1|^2+|gamma1|^2+|delta1|^2 = {n0:.12g}")
        if abs(n1 - 1) > sv.NORM_TOL:
            raise InvalidArgument(
                f"branch normalization violated: |delta2|^2+|gamma2|^2+|beta2|^2+|alpha2|^2 = {n1:.12g}")
        if self.symmetric and abs(abs(vals[0]) - abs(vals[4])) > sv.NORM_TOL:
            raise InvalidArgument("symmetry violated: |alpha1| != |delta2|")
        object.__setattr__(self, "values", vals)

    @property
    def alpha1(self) -> complex:
        return self.values[0]

    @property
    def delta2(self) -> complex:
        return self.values[4]

    @classmethod
    def identity(cls) -> "CollectiveCoeffs":
        return cls((1, 0, 0, 0, 1, 0, 0, 0), symmetric=True)

    @classmethod
    def random(cls, rng: np.random.Generator, symmetric: bool = True) -> "CollectiveCoeffs":
        """Random valid coefficients; with ``symmetric`` both branches share
        the same |alpha1| = |delta2|."""
        def branch(a_mag=None):
            z = rng.normal(size=4) + 1j * rng.normal(size=4)
            z /= np.linalg.norm(z)
            if a_mag is not None:
                rest = z[1:] / np.linalg.norm(z[1:]) * np.sqrt(max(0.0, 1 - a_mag ** 2))
                z = np.concatenate([[a_mag * np.exp(1j * np.angle(z[0]))], rest])
            return z

        b0 = branch()
        b1 = branch(abs(b0[0]) if symmetric else None)
        return cls(tuple(b0) + tuple(b1), symmetric=symmetric)

    def to_json(self) -> list[list[float]]:
        return [[v.real, v.imag] for v in self.values]

    @classmethod
    def from_json(cls, data, symmetric: bool = False) -> "CollectiveCoeffs":
        if not isinstance(data, (list, tuple)) or len(data) != 8:
            raise InvalidArgument("coeffs must be a list of eight [re, im] pairs")
        vals = []
        for name, pair in zip(COEFF_NAMES, data):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise InvalidArgument(f"coefficient {name} must be an [re, im] pair")
            try:
                vals.append(complex(float(pair[0]), float(pair[1])))
            except (TypeError, ValueError):
                raise InvalidArgument(f"coefficient {name} is not numeric") from None
        return cls(tuple(vals), symmetric=symmetric)


@dataclass(frozen=True)
class GeneralCollective:
    coeffs: CollectiveCoeffs = field(default_factory=CollectiveCoeffs.identity)
    name = "general_collective"


AttackModel = Union[NoAttack, ImpersonateTrent, MeasureResend, GeneralCollective]


def attack_from_json(data) -> AttackModel:
    if data is None:
        return NoAttack()
    if isinstance(data, str):
        data = {"type": data}
    if not isinstance(data, dict) or "type" not in data:
        raise InvalidArgument("attack must be null, a type name, or an object with a 'type' field")
    kind = data["type"]
    if kind in ("none", None):
        return NoAttack()
    if kind == "impersonate_trent":
        return ImpersonateTrent()
    if kind == "measure_resend":
        try:
            return MeasureResend(MeasBasis(data.get("basis", "Z")))
        except ValueError:
            raise InvalidArgument(f"measure_resend basis must be Z or X, got {data.get('basis')!r}") from None
    if kind == "general_collective":
        if "coeffs" not in data:
            raise InvalidArgument("general_collective requires 'coeffs'")
        return GeneralCollective(CollectiveCoeffs.from_json(data["coeffs"], bool(data.get("symmetric", False))))
    raise InvalidArgument(f"unknown attack type {kind!r}")


def attack_to_json(model: AttackModel) -> dict:
    out = {"type": model.name}
    if isinstance(model, MeasureResend):
        out["basis"] = model.basis.value
    elif isinstance(model, GeneralCollective):
        out["coeffs"] = model.coeffs.to_json()
        out["symmetric"] = model.coeffs.symmetric
    return out


def _collective_state(coeffs: CollectiveCoeffs) -> StateVector:
    # qubits: T, A1, A2, then a 3-qubit probe. The two undisturbed terms
    # (alpha1, delta2) share probe |000> so that alpha1 = delta2 = 1 is the
    # identity channel; the six error terms get distinct basis kets.
    c = coeffs.values
    terms = [
        ("000", "000", c[0]), ("001", "001", c[1]), ("010", "010", c[2]), ("011", "011", c[3]),
        ("111", "000", c[4]), ("110", "101", c[5]), ("101", "110", c[6]), ("100", "111", c[7]),
    ]
    amps = np.zeros(64, dtype=complex)
    for honest, probe, amp in terms:
        amps[int(honest + probe, 2)] += amp * sv.SQRT1_2
    return StateVector(6, amps)


def channel_branches(model: AttackModel, reg: PartyRegister) -> list[tuple[float, PartyRegister]]:
    """Every possible effect of ``model`` on ``reg`` with its exact probability."""
    if isinstance(model, NoAttack):
        return [(1.0, reg)]
    if isinstance(model, ImpersonateTrent):
        r = len(reg.users)
        n = reg.state.n_qubits
        state = sv.tensor(reg.state, sv.prepare_ghz(r + 1))
        forwarded = tuple(range(n + 1, n + 1 + r))
        kept = reg.eve + reg.users + (n,)
        return [(1.0, PartyRegister(state, reg.trent, forwarded, kept))]
    if isinstance(model, MeasureResend):
        branches = [(1.0, reg)]
        for q in reg.users:
            nxt = []
            for p, b in branches:
                for p2, _, collapsed in sv.qubit_branches(b.state, q, model.basis):
                    nxt.append((p * p2, replace(b, state=collapsed)))
            branches = nxt
        return branches
    if isinstance(model, GeneralCollective):
        fresh = PartyRegister.fresh(2)
        if (len(reg.users) != 2 or reg.eve or reg.trent != 0 or reg.users != (1, 2)
                or not reg.state.equals_up_to_phase(fresh.state)):
            raise InvalidArgument("the collective attack is defined on a fresh three-qubit GHZ state (r = 2)")
        return [(1.0, PartyRegister(_collective_state(model.coeffs), 0, (1, 2), (3, 4, 5)))]
    raise InvalidArgument(f"unknown attack model {model!r}")


def channel_transform(model: AttackModel, reg: PartyRegister, rng: np.random.Generator) -> PartyRegister:
    """Apply the attack to one in-flight GHZ state, sampling Eve's randomness."""
    branches = channel_branches(model, reg)
    if len(branches) == 1:
        return branches[0][1]
    probs = np.array([p for p, _ in branches])
    idx = sv.sample_index(probs, rng)
    return branches[idx][1]


def release_eve(reg: PartyRegister, rng: np.random.Generator) -> PartyRegister:
    """Eve measures her retained qubits in Z and drops them.

    Nothing the honest parties do later touches these qubits, so the joint
    statistics of the honest qubits are unchanged; this only keeps group
    registers within the simulator's size limit.
    """
    state, trent, users = reg.state, reg.trent, list(reg.users)
    for q in sorted(reg.eve, reverse=True):
        _, state = sv.measure_qubit(state, q, MeasBasis.Z, rng)
        state = sv.discard_qubit(state, q)
        trent = trent - 1 if trent > q else trent
        users = [u - 1 if u > q else u for u in users]
    return PartyRegister(state, trent, tuple(users), ())


def violates_correlation(outcomes: Sequence[int], basis: MeasBasis) -> bool:
    """Check rule for one sampled position, Trent's bit first.

    Z: all outcomes must agree. X: the number of |-> outcomes must be even.
    """
    if MeasBasis(basis) is MeasBasis.Z:
        return len(set(outcomes)) > 1
    return sum(outcomes) % 2 == 1


def mismatch_probability(reg: PartyRegister, basis: MeasBasis) -> float:
    """Exact probability that measuring Trent's and the users' qubits in
    ``basis`` violates the check rule."""
    qubits = reg.honest_qubits
    dist = sv.outcome_distribution(reg.state, qubits, basis)
    k = len(qubits)
    total = 0.0
    for idx, p in enumerate(dist):
        bits = [(idx >> (k - 1 - j)) & 1 for j in range(k)]
        if violates_correlation(bits, basis):
            total += p
    return float(total)


def detection_by_basis(model: AttackModel, r: int = 2) -> dict[MeasBasis, float]:
    """Per-basis exact probability that one sampled position flags the attack."""
    branches = channel_branches(model, PartyRegister.fresh(r))
    return {
        basis: float(sum(p * mismatch_probability(b, basis) for p, b in branches))
        for basis in (MeasBasis.Z, MeasBasis.X)
    }


def detection_probability(model: AttackModel, basis_mix: float = 0.5, r: int = 2) -> float:
    """Exact per-sample detection probability when the check basis is Z with
    probability ``basis_mix`` and X otherwise."""
    if not 0.0 <= basis_mix <= 1.0:
        raise InvalidArgument("basis_mix must be a probability")
    per = detection_by_basis(model, r)
    return basis_mix * per[MeasBasis.Z] + (1.0 - basis_mix) * per[MeasBasis.X]


def pass_probability(model: AttackModel, k: int, basis_mix: float = 0.5, r: int = 2) -> float:
    """Probability that ``k`` independent sampled positions all pass."""
    return (1.0 - detection_probability(model, basis_mix, r)) ** k


def collective_error_rate(coeffs: CollectiveCoeffs, detailed: bool = False):
    """Error rate 1 - |alpha1|^2 of the collective attack.

    This is the Z-basis mismatch rate of the eavesdropping check. With
    ``detailed=True`` the per-branch pair (1 - |alpha1|^2, 1 - |delta2|^2) is
    returned, which is required when the branches are not symmetric.
    """
    e0 = 1.0 - abs(coeffs.alpha1) ** 2
    e1 = 1.0 - abs(coeffs.delta2) ** 2
    if detailed:
        return e0, e1
    if abs(e0 - e1) > sv.NORM_TOL:
        raise InvalidArgument("asymmetric branches (|alpha1| != |delta2|); use detailed=True")
    return e0
