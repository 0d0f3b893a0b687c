"""Dense pure-state simulation of small qubit registers.

Qubit 0 is the most significant bit of the amplitude index (big-endian), so
``|q0 q1 ... q_{n-1}>`` sits at index ``q0*2**(n-1) + ... + q_{n-1}``.

Every operation returns a fresh :class:`StateVector`; inputs are never
mutated. Randomness always comes from an explicit ``numpy.random.Generator``
(see :func:`make_rng`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InternalError, InvalidArgument

MAX_QUBITS = 16
NORM_TOL = 1e-9
_PROJ_EPS = 1e-12
_DUST = 1e-15  # probabilities below this are rounding residue of exact zeros

SQRT1_2 = 1.0 / np.sqrt(2.0)


class MeasBasis(str, enum.Enum):
    Z = "Z"
    X = "X"


class PauliChoice(enum.IntEnum):
    """The two encoding operators; the integer value is the classical bit."""

    I = 0
    ISY = 1

    @property
    def classical_bit(self) -> int:
        return int(self)

    @property
    def matrix(self) -> np.ndarray:
        return _I2 if self is PauliChoice.I else _ISY

    @classmethod
    def from_bit(cls, bit: int) -> "PauliChoice":
        return cls(int(bit))

    def __str__(self) -> str:
        return "I" if self is PauliChoice.I else "iSy"


class BellOutcome(enum.IntEnum):
    """Bell-basis result. Bit 1 of the value is the kind (0 = phi, 1 = psi),
    bit 0 is the sign (0 = +, 1 = -)."""

    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def kind(self) -> int:
        return int(self) >> 1

    @property
    def sign(self) -> int:
        return int(self) & 1

    @property
    def is_psi(self) -> bool:
        return self.kind == 1

    @property
    def is_minus(self) -> bool:
        return self.sign == 1

    @property
    def vector(self) -> np.ndarray:
        return _BELL[int(self)]

    @classmethod
    def from_bits(cls, kind: int, sign: int) -> "BellOutcome":
        return cls((int(kind) << 1) | int(sign))

    @property
    def label(self) -> str:
        return ("phi", "psi")[self.kind] + ("+", "-")[self.sign]

    @classmethod
    def from_label(cls, label: str) -> "BellOutcome":
        try:
            return _BELL_BY_LABEL[label]
        except KeyError:
            raise InvalidArgument(f"unknown Bell outcome label {label!r}") from None

    def __str__(self) -> str:
        return self.label


_I2 = np.eye(2, dtype=complex)
_ISY = np.array([[0, 1], [-1, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2

# rows are |phi+>, |phi->, |psi+>, |psi-> over the two-qubit basis 00,01,10,11
_BELL = np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1, -1, 0],
    ],
    dtype=complex,
) * SQRT1_2
_BELL_BY_LABEL = {b.label: b for b in BellOutcome}


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream; same seed gives the same draws on every platform."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        n = self.n_qubits
        if not 1 <= n <= MAX_QUBITS:
            raise InvalidArgument(f"register size {n} outside 1..{MAX_QUBITS}")
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.shape[0] != 1 << n:
            raise InvalidArgument(f"expected {1 << n} amplitudes, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise InvalidArgument("amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgument(f"state not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, bits: Sequence[int] | str) -> "StateVector":
        """Computational basis ket, e.g. ``StateVector.basis("0011")``."""
        bits = [int(b) for b in bits]
        idx = 0
        for b in bits:
            idx = (idx << 1) | b
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[idx] = 1.0
        return cls(len(bits), amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>."""
        if other.n_qubits != self.n_qubits:
            raise InvalidArgument("overlap between registers of different size")
        return complex(np.vdot(self.amps, other.amps))

    def equals_up_to_phase(self, other: "StateVector", tol: float = NORM_TOL) -> bool:
        return abs(abs(self.overlap(other)) - 1.0) <= tol

    def _tensor_view(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.n_qubits)

    def __repr__(self) -> str:
        nz = [(format(i, f"0{self.n_qubits}b"), complex(a))
              for i, a in enumerate(self.amps) if abs(a) > 1e-12]
        body = " + ".join(f"({a.real:.4g}{a.imag:+.4g}j)|{k}>" for k, a in nz[:8])
        if len(nz) > 8:
            body += " + ..."
        return f"StateVector(n={self.n_qubits}: {body})"


def _fresh(n: int, amps: np.ndarray) -> StateVector:
    # renormalize away accumulated rounding before the constructor's check
    amps = amps / np.sqrt(np.vdot(amps, amps).real)
    return StateVector(n, amps)


def _check_qubit(state: StateVector, q: int) -> int:
    if not isinstance(q, (int, np.integer)) or not 0 <= q < state.n_qubits:
        raise InvalidArgument(f"qubit index {q!r} invalid for {state.n_qubits}-qubit register")
    return int(q)


def prepare_ghz(n: int) -> StateVector:
    """(|0...0> + |1...1>)/sqrt(2) on ``n`` qubits, 2 <= n <= 16."""
    if not isinstance(n, (int, np.integer)) or not 2 <= n <= MAX_QUBITS:
        raise InvalidArgument(f"GHZ size must be in 2..{MAX_QUBITS}, got {n!r}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = amps[-1] = SQRT1_2
    return StateVector(int(n), amps)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """a (x) b; qubits of ``a`` come first."""
    n = a.n_qubits + b.n_qubits
    if n > MAX_QUBITS:
        raise InvalidArgument(f"tensor product would need {n} qubits (max {MAX_QUBITS})")
    return StateVector(n, np.kron(a.amps, b.amps))


def apply_single(state: StateVector, q: int, matrix: np.ndarray) -> StateVector:
    """Apply an arbitrary 2x2 matrix to qubit ``q``. Caller guarantees unitarity."""
    q = _check_qubit(state, q)
    n = state.n_qubits
    view = state.amps.reshape(1 << q, 2, 1 << (n - q - 1))
    out = np.einsum("ij,ajb->aib", matrix, view)
    return _fresh(n, out.reshape(-1))


def apply_pauli(state: StateVector, q: int, op: PauliChoice) -> StateVector:
    op = PauliChoice(op)
    if op is PauliChoice.I:
        _check_qubit(state, q)
        return state
    return apply_single(state, q, _ISY)


def apply_paulis(state: StateVector, ops: Sequence[PauliChoice], qubits: Sequence[int] | None = None) -> StateVector:
    """Apply ``ops[i]`` to ``qubits[i]`` (default: qubit i)."""
    if qubits is None:
        qubits = range(len(ops))
    for q, op in zip(qubits, ops):
        state = apply_pauli(state, q, op)
    return state


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    # zero out rounding dust so a numerically-empty branch is never chosen
    probs = np.where(probs > _PROJ_EPS, probs, 0.0)
    cum = np.cumsum(probs)
    u = rng.random() * cum[-1]
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, int(np.flatnonzero(probs)[-1]))


def qubit_branches(state: StateVector, q: int, basis: MeasBasis) -> list[tuple[float, int, StateVector]]:
    """All outcomes of measuring qubit ``q`` with their exact probabilities.

    Returns ``(probability, outcome, collapsed_state)`` for each outcome of
    nonzero probability. X-basis outcome 0 is |+>, 1 is |->.
    """
    q = _check_qubit(state, q)
    basis = MeasBasis(basis)
    n = state.n_qubits
    view = state.amps.reshape(1 << q, 2, 1 << (n - q - 1))
    if basis is MeasBasis.X:
        view = np.einsum("ij,ajb->aib", _H, view)
    out = []
    for bit in (0, 1):
        part = np.zeros_like(view)
        part[:, bit, :] = view[:, bit, :]
        p = float(np.vdot(part, part).real)
        if p <= _PROJ_EPS:
            continue
        if basis is MeasBasis.X:
            part = np.einsum("ij,ajb->aib", _H, part)
        out.append((p, bit, _fresh(n, part.reshape(-1))))
    return out


def measure_qubit(state: StateVector, q: int, basis: MeasBasis, rng: np.random.Generator) -> tuple[int, StateVector]:
    """Projective measurement of one qubit; the qubit stays in the register."""
    branches = qubit_branches(state, q, basis)
    if not branches:
        raise InternalError("measurement with no nonzero branch")
    idx = sample_index(np.array([b[0] for b in branches]), rng)
    _, outcome, collapsed = branches[idx]
    return outcome, collapsed


def _pair_matrix(state: StateVector, q1: int, q2: int) -> np.ndarray:
    q1 = _check_qubit(state, q1)
    q2 = _check_qubit(state, q2)
    if q1 == q2:
        raise InvalidArgument("Bell measurement needs two distinct qubits")
    view = np.moveaxis(state._tensor_view(), (q1, q2), (0, 1))
    return view.reshape(4, -1)


def _bell_components(state: StateVector, q1: int, q2: int) -> np.ndarray:
    # row b holds (<bell_b| (x) 1) |state>
    return _BELL.conj() @ _pair_matrix(state, q1, q2)


def bell_pair_distribution(state: StateVector, q1: int, q2: int) -> tuple[float, float, float, float]:
    """Exact probabilities of (phi+, phi-, psi+, psi-) on the pair (q1, q2)."""
    comps = _bell_components(state, q1, q2)
    probs = np.sum(np.abs(comps) ** 2, axis=1)
    return tuple(float(p) for p in probs)


def measure_bell(state: StateVector, q1: int, q2: int, rng: np.random.Generator) -> tuple[BellOutcome, StateVector]:
    comps = _bell_components(state, q1, q2)
    probs = np.sum(np.abs(comps) ** 2, axis=1)
    b = sample_index(probs, rng)
    if probs[b] <= _PROJ_EPS:
        raise InternalError("sampled a Bell outcome of zero probability")
    n = state.n_qubits
    rest_shape = (2,) * (n - 2)
    collapsed = np.outer(_BELL[b], comps[b]).reshape((2, 2) + rest_shape)
    collapsed = np.moveaxis(collapsed, (0, 1), (q1, q2))
    return BellOutcome(b), _fresh(n, collapsed.reshape(-1))


def bell_pairs_distribution(state: StateVector, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Joint exact distribution of Bell measurements on disjoint qubit pairs.

    Returns an array of shape ``(4,) * len(pairs)`` whose entry at
    ``(b_0, ..., b_k)`` is the probability of outcome ``BellOutcome(b_i)`` on
    pair i. Qubits not named in any pair are marginalized.
    """
    flat = [q for pair in pairs for q in pair]
    for q in flat:
        _check_qubit(state, q)
    if len(set(flat)) != len(flat):
        raise InvalidArgument("Bell pairs must be disjoint")
    k = len(pairs)
    view = np.moveaxis(state._tensor_view(), flat, range(2 * k))
    view = view.reshape((4,) * k + (-1,))
    conj = _BELL.conj()
    for ax in range(k):
        view = np.moveaxis(np.tensordot(conj, view, axes=([1], [ax])), 0, ax)
    probs = np.sum(np.abs(view) ** 2, axis=-1)
    probs[probs < _DUST] = 0.0
    return probs


def outcome_distribution(state: StateVector, qubits: Sequence[int], bases: Sequence[MeasBasis] | MeasBasis) -> np.ndarray:
    """Exact joint distribution of single-qubit measurements on ``qubits``.

    Entry ``i`` of the result is the probability that the listed qubits read
    the big-endian bit string ``i``. Unlisted qubits are marginalized.
    """
    if isinstance(bases, (MeasBasis, str)):
        bases = [MeasBasis(bases)] * len(qubits)
    if len(bases) != len(qubits):
        raise InvalidArgument("one basis per measured qubit")
    qubits = [_check_qubit(state, q) for q in qubits]
    if len(set(qubits)) != len(qubits):
        raise InvalidArgument("measured qubits must be distinct")
    view = state._tensor_view()
    for q, basis in zip(qubits, bases):
        if MeasBasis(basis) is MeasBasis.X:
            view = np.moveaxis(np.tensordot(_H, view, axes=([1], [q])), 0, q)
    view = np.moveaxis(view, qubits, range(len(qubits)))
    view = view.reshape(1 << len(qubits), -1)
    probs = np.sum(np.abs(view) ** 2, axis=1)
    probs[probs < _DUST] = 0.0
    return probs


def discard_qubit(state: StateVector, q: int) -> StateVector:
    """Drop a qubit that is in a definite computational-basis state.

    Used after a Z measurement, when the qubit factors out of the register.
    """
    q = _check_qubit(state, q)
    if state.n_qubits == 1:
        raise InvalidArgument("cannot discard the only qubit of a register")
    view = np.moveaxis(state._tensor_view(), q, 0).reshape(2, -1)
    weights = np.sum(np.abs(view) ** 2, axis=1)
    if min(weights) > NORM_TOL:
        raise InvalidArgument(f"qubit {q} is not in a computational basis state")
    keep = int(np.argmax(weights))
    return _fresh(state.n_qubits - 1, view[keep])
