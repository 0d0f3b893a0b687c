"""Symbolic GHZ / Bell bookkeeping on top of :mod:`ghzauth.statevec`.

A GHZ-basis vector on n qubits is ``(|s> + (-1)^sign |~s>)/sqrt(2)`` where
``~s`` is the bitwise complement of ``s``. Each such ray has two names
(``s`` and ``~s``); the canonical one has ``s[0] == 0``. Swapping the two
names only changes a global phase, so the sign is unaffected.

Deduction rule used by Trent. Let ``b_0`` be Trent's operator bit and
``b_i`` the operator bit of user i, applied to the P state of a group whose
Q state is untouched. Measuring pair i = (P_i, Q_i) in the Bell basis gives
an outcome with kind ``k_i`` and sign ``s_i``; every outcome tuple of
nonzero probability satisfies

* ``k_i XOR k_0 == b_i XOR b_0`` for every i, and
* ``sum(s_i) == sum(b_i)  (mod 2)``.

So the kinds fix the users' bits relative to Trent's secret bit, and the sign
parity is a free consistency check. Both facts are checked exhaustively
against the state-vector oracle in the test-suite.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import statevec as sv
from .errors import InvalidArgument
from .statevec import BellOutcome, PauliChoice, StateVector

__all__ = [
    "BellOutcome",
    "PauliChoice",
    "GhzLabel",
    "SwapDistribution",
    "GHZ3_LABELS",
    "classify_ghz",
    "ghz_label_state",
    "transform_label",
    "swap_distribution",
    "swap_distribution_of_states",
    "predicted_support",
    "deduce_ops",
]

MAX_CLASSIFY_QUBITS = 8


@dataclass(frozen=True)
class GhzLabel:
    flip_pattern: tuple[int, ...]
    sign: int = 0

    def __post_init__(self):
        pattern = tuple(int(b) for b in self.flip_pattern)
        if len(pattern) < 1 or any(b not in (0, 1) for b in pattern):
            raise InvalidArgument(f"bad flip pattern {self.flip_pattern!r}")
        if pattern[0] != 0:
            raise InvalidArgument("flip pattern must be canonical (leading bit 0); use GhzLabel.canonical")
        if self.sign not in (0, 1):
            raise InvalidArgument(f"sign must be 0 (+) or 1 (-), got {self.sign!r}")
        object.__setattr__(self, "flip_pattern", pattern)

    @classmethod
    def canonical(cls, pattern: Sequence[int] | str, sign: int = 0) -> "GhzLabel":
        """Label for ``|pattern> + (-1)^sign |~pattern>``, any leading bit."""
        bits = tuple(int(b) for b in pattern)
        if bits and bits[0] == 1:
            bits = tuple(1 - b for b in bits)
        return cls(bits, int(sign))

    @classmethod
    def psi(cls, k: int) -> "GhzLabel":
        """The three-qubit label named Psi_k (k = 1..8)."""
        try:
            pattern, sign = GHZ3_LABELS[k]
        except KeyError:
            raise InvalidArgument(f"Psi index must be 1..8, got {k!r}") from None
        return cls.canonical(pattern, sign)

    @property
    def n(self) -> int:
        return len(self.flip_pattern)

    @property
    def psi_index(self) -> int | None:
        """k such that this label is Psi_k, for three-qubit labels."""
        return _PSI_BY_LABEL.get(self)

    def __str__(self) -> str:
        k = self.psi_index
        base = "".join(map(str, self.flip_pattern)) + ("+", "-")[self.sign]
        return f"Psi{k}({base})" if k else f"GHZ({base})"


# Three-qubit GHZ basis as written in the source table: first ket and sign.
GHZ3_LABELS: dict[int, tuple[str, int]] = {
    1: ("000", 0),
    2: ("000", 1),
    3: ("100", 0),
    4: ("100", 1),
    5: ("010", 0),
    6: ("010", 1),
    7: ("110", 0),
    8: ("110", 1),
}
_PSI_BY_LABEL = {GhzLabel.canonical(p, s): k for k, (p, s) in GHZ3_LABELS.items()}


def ghz_label_state(label: GhzLabel) -> StateVector:
    n = label.n
    idx = 0
    for b in label.flip_pattern:
        idx = (idx << 1) | b
    amps = np.zeros(1 << n, dtype=complex)
    amps[idx] = sv.SQRT1_2
    amps[idx ^ ((1 << n) - 1)] = -sv.SQRT1_2 if label.sign else sv.SQRT1_2
    return StateVector(n, amps)


def classify_ghz(state: StateVector, tol: float = sv.NORM_TOL) -> GhzLabel | None:
    """GHZ-basis label of ``state`` ignoring global phase, or None if it is
    not (within ``tol``) a single GHZ-basis vector."""
    n = state.n_qubits
    if n > MAX_CLASSIFY_QUBITS:
        raise InvalidArgument(f"classify_ghz supports at most {MAX_CLASSIFY_QUBITS} qubits")
    if n < 2:
        return None
    half = 1 << (n - 1)
    a = state.amps[:half]
    b = state.amps[::-1][:half]  # amplitude of the complement index
    ov = np.stack([np.abs(a + b) ** 2, np.abs(a - b) ** 2]) / 2.0
    sign, s = np.unravel_index(int(np.argmax(ov)), ov.shape)
    if ov[sign, s] < 1.0 - tol:
        return None
    pattern = tuple(int(c) for c in format(int(s), f"0{n}b"))
    return GhzLabel(pattern, int(sign))


def _as_ops(ops: Iterable[PauliChoice | int]) -> tuple[PauliChoice, ...]:
    return tuple(PauliChoice(int(o)) for o in ops)


@functools.lru_cache(maxsize=4096)
def _transform_cached(bits: tuple[int, ...]) -> GhzLabel:
    state = sv.apply_paulis(sv.prepare_ghz(len(bits)), _as_ops(bits))
    label = classify_ghz(state)
    if label is None:
        raise AssertionError("Pauli product left the GHZ basis")
    return label


def transform_label(ops: Sequence[PauliChoice | int], n: int) -> GhzLabel:
    """Label of ``(ops[0] (x) ... (x) ops[n-1])`` applied to the n-qubit GHZ state.

    The result is obtained from the state-vector engine (and memoized), so
    signs follow the exact matrix convention for iSy.
    """
    ops = _as_ops(ops)
    if len(ops) != n:
        raise InvalidArgument(f"expected {n} operators, got {len(ops)}")
    if not 2 <= n <= MAX_CLASSIFY_QUBITS:
        raise InvalidArgument(f"n must be in 2..{MAX_CLASSIFY_QUBITS}")
    return _transform_cached(tuple(int(o) for o in ops))


class SwapDistribution(Mapping):
    """Exact distribution over tuples of Bell outcomes, one per pair.

    Only tuples of nonzero probability are stored; looking up any other tuple
    returns 0.
    """

    def __init__(self, n_pairs: int, probs: Mapping[tuple[BellOutcome, ...], float]):
        self.n_pairs = n_pairs
        self._probs = dict(probs)

    def __getitem__(self, key):
        return self._probs.get(tuple(BellOutcome(b) for b in key), 0.0)

    def __iter__(self):
        return iter(self._probs)

    def __len__(self):
        return len(self._probs)

    def __contains__(self, key):
        return tuple(BellOutcome(b) for b in key) in self._probs

    @property
    def support(self) -> frozenset[tuple[BellOutcome, ...]]:
        return frozenset(self._probs)

    def total(self) -> float:
        return float(sum(self._probs.values()))

    def labels(self) -> list[list[str]]:
        """Support as sorted lists of outcome labels (for printing / fixtures)."""
        return sorted([b.label for b in t] for t in self._probs)

    def __repr__(self) -> str:
        return f"SwapDistribution(n_pairs={self.n_pairs}, support={len(self)})"


def swap_distribution_of_states(p: StateVector, q: StateVector, tol: float = 1e-12) -> SwapDistribution:
    """Bell-measure qubit i of ``p`` together with qubit i of ``q`` for all i."""
    if p.n_qubits != q.n_qubits:
        raise InvalidArgument("P and Q must have the same number of qubits")
    n = p.n_qubits
    joint = sv.tensor(p, q)
    probs = sv.bell_pairs_distribution(joint, [(i, n + i) for i in range(n)])
    out = {}
    for idx in zip(*np.nonzero(probs > tol)):
        out[tuple(BellOutcome(int(b)) for b in idx)] = float(probs[idx])
    return SwapDistribution(n, out)


def swap_distribution(label_p: GhzLabel, label_q: GhzLabel) -> SwapDistribution:
    if label_p.n != label_q.n:
        raise InvalidArgument(f"label sizes differ ({label_p.n} vs {label_q.n})")
    return swap_distribution_of_states(ghz_label_state(label_p), ghz_label_state(label_q))


def predicted_support(ops: Sequence[PauliChoice | int]) -> frozenset[tuple[BellOutcome, ...]]:
    """Closed-form support of the swap distribution for ``ops`` applied to the
    P state of a GHZ (x) GHZ group."""
    bits = [int(o) for o in _as_ops(ops)]
    n = len(bits)
    parity = sum(bits) % 2
    out = set()
    for k0 in (0, 1):
        kinds = [k0 ^ bits[i] ^ bits[0] for i in range(n)]
        for signs in itertools.product((0, 1), repeat=n):
            if sum(signs) % 2 == parity:
                out.add(tuple(BellOutcome.from_bits(k, s) for k, s in zip(kinds, signs)))
    return frozenset(out)


def deduce_ops(outcomes: Sequence[BellOutcome], trent_op: PauliChoice | int) -> tuple[tuple[int, ...], bool]:
    """Recover the users' operator bits from one group's published outcomes.

    ``outcomes[0]`` is Trent's (T, T') result, the rest are the users' results
    in order. Returns ``(user_bits, consistent)``; ``consistent`` is False when
    the sign parity rules out every honest configuration compatible with the
    deduced bits.
    """
    outcomes = tuple(BellOutcome(o) for o in outcomes)
    if len(outcomes) < 2:
        raise InvalidArgument("need Trent's outcome plus at least one user outcome")
    t = PauliChoice(int(trent_op)).classical_bit
    k0 = outcomes[0].kind
    user_bits = tuple(o.kind ^ k0 ^ t for o in outcomes[1:])
    minus = sum(o.sign for o in outcomes)
    consistent = minus % 2 == (t + sum(user_bits)) % 2
    return user_bits, consistent
