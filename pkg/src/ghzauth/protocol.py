"""Trent-plus-r-users simultaneous identity authentication, step by step.

The stages are plain functions over a mutable :class:`Session`:

    distribute -> eavesdrop_check -> partition_groups -> encode_keys
               -> trent_randomize -> authenticate

:func:`run_session` chains them and stops after a failed eavesdropping
check. All randomness comes from independent PCG64 streams spawned from the
session seed, so a (config, seed) pair replays bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import adversary as adv
from . import statevec as sv
from .authkey import (
    DEFAULT_COUNTER_BITS,
    DEFAULT_ID_BITS,
    AuthKey,
    Counter,
    IdentityNumber,
    blocks_needed,
    extend_key,
)
from .entanglement import deduce_ops
from .errors import CapacityError, InvalidConfig
from .statevec import BellOutcome, MeasBasis, PauliChoice

SCHEMA_VERSION = 1
MAX_USERS = 7
REDACTED = "redacted"


@dataclass(frozen=True)
class SessionConfig:
    r: int = 2
    n_states: int = 256
    sample_fraction: float = 0.25
    m_groups: int = 64
    seed: int = 0
    attack: adv.AttackModel = field(default_factory=adv.NoAttack)
    check_threshold: float = 0.0
    z_basis_probability: float = 0.5
    user_ids: tuple[str, ...] | None = None
    id_bits: int = DEFAULT_ID_BITS
    counter_bits: int = DEFAULT_COUNTER_BITS
    counter_start: int = 0
    impostors: tuple[int, ...] = ()
    forgers: tuple[int, ...] = ()

    def __post_init__(self):
        if self.user_ids is not None:
            object.__setattr__(self, "user_ids", tuple(self.user_ids))
        object.__setattr__(self, "impostors", tuple(sorted(set(self.impostors))))
        object.__setattr__(self, "forgers", tuple(sorted(set(self.forgers))))
        self.validate()

    @property
    def n_sampled(self) -> int:
        # round half up; Python's round() would round half to even
        return int(math.floor(self.sample_fraction * self.n_states + 0.5))

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise InvalidConfig(msg)

        need(isinstance(self.r, int) and 2 <= self.r <= MAX_USERS, f"r must be an integer in 2..{MAX_USERS}")
        need(isinstance(self.n_states, int) and self.n_states >= 0, "n_states must be a non-negative integer")
        need(0.0 < self.sample_fraction < 1.0, "sample_fraction must lie in (0, 1)")
        need(isinstance(self.m_groups, int) and self.m_groups >= 0, "m_groups must be a non-negative integer")
        need(isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64, "seed must be an unsigned 64-bit integer")
        need(2 * self.m_groups + self.n_sampled <= self.n_states,
             f"2*m_groups + sampled ({2 * self.m_groups} + {self.n_sampled}) exceeds n_states ({self.n_states})")
        need(0.0 <= self.check_threshold <= 1.0, "check_threshold must lie in [0, 1]")
        need(0.0 <= self.z_basis_probability <= 1.0, "z_basis_probability must lie in [0, 1]")
        need(isinstance(self.attack, (adv.NoAttack, adv.ImpersonateTrent, adv.MeasureResend, adv.GeneralCollective)),
             "attack must be an attack model")
        need(not isinstance(self.attack, adv.GeneralCollective) or self.r == 2,
             "general_collective attack is defined for r = 2 only")
        if self.user_ids is not None:
            need(len(self.user_ids) == self.r, "user_ids must list one identity per user")
            need(len(set(self.user_ids)) == self.r, "user_ids must be distinct")
        for who, name in ((self.impostors, "impostors"), (self.forgers, "forgers")):
            need(all(isinstance(j, int) and 0 <= j < self.r for j in who), f"{name} must be user indices in 0..r-1")
        need(self.id_bits >= 1 and self.counter_bits >= 1, "id_bits and counter_bits must be positive")
        need(0 <= self.counter_start < 2 ** self.counter_bits, "counter_start does not fit in counter_bits")

    def identities(self) -> list[IdentityNumber]:
        try:
            if self.user_ids is None:
                return [IdentityNumber(j + 1, self.id_bits) for j in range(self.r)]
            return [IdentityNumber.from_hex(h, self.id_bits) for h in self.user_ids]
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None

    def to_dict(self) -> dict[str, Any]:
        return {
            "r": self.r,
            "n_states": self.n_states,
            "sample_fraction": self.sample_fraction,
            "m_groups": self.m_groups,
            "seed": self.seed,
            "attack": adv.attack_to_json(self.attack),
            "check_threshold": self.check_threshold,
            "z_basis_probability": self.z_basis_probability,
            "user_ids": [i.hex() for i in self.identities()],
            "id_bits": self.id_bits,
            "counter_bits": self.counter_bits,
            "counter_start": self.counter_start,
            "impostors": list(self.impostors),
            "forgers": list(self.forgers),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SessionConfig":
        if not isinstance(data, dict):
            raise InvalidConfig("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown config field(s): {', '.join(sorted(unknown))}")
        kwargs = dict(data)
        try:
            if "attack" in kwargs:
                kwargs["attack"] = adv.attack_from_json(kwargs["attack"])
        except ValueError as exc:
            raise InvalidConfig(f"attack: {exc}") from None
        for key in ("sample_fraction", "check_threshold", "z_basis_probability"):
            if key in kwargs:
                if isinstance(kwargs[key], bool) or not isinstance(kwargs[key], (int, float)):
                    raise InvalidConfig(f"{key} must be a number")
                kwargs[key] = float(kwargs[key])
        for key in ("r", "n_states", "m_groups", "seed", "id_bits", "counter_bits", "counter_start"):
            if key in kwargs and (isinstance(kwargs[key], bool) or not isinstance(kwargs[key], int)):
                raise InvalidConfig(f"{key} must be an integer")
        for key in ("user_ids", "impostors", "forgers"):
            if key in kwargs and kwargs[key] is not None and not isinstance(kwargs[key], list):
                raise InvalidConfig(f"{key} must be a list")
        return cls(**kwargs)


@dataclass
class GroupRecord:
    index: int
    p: int
    q: int
    trent_op: PauliChoice | None = None
    applied_bits: tuple[int, ...] | None = None
    trent_outcome: BellOutcome | None = None
    user_outcomes: tuple[BellOutcome, ...] | None = None
    deduced_bits: tuple[int, ...] | None = None
    consistent: bool | None = None

    def to_json(self, reveal: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "index": self.index,
            "p": self.p,
            "q": self.q,
            "trent_op": REDACTED,
            "outcomes": None,
            "deduced_bits": None if self.deduced_bits is None else list(self.deduced_bits),
            "consistent": self.consistent,
        }
        if self.user_outcomes is not None:
            out["outcomes"] = [self.trent_outcome.label] + [o.label for o in self.user_outcomes]
        if reveal:
            out["trent_op"] = None if self.trent_op is None else int(self.trent_op)
            out["applied_bits"] = None if self.applied_bits is None else list(self.applied_bits)
        return out


@dataclass(frozen=True)
class AuthVerdict:
    user: int
    accepted: bool
    mismatching_groups: int
    inconsistent_groups: int

    def to_json(self) -> dict[str, Any]:
        return {
            "user": self.user,
            "accepted": self.accepted,
            "mismatching_groups": self.mismatching_groups,
            "inconsistent_groups": self.inconsistent_groups,
        }


@dataclass
class S2Result:
    k: int
    positions: list[int]
    bases: list[str]
    mismatches: int
    rate: float
    passed: bool
    users_confirm: bool | None
    z_checks: int = 0
    z_mismatches: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "mismatches": self.mismatches,
            "rate": self.rate,
            "pass": self.passed,
            "users_confirm": self.users_confirm,
            "z_checks": self.z_checks,
            "z_mismatches": self.z_mismatches,
        }


@dataclass
class Session:
    config: SessionConfig
    trent_rng: np.random.Generator
    nature_rng: np.random.Generator
    eve_rng: np.random.Generator
    user_rngs: list[np.random.Generator]
    keys: list[AuthKey]
    final_counters: list[int]
    positions: list[adv.PartyRegister | None] = field(default_factory=list)
    consumed: set[int] = field(default_factory=set)
    transcript: list[dict[str, Any]] = field(default_factory=list)
    s2: S2Result | None = None
    groups: list[GroupRecord] = field(default_factory=list)
    group_states: dict[int, tuple[adv.PartyRegister, adv.PartyRegister]] = field(default_factory=dict)
    discarded: list[int] = field(default_factory=list)
    stage: str = "new"
    aborted: bool = False

    def post(self, sender: str, kind: str, **payload) -> None:
        """Append one classical message to the public transcript."""
        self.transcript.append({"seq": len(self.transcript), "step": _STEP[kind], "sender": sender,
                                "type": kind, **payload})

    def _require(self, *stages: str) -> None:
        if self.stage not in stages:
            raise InvalidConfig(f"stage {self.stage!r} cannot be followed by this step")


_STEP = {
    "s2_announce": "S2", "s2_user_results": "S2", "s2_trent_check": "S2",
    "s2_trent_results": "S2", "s2_user_check": "S2", "abort": "S2",
    "groups": "S3", "operations_done": "S4", "measure_request": "S6",
    "bell_results": "S6", "verdicts": "S6",
}


def user_name(j: int) -> str:
    return f"alice{j + 1}"


def new_session(config: SessionConfig) -> Session:
    seq = np.random.SeedSequence(config.seed)
    trent_ss, nature_ss, eve_ss, *user_ss = seq.spawn(3 + config.r)
    ids = config.identities()
    start = Counter(config.counter_start, config.counter_bits)
    need = max(config.m_groups, 1)
    try:
        keys = [extend_key(i, start, need) for i in ids]
    except CapacityError as exc:
        raise InvalidConfig(str(exc)) from None
    final = [config.counter_start + blocks_needed(need)] * config.r
    return Session(
        config=config,
        trent_rng=np.random.Generator(np.random.PCG64(trent_ss)),
        nature_rng=np.random.Generator(np.random.PCG64(nature_ss)),
        eve_rng=np.random.Generator(np.random.PCG64(eve_ss)),
        user_rngs=[np.random.Generator(np.random.PCG64(s)) for s in user_ss],
        keys=keys,
        final_counters=final,
    )


def distribute(config: SessionConfig) -> Session:
    """S1: prepare N GHZ(r+1) states and send the users' qubits through the channel."""
    session = new_session(config)
    fresh = adv.PartyRegister.fresh(config.r)
    for _ in range(config.n_states):
        session.positions.append(adv.channel_transform(config.attack, fresh, session.eve_rng))
    session.stage = "distributed"
    return session


def eavesdrop_check(session: Session) -> tuple[float, bool]:
    """S2: sample positions, measure in random Z/X bases and compare."""
    session._require("distributed")
    cfg = session.config
    k = cfg.n_sampled
    if k == 0:
        raise InvalidConfig("eavesdropping check needs at least one sampled state")
    rng = session.trent_rng
    positions = sorted(int(i) for i in rng.choice(cfg.n_states, size=k, replace=False))
    bases = [MeasBasis.Z if rng.random() < cfg.z_basis_probability else MeasBasis.X for _ in positions]

    trent_results, user_results = [], [[] for _ in range(cfg.r)]
    mismatches = z_checks = z_mismatches = 0
    for pos, basis in zip(positions, bases):
        reg = session.positions[pos]
        # sampling the joint outcome is equivalent to the parties measuring one by one
        dist = sv.outcome_distribution(reg.state, reg.honest_qubits, basis)
        idx = sv.sample_index(dist, session.nature_rng)
        bits = [(idx >> (cfg.r - j)) & 1 for j in range(cfg.r + 1)]
        trent_results.append(bits[0])
        for j in range(cfg.r):
            user_results[j].append(bits[j + 1])
        bad = adv.violates_correlation(bits, basis)
        mismatches += bad
        if basis is MeasBasis.Z:
            z_checks += 1
            z_mismatches += bad
        session.positions[pos] = None
        session.consumed.add(pos)

    session.post("trent", "s2_announce", positions=positions, bases=[b.value for b in bases])
    for j in range(cfg.r):
        session.post(user_name(j), "s2_user_results", results=user_results[j])
    rate = mismatches / k
    passed = rate <= cfg.check_threshold
    session.post("trent", "s2_trent_check", mismatches=mismatches, passed=passed)
    users_confirm = None
    if passed:
        session.post("trent", "s2_trent_results", results=trent_results)
        # users re-run the same rule now that Trent's bits are public
        users_confirm = mismatches / k <= cfg.check_threshold
        session.post("users", "s2_user_check", passed=users_confirm)
        passed = passed and users_confirm
    if not passed:
        session.post("trent" if users_confirm is None else "users", "abort", reason="eavesdropping check failed")
        session.aborted = True
    session.s2 = S2Result(k, positions, [b.value for b in bases], mismatches, rate, passed, users_confirm,
                          z_checks, z_mismatches)
    session.stage = "checked" if passed else "aborted"
    return rate, passed


def partition_groups(session: Session) -> Session:
    """S3: pair up M random unconsumed states as (P, Q); discard the rest."""
    session._require("checked")
    cfg = session.config
    remaining = [i for i in range(cfg.n_states) if i not in session.consumed]
    if len(remaining) < 2 * cfg.m_groups:
        raise CapacityError(f"{len(remaining)} states left, {2 * cfg.m_groups} needed")
    order = [remaining[int(i)] for i in session.trent_rng.permutation(len(remaining))]
    chosen = order[: 2 * cfg.m_groups]
    session.discarded = sorted(order[2 * cfg.m_groups:])
    for g in range(cfg.m_groups):
        p, q = chosen[2 * g], chosen[2 * g + 1]
        session.groups.append(GroupRecord(g, p, q))
        regs = tuple(adv.release_eve(session.positions[i], session.eve_rng) for i in (p, q))
        session.group_states[g] = regs
    for i in chosen + session.discarded:
        session.positions[i] = None
        session.consumed.add(i)
    session.post("trent", "groups", pairs=[[g.p, g.q] for g in session.groups], discarded=session.discarded)
    session.stage = "grouped"
    return session


def _apply(reg: adv.PartyRegister, q: int, op: PauliChoice) -> adv.PartyRegister:
    return adv.PartyRegister(sv.apply_pauli(reg.state, q, op), reg.trent, reg.users, reg.eve)


def encode_keys(session: Session) -> Session:
    """S4: user j applies I or iSy to its P qubit of group i per key bit i."""
    session._require("grouped")
    cfg = session.config
    for g in session.groups:
        bits = []
        for j in range(cfg.r):
            if j in cfg.impostors:
                bit = int(session.user_rngs[j].integers(2))
            else:
                bit = session.keys[j][g.index]
            bits.append(bit)
        p_reg, q_reg = session.group_states[g.index]
        for j, bit in enumerate(bits):
            p_reg = _apply(p_reg, p_reg.users[j], PauliChoice(bit))
        session.group_states[g.index] = (p_reg, q_reg)
        g.applied_bits = tuple(bits)
    for j in range(cfg.r):
        session.post(user_name(j), "operations_done")
    session.stage = "encoded"
    return session


def trent_randomize(session: Session) -> Session:
    """S5: Trent applies a private uniformly random I / iSy to each P qubit of his."""
    session._require("encoded")
    for g in session.groups:
        op = PauliChoice(int(session.trent_rng.integers(2)))
        p_reg, q_reg = session.group_states[g.index]
        session.group_states[g.index] = (_apply(p_reg, p_reg.trent, op), q_reg)
        g.trent_op = op
    session.stage = "randomized"
    return session


def _flip_kind(o: BellOutcome) -> BellOutcome:
    return BellOutcome.from_bits(1 - o.kind, o.sign)


def authenticate(session: Session) -> "SessionReport":
    """S6: Bell measurements, deduction, and per-user verdicts."""
    session._require("randomized")
    cfg = session.config
    session.post("trent", "measure_request")
    published: list[list[BellOutcome]] = [[] for _ in range(cfg.r)]
    for g in session.groups:
        p_reg, q_reg = session.group_states.pop(g.index)
        off = p_reg.state.n_qubits
        state = sv.tensor(p_reg.state, q_reg.state)
        outs = []
        for j in range(cfg.r):
            o, state = sv.measure_bell(state, p_reg.users[j], off + q_reg.users[j], session.nature_rng)
            if j in cfg.forgers:
                o = _flip_kind(o)
            outs.append(o)
            published[j].append(o)
        t_out, state = sv.measure_bell(state, p_reg.trent, off + q_reg.trent, session.nature_rng)
        g.trent_outcome = t_out
        g.user_outcomes = tuple(outs)
        g.deduced_bits, g.consistent = deduce_ops((t_out, *outs), g.trent_op)
    for j in range(cfg.r):
        session.post(user_name(j), "bell_results", outcomes=[o.label for o in published[j]])

    verdicts = []
    for j in range(cfg.r):
        mism = sum(g.deduced_bits[j] != session.keys[j][g.index] for g in session.groups)
        inc = sum(not g.consistent for g in session.groups)
        verdicts.append(AuthVerdict(j, mism == 0 and inc == 0, mism, inc))
    session.post("trent", "verdicts", accepted=[v.accepted for v in verdicts])
    session.stage = "done"
    return SessionReport.from_session(session, verdicts)


@dataclass
class SessionReport:
    config: SessionConfig
    status: str
    s2: S2Result | None
    groups: list[GroupRecord]
    verdicts: list[AuthVerdict]
    transcript: list[dict[str, Any]]
    discarded: list[int]
    final_counters: list[int]

    @classmethod
    def from_session(cls, session: Session, verdicts: list[AuthVerdict]) -> "SessionReport":
        return cls(
            config=session.config,
            status="aborted" if session.aborted else "completed",
            s2=session.s2,
            groups=list(session.groups),
            verdicts=verdicts,
            transcript=list(session.transcript),
            discarded=list(session.discarded),
            final_counters=list(session.final_counters),
        )

    @property
    def s2_passed(self) -> bool:
        return self.s2 is not None and self.s2.passed

    @property
    def all_accepted(self) -> bool:
        return self.s2_passed and all(v.accepted for v in self.verdicts)

    def exit_code(self) -> int:
        if not self.s2_passed:
            return 2
        if not all(v.accepted for v in self.verdicts):
            return 3
        return 0

    def to_json(self, reveal: bool = False) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "status": self.status,
            "config": self.config.to_dict(),
            "s2": None if self.s2 is None else self.s2.to_json(),
            "groups": [g.to_json(reveal) for g in self.groups],
            "verdicts": [v.to_json() for v in self.verdicts],
            "discarded": self.discarded,
            "final_counters": self.final_counters,
            "transcript": self.transcript,
        }


def run_session(config: SessionConfig) -> SessionReport:
    session = distribute(config)
    _, passed = eavesdrop_check(session)
    if not passed:
        verdicts = [AuthVerdict(j, False, 0, 0) for j in range(config.r)]
        return SessionReport.from_session(session, verdicts)
    partition_groups(session)
    encode_keys(session)
    trent_randomize(session)
    return authenticate(session)
