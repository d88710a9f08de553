"""Synthetic dependent data with exactly computable mixing structure.

A process is a hidden Markov chain on S states together with a per-state
emission law (finite alphabet of points or isotropic Gaussians) and a
deterministic state-to-label map. Emissions may drift toward a perturbation
at rate c * t**(-alpha), which makes the observed pairs (X_t, Y_t)
non-stationary while the hidden chain stays time-homogeneous.

The module computes, for such a process:

* uniform mixing coefficients phi(k) of the hidden chain, which upper-bound
  the coefficients of the observed pairs and match them exactly when the
  emission is a deterministic injective map of the state;
* marginal drift mu_t, the total-variation distance between the law of
  (X_t, Y_t) and its stationary limit -- exact for discrete emissions,
  a certified upper bound for Gaussian ones;
* the accumulated dependence factor 1 + 2 * sum_k phi(k) consumed by the
  concentration terms downstream.

A slow literal-definition oracle (`brute_force_phi`) enumerates cylinder
events so the fast path can be checked to machine precision on small chains.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadLabel,
    DimensionMismatch,
    EmptyDataset,
    NonUniqueStationary,
    NotDiscrete,
    TooLarge,
)
from .seeding import substream

_ATOL = 1e-12
_SUM_ATOL = 1e-9

_STREAM_SEQUENCE = 0
_STREAM_TARGET = 1
_STREAM_BATCH = 2

KIND_SEQUENCE = "sequence"
KIND_TARGET = "target_iid"


def _as_float_matrix(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _check_stochastic(rows: np.ndarray, name: str) -> None:
    if np.any(rows < -_ATOL) or np.any(rows > 1.0 + _ATOL):
        raise ValueError(f"{name} entries must lie in [0, 1]")
    sums = rows.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > _ATOL):
        raise ValueError(f"{name} rows must sum to 1 within {_ATOL}")


@dataclass(frozen=True, eq=False)
class MarkovSpec:
    """Time-homogeneous chain: S states, row-stochastic kernel, start law."""

    num_states: int
    transition: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        S = int(self.num_states)
        if S < 1:
            raise ValueError("num_states must be >= 1")
        P = _as_float_matrix(self.transition, "transition")
        if P.shape != (S, S):
            raise DimensionMismatch(f"transition must be ({S}, {S}), got {P.shape}")
        _check_stochastic(P, "transition")
        p0 = np.asarray(self.initial, dtype=np.float64).reshape(-1)
        if p0.shape != (S,):
            raise DimensionMismatch(f"initial must have length {S}")
        _check_stochastic(p0[None, :], "initial")
        P = P.copy()
        p0 = p0.copy()
        P.setflags(write=False)
        p0.setflags(write=False)
        object.__setattr__(self, "num_states", S)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "initial", p0)


@dataclass(frozen=True, eq=False)
class EmissionSpec:
    """Per-state emission law, optionally drifting toward a perturbation.

    mode "discrete": `alphabet` is an (M, d) array of points and `table` an
    (S, M) row-stochastic matrix; the law at time t is the convex mixture
    (1 - w_t) * table + w_t * drift_table with w_t = amplitude * t**(-exponent).
    mode "gaussian": per-state mean rows `means` (S, d) with shared isotropic
    standard deviation `sigma`; the mean at time t mixes toward `drift_means`
    with the same weight schedule.
    """

    mode: str
    alphabet: np.ndarray | None = None
    table: np.ndarray | None = None
    means: np.ndarray | None = None
    sigma: float | None = None
    drift_table: np.ndarray | None = None
    drift_means: np.ndarray | None = None
    drift_amplitude: float = 0.0
    drift_exponent: float = 0.5

    def __post_init__(self):
        if self.mode not in ("discrete", "gaussian"):
            raise ValueError(f"unknown emission mode {self.mode!r}")
        c = float(self.drift_amplitude)
        if not 0.0 <= c <= 1.0:
            raise ValueError("drift_amplitude must lie in [0, 1] so mixtures stay laws")
        if float(self.drift_exponent) <= 0.0:
            raise ValueError("drift_exponent must be > 0")
        object.__setattr__(self, "drift_amplitude", c)
        object.__setattr__(self, "drift_exponent", float(self.drift_exponent))
        if self.mode == "discrete":
            if self.alphabet is None or self.table is None:
                raise ValueError("discrete mode needs alphabet and table")
            alphabet = _as_float_matrix(self.alphabet, "alphabet")
            table = _as_float_matrix(self.table, "table")
            if table.shape[1] != alphabet.shape[0]:
                raise DimensionMismatch("table columns must match alphabet size")
            _check_stochastic(table, "table")
            drift = None
            if self.drift_table is not None:
                drift = _as_float_matrix(self.drift_table, "drift_table")
                if drift.shape != table.shape:
                    raise DimensionMismatch("drift_table must match table shape")
                _check_stochastic(drift, "drift_table")
                drift.setflags(write=False)
            for arr in (alphabet, table):
                arr.setflags(write=False)
            object.__setattr__(self, "alphabet", alphabet)
            object.__setattr__(self, "table", table)
            object.__setattr__(self, "drift_table", drift)
            object.__setattr__(self, "means", None)
            object.__setattr__(self, "drift_means", None)
            object.__setattr__(self, "sigma", None)
        else:
            if self.means is None or self.sigma is None:
                raise ValueError("gaussian mode needs means and sigma")
            means = _as_float_matrix(self.means, "means")
            sigma = float(self.sigma)
            if sigma <= 0.0:
                raise ValueError("sigma must be > 0")
            drift = None
            if self.drift_means is not None:
                drift = _as_float_matrix(self.drift_means, "drift_means")
                if drift.shape != means.shape:
                    raise DimensionMismatch("drift_means must match means shape")
                drift.setflags(write=False)
            means.setflags(write=False)
            object.__setattr__(self, "means", means)
            object.__setattr__(self, "sigma", sigma)
            object.__setattr__(self, "drift_means", drift)
            object.__setattr__(self, "alphabet", None)
            object.__setattr__(self, "table", None)
            object.__setattr__(self, "drift_table", None)

    @classmethod
    def discrete(cls, alphabet, table, drift_table=None, drift_amplitude=0.0,
                 drift_exponent=0.5) -> "EmissionSpec":
        return cls(mode="discrete", alphabet=alphabet, table=table,
                   drift_table=drift_table, drift_amplitude=drift_amplitude,
                   drift_exponent=drift_exponent)

    @classmethod
    def gaussian(cls, means, sigma, drift_means=None, drift_amplitude=0.0,
                 drift_exponent=0.5) -> "EmissionSpec":
        return cls(mode="gaussian", means=means, sigma=sigma,
                   drift_means=drift_means, drift_amplitude=drift_amplitude,
                   drift_exponent=drift_exponent)

    @property
    def num_states(self) -> int:
        src = self.table if self.mode == "discrete" else self.means
        return src.shape[0]

    @property
    def input_dim(self) -> int:
        src = self.alphabet if self.mode == "discrete" else self.means
        return src.shape[1]

    def has_drift(self) -> bool:
        if self.drift_amplitude == 0.0:
            return False
        return (self.drift_table if self.mode == "discrete" else self.drift_means) is not None

    def drift_weight(self, t: int) -> float:
        """Mixture weight w_t = amplitude * t**(-exponent); 0 without drift."""
        if not self.has_drift():
            return 0.0
        return self.drift_amplitude * float(t) ** (-self.drift_exponent)

    def table_at(self, t: int) -> np.ndarray:
        if self.mode != "discrete":
            raise NotDiscrete("table_at needs discrete emissions")
        w = self.drift_weight(t)
        if w == 0.0:
            return self.table
        return (1.0 - w) * self.table + w * self.drift_table

    def means_at(self, t: int) -> np.ndarray:
        if self.mode != "gaussian":
            raise ValueError("means_at needs gaussian emissions")
        w = self.drift_weight(t)
        if w == 0.0:
            return self.means
        return (1.0 - w) * self.means + w * self.drift_means


@dataclass(frozen=True, eq=False)
class ProcessSpec:
    """Hidden chain + emission + deterministic labels; the unit of experiment."""

    markov: MarkovSpec
    emission: EmissionSpec
    label_map: tuple
    num_classes: int
    input_dim: int

    def __post_init__(self):
        S = self.markov.num_states
        K = int(self.num_classes)
        if K < 2:
            raise BadLabel("num_classes must be >= 2")
        labels = tuple(int(v) for v in self.label_map)
        if len(labels) != S:
            raise DimensionMismatch("label_map must assign a label to every state")
        if any(not 1 <= v <= K for v in labels):
            raise BadLabel(f"labels must lie in 1..{K}")
        if self.emission.num_states != S:
            raise DimensionMismatch("emission tables must have one row per state")
        if self.emission.input_dim != int(self.input_dim):
            raise DimensionMismatch("emission dimension must equal input_dim")
        object.__setattr__(self, "label_map", labels)
        object.__setattr__(self, "num_classes", K)
        object.__setattr__(self, "input_dim", int(self.input_dim))

    def to_json_dict(self) -> dict:
        em = self.emission
        if em.mode == "discrete":
            emission = {
                "mode": "discrete",
                "alphabet": em.alphabet.tolist(),
                "table": em.table.tolist(),
                "drift_table": None if em.drift_table is None else em.drift_table.tolist(),
                "drift_amplitude": em.drift_amplitude,
                "drift_exponent": em.drift_exponent,
            }
        else:
            emission = {
                "mode": "gaussian",
                "means": em.means.tolist(),
                "sigma": em.sigma,
                "drift_means": None if em.drift_means is None else em.drift_means.tolist(),
                "drift_amplitude": em.drift_amplitude,
                "drift_exponent": em.drift_exponent,
            }
        return {
            "markov": {
                "num_states": self.markov.num_states,
                "transition": self.markov.transition.tolist(),
                "initial": self.markov.initial.tolist(),
            },
            "emission": emission,
            "label_map": list(self.label_map),
            "num_classes": self.num_classes,
            "input_dim": self.input_dim,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ProcessSpec":
        mk = doc["markov"]
        markov = MarkovSpec(num_states=mk["num_states"],
                            transition=np.asarray(mk["transition"], dtype=np.float64),
                            initial=np.asarray(mk["initial"], dtype=np.float64))
        em = doc["emission"]
        if em["mode"] == "discrete":
            emission = EmissionSpec.discrete(
                alphabet=np.asarray(em["alphabet"], dtype=np.float64),
                table=np.asarray(em["table"], dtype=np.float64),
                drift_table=None if em.get("drift_table") is None
                else np.asarray(em["drift_table"], dtype=np.float64),
                drift_amplitude=em.get("drift_amplitude", 0.0),
                drift_exponent=em.get("drift_exponent", 0.5),
            )
        else:
            emission = EmissionSpec.gaussian(
                means=np.asarray(em["means"], dtype=np.float64),
                sigma=em["sigma"],
                drift_means=None if em.get("drift_means") is None
                else np.asarray(em["drift_means"], dtype=np.float64),
                drift_amplitude=em.get("drift_amplitude", 0.0),
                drift_exponent=em.get("drift_exponent", 0.5),
            )
        return cls(markov=markov, emission=emission,
                   label_map=tuple(doc["label_map"]),
                   num_classes=doc["num_classes"], input_dim=doc["input_dim"])

    def digest(self) -> str:
        """sha256 of the canonical JSON form; identifies the spec in datasets."""
        payload = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("ascii")).hexdigest()


@dataclass(frozen=True, eq=False)
class MixingProfile:
    """phi(1..n), mu(1..n), and the dependence factor 1 + 2 * sum phi."""

    horizon: int
    phi: np.ndarray
    mu: np.ndarray
    delta_inf: float
    phi_exact: bool
    mu_exact: bool

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        mu = np.asarray(self.mu, dtype=np.float64)
        if phi.shape != (self.horizon,) or mu.shape != (self.horizon,):
            raise DimensionMismatch("phi and mu must have length horizon")
        if np.any(phi < 0.0) or np.any(phi > 1.0) or np.any(mu < 0.0) or np.any(mu > 1.0):
            raise ValueError("phi and mu entries must lie in [0, 1]")
        if self.delta_inf < 1.0:
            raise ValueError("delta_inf must be >= 1")
        phi.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "delta_inf", float(self.delta_inf))


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Ordered samples (x_i, y_i), labels in 1..num_classes.

    `kind` records how the rows were produced: "sequence" for a dependent
    draw of the process, "target_iid" for iid draws of its stationary limit.
    `spec_digest` is in-memory provenance; the text format does not carry it.
    """

    inputs: np.ndarray
    labels: np.ndarray
    num_classes: int
    kind: str
    seed: int
    spec_digest: str = ""

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise DimensionMismatch("inputs must be (n, d)")
        if y.shape != (X.shape[0],):
            raise DimensionMismatch("labels must be (n,)")
        if not np.all(np.isfinite(X)):
            raise ValueError("inputs must be finite")
        K = int(self.num_classes)
        if K < 2:
            raise BadLabel("num_classes must be >= 2")
        if y.size and (y.min() < 1 or y.max() > K):
            raise BadLabel(f"labels must lie in 1..{K}")
        if self.kind not in (KIND_SEQUENCE, KIND_TARGET):
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        X = X.copy()
        y = y.copy()
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "num_classes", K)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    def save(self, path) -> None:
        """Text format: header "n d K kind seed", then one sample per line
        (d float fields then the integer label). Floats use repr so a
        load() round-trip is bit exact."""
        lines = [f"{self.n} {self.input_dim} {self.num_classes} {self.kind} {self.seed}"]
        for row, label in zip(self.inputs, self.labels):
            fields = [repr(float(v)) for v in row]
            fields.append(str(int(label)))
            lines.append(" ".join(fields))
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "LabeledDataset":
        with open(path, "r", encoding="ascii") as fh:
            raw = fh.read().split("\n")
        head = raw[0].split()
        if len(head) != 5:
            raise ValueError("malformed dataset header")
        n, d, K = int(head[0]), int(head[1]), int(head[2])
        kind, seed = head[3], int(head[4])
        X = np.zeros((n, d), dtype=np.float64)
        y = np.zeros(n, dtype=np.int64)
        for i in range(n):
            parts = raw[1 + i].split()
            if len(parts) != d + 1:
                raise ValueError(f"dataset row {i} has {len(parts)} fields, wanted {d + 1}")
            X[i] = [float(v) for v in parts[:d]]
            y[i] = int(parts[d])
        return cls(inputs=X, labels=y, num_classes=K, kind=kind, seed=seed)


def tv_distance(p, q) -> float:
    """Total variation between two finite laws: 0.5 * sum |p_i - q_i|."""
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if p.shape != q.shape:
        raise DimensionMismatch(f"length mismatch {p.shape} vs {q.shape}")
    for name, v in (("p", p), ("q", q)):
        if np.any(v < -_SUM_ATOL):
            raise ValueError(f"{name} has negative mass")
        if abs(v.sum() - 1.0) > _SUM_ATOL:
            raise ValueError(f"{name} must sum to 1 within {_SUM_ATOL}")
    return float(0.5 * np.abs(p - q).sum())


def stationary_distribution(markov: MarkovSpec) -> np.ndarray:
    """Unique stationary law of a primitive chain.

    Uniqueness is certified by positivity of some power P**m with m <= S*S;
    chains failing that test (reducible, periodic, absorbing) raise
    NonUniqueStationary even when a stationary law happens to exist.
    """
    S = markov.num_states
    support = markov.transition > 0.0
    power = support.astype(np.int64)
    hit = bool(power.min() > 0)
    for _ in range(S * S - 1):
        if hit:
            break
        power = np.minimum(power @ support.astype(np.int64), 1)
        hit = bool(power.min() > 0)
    if not hit:
        raise NonUniqueStationary(
            "no power of the transition matrix is entrywise positive")
    A = np.vstack([markov.transition.T - np.eye(S), np.ones((1, S))])
    b = np.zeros(S + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.maximum(pi, 0.0)
    pi = pi / pi.sum()
    # Polish toward an exact float fixed point of pi @ P when one is
    # reachable; leaves the least-squares answer untouched otherwise.
    cur = pi
    for _ in range(100):
        nxt = cur @ markov.transition
        if np.array_equal(nxt, cur):
            return cur
        cur = nxt
    return pi


def _marginals(markov: MarkovSpec, tmax: int) -> np.ndarray:
    """Rows t = 0..tmax of the hidden marginal initial @ P**t."""
    out = np.empty((tmax + 1, markov.num_states))
    out[0] = markov.initial
    for t in range(1, tmax + 1):
        out[t] = out[t - 1] @ markov.transition
    return out


def marginal_at(spec: ProcessSpec, t: int) -> np.ndarray:
    """Hidden-state law at time t >= 1."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return _marginals(spec.markov, t)[t]


def _stationary_or_none(markov: MarkovSpec) -> np.ndarray | None:
    try:
        return stationary_distribution(markov)
    except NonUniqueStationary:
        return None


def deterministic_injective(spec: ProcessSpec) -> bool:
    """True when each state emits a single point and states are identifiable
    from the observed pair (point, label)."""
    em = spec.emission
    if em.mode != "discrete" or em.has_drift():
        return False
    table = em.table
    tops = table.argmax(axis=1)
    if np.any(np.abs(table[np.arange(table.shape[0]), tops] - 1.0) > _ATOL):
        return False
    keys = set()
    for s, m in enumerate(tops):
        key = (em.alphabet[m].tobytes(), spec.label_map[s])
        if key in keys:
            return False
        keys.add(key)
    return True


def phi_coefficient(spec: ProcessSpec, k: int, horizon: int) -> float:
    """Uniform mixing coefficient of the hidden chain at gap k.

    Implements sup over conditioning time n and positive-probability past
    of the total variation between the k-step future law given the past and
    the unconditional future law. Conditional future laws depend on the past
    only through the current state, and the supremum over events of a fixed
    pair of laws is their total variation, so the sup collapses to

        max over n in {0..horizon}, states b with m_n(b) > 0 of
            TV(delta_b @ P**k, m_{n+k})

    plus, when the stationary law pi* is certified unique, the limit point
    TV(delta_b @ P**k, pi*) over every state (all are reachable eventually
    for a primitive chain). For a hidden-to-observed map that is not
    deterministic and injective this value upper-bounds the observed
    coefficient (conditioning on less cannot increase the sup, and the
    future event algebra is a coarsening).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    P = spec.markov.transition
    M = _marginals(spec.markov, horizon + k)
    rows = np.linalg.matrix_power(P, k)
    best = 0.0
    for n in range(horizon + 1):
        reach = M[n] > 0.0
        if not reach.any():
            continue
        tv = 0.5 * np.abs(rows[reach] - M[n + k]).sum(axis=1)
        best = max(best, float(tv.max()))
    pistar = _stationary_or_none(spec.markov)
    if pistar is not None:
        best = max(best, float(0.5 * np.abs(rows - pistar).sum(axis=1).max()))
    return min(best, 1.0)


def brute_force_phi(spec: ProcessSpec, k: int, n_max: int, future_len: int,
                    max_subsets: int = 1 << 20) -> float:
    """Literal-definition mixing coefficient by cylinder enumeration.

    Enumerates every positive-probability past trajectory B of length
    n + 1 for each n <= n_max, and every subset A of future trajectories of
    length future_len starting at time n + k, then returns the largest
    |P[A | B] - P[A]|. Probabilities come from direct products of kernel
    entries, no linear algebra shortcuts, so this is an independent oracle
    for `phi_coefficient` on chains small enough to enumerate. Requires a
    deterministic injective emission so observed and hidden trajectories
    generate the same events.
    """
    S = spec.markov.num_states
    if k < 1 or n_max < 0 or future_len < 1:
        raise ValueError("need k >= 1, n_max >= 0, future_len >= 1")
    if S > 3 or n_max > 4 or future_len > 3:
        raise TooLarge("brute force enumerations limited to S <= 3, n_max <= 4, future_len <= 3")
    if not deterministic_injective(spec):
        raise ValueError("brute force oracle needs deterministic injective discrete emissions")
    num_future = S ** future_len
    if 2 ** num_future > max_subsets:
        raise TooLarge(f"2**{num_future} future subsets exceed budget {max_subsets}")
    P = spec.markov.transition
    p0 = spec.markov.initial

    futures = list(itertools.product(range(S), repeat=future_len))
    chain_factor = np.array([
        math.prod(P[a, b] for a, b in zip(traj, traj[1:])) if future_len > 1 else 1.0
        for traj in futures])
    first_state = np.array([traj[0] for traj in futures], dtype=np.int64)
    masks = ((np.arange(2 ** num_future)[:, None] >> np.arange(num_future)[None, :]) & 1
             ).astype(np.float64)

    def future_law(start: np.ndarray) -> np.ndarray:
        dist = start
        for _ in range(k):
            dist = dist @ P
        return dist[first_state] * chain_factor

    best = 0.0
    for n in range(n_max + 1):
        uncond = future_law(p0 @ np.linalg.matrix_power(P, n) if n else p0)
        diffs = []
        for past in itertools.product(range(S), repeat=n + 1):
            prob = p0[past[0]]
            for a, b in zip(past, past[1:]):
                prob *= P[a, b]
            if prob <= 0.0:
                continue
            start = np.zeros(S)
            start[past[-1]] = 1.0
            diffs.append(future_law(start) - uncond)
        if not diffs:
            continue
        vals = np.abs(np.array(diffs) @ masks.T)
        best = max(best, float(vals.max()))
    return best


def _alphabet_groups(alphabet: np.ndarray) -> tuple[np.ndarray, int]:
    """Collapse duplicate alphabet rows so laws live on distinct points."""
    seen: dict[bytes, int] = {}
    groups = np.empty(alphabet.shape[0], dtype=np.int64)
    for m in range(alphabet.shape[0]):
        key = alphabet[m].tobytes()
        groups[m] = seen.setdefault(key, len(seen))
    return groups, len(seen)


def _joint_table(h: np.ndarray, table: np.ndarray, groups: np.ndarray,
                 num_groups: int, label_map: tuple, K: int) -> np.ndarray:
    """Law of (point, label) given hidden law h and emission table."""
    J = np.zeros((num_groups, K))
    for s in range(table.shape[0]):
        np.add.at(J[:, label_map[s] - 1], groups, h[s] * table[s])
    return J


def _gaussian_emission_tv(spec: ProcessSpec, t: int) -> float:
    """max over states of TV between the time-t and limit Gaussian of that
    state; erf(||mean gap|| / (2 sqrt(2) sigma)) exactly for isotropic equal
    covariances."""
    em = spec.emission
    w = em.drift_weight(t)
    if w == 0.0:
        return 0.0
    gaps = np.linalg.norm(w * (em.drift_means - em.means), axis=1)
    return max(math.erf(g / (2.0 * math.sqrt(2.0) * em.sigma)) for g in gaps)


def mu_at(spec: ProcessSpec, i: int) -> float:
    """Marginal drift at time i: TV between the law of (X_i, Y_i) and its
    stationary limit. Exact for discrete emissions; for Gaussian emissions a
    certified upper bound TV(hidden_i, pi*) + max-state emission TV."""
    if i < 1:
        raise ValueError("i must be >= 1")
    pistar = stationary_distribution(spec.markov)
    h = marginal_at(spec, i)
    em = spec.emission
    if em.mode == "discrete":
        groups, G = _alphabet_groups(em.alphabet)
        J_i = _joint_table(h, em.table_at(i), groups, G, spec.label_map, spec.num_classes)
        J_inf = _joint_table(pistar, em.table, groups, G, spec.label_map, spec.num_classes)
        return float(0.5 * np.abs(J_i - J_inf).sum())
    hidden = float(0.5 * np.abs(h - pistar).sum())
    return min(1.0, hidden + _gaussian_emission_tv(spec, i))


def mixing_profile(spec: ProcessSpec, n: int) -> MixingProfile:
    """phi(1..n) and mu(1..n) for a length-n sample, plus delta_inf.

    Exactness flags: phi is exact when the emission is a deterministic
    injective driftless map of the state (otherwise a sound upper bound via
    data processing), mu is exact for any discrete emission.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    markov = spec.markov
    S = markov.num_states
    P = markov.transition
    M = _marginals(markov, 2 * n)
    pistar = _stationary_or_none(markov)
    reach_mask = (M[: n + 1] > 0.0).T

    phi = np.empty(n)
    rows = np.eye(S)
    for k in range(1, n + 1):
        rows = rows @ P
        block = M[k: n + k + 1]
        tv = 0.5 * np.abs(rows[:, None, :] - block[None, :, :]).sum(axis=-1)
        best = float(tv[reach_mask].max())
        if pistar is not None:
            best = max(best, float(0.5 * np.abs(rows - pistar).sum(axis=1).max()))
        phi[k - 1] = min(best, 1.0)

    mu = np.empty(n)
    if pistar is None:
        raise NonUniqueStationary("mu requires a certified unique stationary law")
    em = spec.emission
    if em.mode == "discrete":
        groups, G = _alphabet_groups(em.alphabet)
        J_inf = _joint_table(pistar, em.table, groups, G, spec.label_map, spec.num_classes)
        for i in range(1, n + 1):
            J_i = _joint_table(M[i], em.table_at(i), groups, G, spec.label_map,
                               spec.num_classes)
            mu[i - 1] = 0.5 * np.abs(J_i - J_inf).sum()
        mu_exact = True
    else:
        for i in range(1, n + 1):
            hidden = 0.5 * np.abs(M[i] - pistar).sum()
            mu[i - 1] = min(1.0, hidden + _gaussian_emission_tv(spec, i))
        mu_exact = False
    delta_inf = 1.0 + 2.0 * float(phi.sum())
    return MixingProfile(horizon=n, phi=phi, mu=mu, delta_inf=delta_inf,
                         phi_exact=deterministic_injective(spec), mu_exact=mu_exact)


def _inverse_cdf(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """First index whose cumulative mass reaches u, rowwise."""
    idx = (cum_rows < u[:, None]).sum(axis=1)
    return np.minimum(idx, cum_rows.shape[1] - 1)


def sample_sequence(spec: ProcessSpec, n: int, seed: int) -> LabeledDataset:
    """Draw one length-n observed path (X_1..X_n, Y_1..Y_n).

    The hidden state starts at the initial law and takes n kernel steps;
    X_i is emitted from the time-i law of state H_i. Deterministic in seed.
    """
    if n < 1:
        raise EmptyDataset("sequence length must be >= 1")
    rng = substream(seed, _STREAM_SEQUENCE)
    markov, em = spec.markov, spec.emission
    cum_p0 = np.cumsum(markov.initial)
    cum_P = np.cumsum(markov.transition, axis=1)
    u = rng.random(n + 1)
    states = np.empty(n + 1, dtype=np.int64)
    states[0] = min(int((cum_p0 < u[0]).sum()), markov.num_states - 1)
    for t in range(1, n + 1):
        row = cum_P[states[t - 1]]
        states[t] = min(int((row < u[t]).sum()), markov.num_states - 1)
    emitted = states[1:]
    labels = np.array([spec.label_map[s] for s in emitted], dtype=np.int64)
    if em.mode == "discrete":
        ue = rng.random(n)
        X = np.empty((n, spec.input_dim))
        for i in range(n):
            table = em.table_at(i + 1)
            row = np.cumsum(table[emitted[i]])
            m = min(int((row < ue[i]).sum()), row.size - 1)
            X[i] = em.alphabet[m]
    else:
        noise = rng.standard_normal((n, spec.input_dim))
        X = np.empty((n, spec.input_dim))
        for i in range(n):
            X[i] = em.means_at(i + 1)[emitted[i]] + em.sigma * noise[i]
    return LabeledDataset(inputs=X, labels=labels, num_classes=spec.num_classes,
                          kind=KIND_SEQUENCE, seed=seed, spec_digest=spec.digest())


def sample_target(spec: ProcessSpec, m: int, seed: int) -> LabeledDataset:
    """Draw m iid samples of the stationary limit (pi*, limit emission)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    pistar = stationary_distribution(spec.markov)
    rng = substream(seed, _STREAM_TARGET)
    em = spec.emission
    d = spec.input_dim
    if m == 0:
        return LabeledDataset(inputs=np.zeros((0, d)), labels=np.zeros(0, dtype=np.int64),
                              num_classes=spec.num_classes, kind=KIND_TARGET, seed=seed,
                              spec_digest=spec.digest())
    states = _inverse_cdf(np.tile(np.cumsum(pistar), (m, 1)), rng.random(m))
    labels = np.array([spec.label_map[s] for s in states], dtype=np.int64)
    if em.mode == "discrete":
        cum = np.cumsum(em.table, axis=1)
        points = _inverse_cdf(cum[states], rng.random(m))
        X = em.alphabet[points]
    else:
        X = em.means[states] + em.sigma * rng.standard_normal((m, d))
    return LabeledDataset(inputs=X, labels=labels, num_classes=spec.num_classes,
                          kind=KIND_TARGET, seed=seed, spec_digest=spec.digest())


def sample_sequences_batch(spec: ProcessSpec, n: int, trials: int,
                           seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized trials x n observed paths for Monte Carlo validators.

    Returns (inputs (trials, n, d), labels (trials, n)). Single Philox
    stream with a fixed draw order, so results depend only on the seed.
    """
    if n < 1 or trials < 1:
        raise ValueError("need n >= 1 and trials >= 1")
    rng = substream(seed, _STREAM_BATCH)
    markov, em = spec.markov, spec.emission
    cum_P = np.cumsum(markov.transition, axis=1)
    cur = _inverse_cdf(np.tile(np.cumsum(markov.initial), (trials, 1)), rng.random(trials))
    states = np.empty((trials, n), dtype=np.int64)
    for t in range(n):
        cur = _inverse_cdf(cum_P[cur], rng.random(trials))
        states[:, t] = cur
    label_arr = np.asarray(spec.label_map, dtype=np.int64)
    labels = label_arr[states]
    if em.mode == "discrete":
        X = np.empty((trials, n, spec.input_dim))
        for t in range(n):
            cum = np.cumsum(em.table_at(t + 1), axis=1)
            points = _inverse_cdf(cum[states[:, t]], rng.random(trials))
            X[:, t] = em.alphabet[points]
    else:
        X = np.empty((trials, n, spec.input_dim))
        for t in range(n):
            means = em.means_at(t + 1)
            X[:, t] = means[states[:, t]] + em.sigma * rng.standard_normal(
                (trials, spec.input_dim))
    return X, labels


def _check_f_table(spec: ProcessSpec, f_table: np.ndarray) -> np.ndarray:
    em = spec.emission
    if em.mode != "discrete":
        raise NotDiscrete("value tables need discrete emissions")
    f = np.asarray(f_table, dtype=np.float64)
    if f.shape != (em.alphabet.shape[0], spec.num_classes):
        raise DimensionMismatch(
            f"f_table must be (alphabet size, num_classes) = "
            f"({em.alphabet.shape[0]}, {spec.num_classes})")
    if np.any(f < 0.0) or np.any(f > 1.0):
        raise ValueError("f_table values must lie in [0, 1]")
    groups, _ = _alphabet_groups(em.alphabet)
    for g in np.unique(groups):
        rows = f[groups == g]
        if np.any(np.abs(rows - rows[0]) > 0.0):
            raise ValueError("f_table must agree on duplicate alphabet points")
    return f


def step_expectations(spec: ProcessSpec, f_table, n: int) -> np.ndarray:
    """Exact E[f(X_i, Y_i)] for i = 1..n on a discrete-emission process."""
    f = _check_f_table(spec, f_table)
    em = spec.emission
    M = _marginals(spec.markov, n)
    label_idx = np.asarray(spec.label_map, dtype=np.int64) - 1
    fv = f[:, label_idx]  # (alphabet, state): value when state s emits point m
    out = np.empty(n)
    for i in range(1, n + 1):
        table = em.table_at(i)
        out[i - 1] = float(np.einsum("s,sm,ms->", M[i], table, fv))
    return out


def stationary_expectation(spec: ProcessSpec, f_table) -> float:
    """Exact E[f] under the stationary limit law."""
    f = _check_f_table(spec, f_table)
    pistar = stationary_distribution(spec.markov)
    label_idx = np.asarray(spec.label_map, dtype=np.int64) - 1
    fv = f[:, label_idx]
    return float(np.einsum("s,sm,ms->", pistar, spec.emission.table, fv))


def sequence_value_means(spec: ProcessSpec, f, n: int, trials: int,
                         seed: int) -> np.ndarray:
    """Per-trial averages (1/n) sum_i f(X_i, Y_i) over `trials` paths.

    `f` is either a value table over (alphabet point, label) for discrete
    emissions or a vectorized callable f(inputs, labels) -> values.
    """
    em = spec.emission
    if callable(f):
        X, Y = sample_sequences_batch(spec, n, trials, seed)
        flat = np.asarray(f(X.reshape(-1, spec.input_dim), Y.reshape(-1)),
                          dtype=np.float64)
        return flat.reshape(trials, n).mean(axis=1)
    ftab = _check_f_table(spec, f)
    rng = substream(seed, _STREAM_BATCH)
    markov = spec.markov
    cum_P = np.cumsum(markov.transition, axis=1)
    cur = _inverse_cdf(np.tile(np.cumsum(markov.initial), (trials, 1)), rng.random(trials))
    label_idx = np.asarray(spec.label_map, dtype=np.int64) - 1
    total = np.zeros(trials)
    for t in range(n):
        cur = _inverse_cdf(cum_P[cur], rng.random(trials))
        cum = np.cumsum(em.table_at(t + 1), axis=1)
        points = _inverse_cdf(cum[cur], rng.random(trials))
        total += ftab[points, label_idx[cur]]
    return total / n
