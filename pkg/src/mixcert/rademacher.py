"""Empirical Rademacher complexity of finite [0, 1]-valued classes.

The conditional complexity of a class F on points z_1..z_n is

    R_hat = E_signs [ sup_{f in F} (1/n) sum_i theta_i f(z_i) ]

with iid uniform signs theta_i in {-1, +1}. `empirical_rademacher_exact`
enumerates all 2**n sign vectors; `empirical_rademacher_mc` samples them and
reports a standard error. `covering_rademacher_bound` is the closed-form
covering-number bound for margin losses of norm-bounded networks; the
certificate module consumes its two terms scaled by 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EmptyDataset, NonpositiveGamma, TooLarge
from .network import NetworkParams, forward_batch, margins_batch, ramp_loss
from .norms import LayerNorms, require_positive_spectral
from .process import LabeledDataset
from .seeding import substream

_EXACT_MAX_N = 20
_RANGE_ATOL = 1e-12


@dataclass(frozen=True)
class FunctionClass:
    """Finite family of vectorized evaluators (inputs, labels) -> [0, 1]."""

    evaluators: tuple
    label: str = "class"

    def __post_init__(self):
        if not self.evaluators:
            raise ValueError("a function class needs at least one member")
        object.__setattr__(self, "evaluators", tuple(self.evaluators))

    @property
    def size(self) -> int:
        return len(self.evaluators)

    def evaluate(self, inputs: np.ndarray, labels: np.ndarray) -> np.ndarray:
        """Value matrix (members x points); range-checked on use."""
        X = np.asarray(inputs, dtype=np.float64)
        y = np.asarray(labels, dtype=np.int64)
        out = np.empty((self.size, X.shape[0]))
        for m, f in enumerate(self.evaluators):
            vals = np.asarray(f(X, y), dtype=np.float64).reshape(-1)
            if vals.shape[0] != X.shape[0]:
                raise ValueError(f"member {m} returned {vals.shape[0]} values "
                                 f"for {X.shape[0]} points")
            if vals.min(initial=0.0) < -_RANGE_ATOL or vals.max(initial=0.0) > 1.0 + _RANGE_ATOL:
                raise ValueError(f"member {m} left [0, 1]")
            out[m] = vals
        return out


def constant_class(values, label: str = "constants") -> FunctionClass:
    """One constant function per value."""
    def make(c: float) -> Callable:
        return lambda X, y, c=float(c): np.full(X.shape[0], c)
    return FunctionClass(evaluators=tuple(make(c) for c in values), label=label)


def table_class(alphabet: np.ndarray, tables, label: str = "tables") -> FunctionClass:
    """Functions given by value tables over (alphabet point, label).

    Inputs are matched to alphabet rows bitwise, which is how discrete
    processes emit them.
    """
    alphabet = np.asarray(alphabet, dtype=np.float64)
    lookup = {alphabet[m].tobytes(): m for m in range(alphabet.shape[0])}

    def make(tab: np.ndarray) -> Callable:
        def f(X: np.ndarray, y: np.ndarray, tab=tab) -> np.ndarray:
            idx = np.empty(X.shape[0], dtype=np.int64)
            for i in range(X.shape[0]):
                key = np.ascontiguousarray(X[i]).tobytes()
                if key not in lookup:
                    raise ValueError("input point is not an alphabet point")
                idx[i] = lookup[key]
            return tab[idx, y - 1]
        return f

    checked = []
    for tab in tables:
        tab = np.asarray(tab, dtype=np.float64)
        if tab.shape[0] != alphabet.shape[0]:
            raise ValueError("each table needs one row per alphabet point")
        if tab.min() < 0.0 or tab.max() > 1.0:
            raise ValueError("table values must lie in [0, 1]")
        checked.append(tab)
    return FunctionClass(evaluators=tuple(make(t) for t in checked), label=label)


def loss_class(params_list, gamma: float, label: str = "ramp losses") -> FunctionClass:
    """Ramp losses of negated margins of fixed networks."""
    if gamma <= 0.0:
        raise NonpositiveGamma("gamma must be > 0")

    def make(params: NetworkParams) -> Callable:
        def f(X: np.ndarray, y: np.ndarray, params=params) -> np.ndarray:
            return ramp_loss(-margins_batch(forward_batch(params, X), y), gamma)
        return f

    return FunctionClass(evaluators=tuple(make(p) for p in params_list), label=label)


@dataclass(frozen=True)
class RademacherEstimate:
    value: float
    stderr: float
    trials: int
    method: str


def _sign_chunk(start: int, stop: int, n: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.uint64)[:, None]
    bits = (codes >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)
    return bits.astype(np.float64) * 2.0 - 1.0


def empirical_rademacher_exact(fclass: FunctionClass, data: LabeledDataset,
                               chunk: int = 65536) -> RademacherEstimate:
    """Exact complexity by full sign enumeration; needs n <= 20."""
    n = data.n
    if n == 0:
        raise EmptyDataset("need at least one point")
    if n > _EXACT_MAX_N:
        raise TooLarge(f"2**{n} sign vectors exceed the exact budget (n <= {_EXACT_MAX_N})")
    F = fclass.evaluate(data.inputs, data.labels)
    total = 0.0
    count = 1 << n
    for start in range(0, count, chunk):
        signs = _sign_chunk(start, min(start + chunk, count), n)
        total += float((signs @ F.T).max(axis=1).sum())
    return RademacherEstimate(value=total / count / n, stderr=0.0,
                              trials=count, method="exact")


def empirical_rademacher_mc(fclass: FunctionClass, data: LabeledDataset,
                            trials: int, seed: int) -> RademacherEstimate:
    """Monte Carlo complexity over `trials` sign draws with its stderr."""
    if trials < 100:
        raise ValueError("need trials >= 100 for a meaningful stderr")
    n = data.n
    if n == 0:
        raise EmptyDataset("need at least one point")
    F = fclass.evaluate(data.inputs, data.labels)
    rng = substream(seed, 0)
    signs = rng.integers(0, 2, size=(trials, n)).astype(np.float64) * 2.0 - 1.0
    sups = (signs @ F.T).max(axis=1) / n
    return RademacherEstimate(value=float(sups.mean()),
                              stderr=float(sups.std(ddof=1) / math.sqrt(trials)),
                              trials=trials, method="monte_carlo")


def covering_bound_terms(B: float, gamma: float, W: int, n: int,
                         norms: LayerNorms) -> tuple[float, float]:
    """The two addends of the covering bound, separately.

    First term 4 / n**(3/2); second term
    (36 * B * ln(2W) * ln(n) / (gamma * n)) * (sum (b_i/s_i)**(2/3))**(3/2)
    * prod(s_i * p_i). The certificate consumes both scaled by 2.
    """
    if gamma <= 0.0:
        raise NonpositiveGamma("gamma must be > 0")
    if n < 2:
        raise ValueError("n must be >= 2")
    if B < 0.0:
        raise ValueError("B must be >= 0")
    if W < 1:
        raise ValueError("W must be >= 1")
    require_positive_spectral(norms)
    s = np.asarray(norms.spectral)
    b = np.asarray(norms.two_one)
    p = np.asarray(norms.lipschitz)
    ratio = float(((b / s) ** (2.0 / 3.0)).sum() ** 1.5)
    lead = 36.0 * B * math.log(2.0 * W) * math.log(n) / (gamma * n)
    return 4.0 / n ** 1.5, lead * ratio * float(np.prod(s * p))


def covering_rademacher_bound(B: float, gamma: float, W: int, n: int,
                              norms: LayerNorms) -> float:
    """Closed-form bound on the Rademacher complexity of the ramp-loss class
    of networks with the given layer norms on points of total energy B**2."""
    first, second = covering_bound_terms(B, gamma, W, n, norms)
    return first + second
