"""Certificates and desk-scale validators for the dependent-data bounds.

The master inequality bounds the stationary risk of a predictor trained on
one path of a mixing process by four observable pieces: empirical loss,
a complexity term (twice a Rademacher bound), the average marginal drift
mu_bar, and a concentration term scaled by the dependence factor
delta_inf = 1 + 2 * sum_k phi(k). `network_certificate` assembles the
network instantiation of that inequality from layer norms;
`theorem1_bound` is the generic form for a caller-supplied complexity.

Every supporting step has a validator that checks it empirically on
processes whose mixing structure is exactly computable:

* `validate_mcdiarmid`   tail of the path mean vs the dependent-data bound;
* `validate_lemma3`      per-step expectation gaps vs the drift mu_i;
* `validate_symmetrization` deviation of empirical means vs twice the
  expected conditional Rademacher complexity;
* `validate_ramp_dominance` pointwise zero-one <= ramp domination.

Validators return report objects that serialize to JSON documents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadDelta, DimensionMismatch, WrongKind
from .network import (
    Architecture,
    NetworkParams,
    TrainConfig,
    empirical_loss,
    forward_batch,
    margins_batch,
    population_estimate,
    ramp_loss,
    train_sgd,
    zero_one_loss,
)
from .norms import LayerNorms
from .process import (
    KIND_SEQUENCE,
    LabeledDataset,
    MixingProfile,
    ProcessSpec,
    mixing_profile,
    sample_sequence,
    sample_sequences_batch,
    sample_target,
    sequence_value_means,
    stationary_expectation,
    step_expectations,
)
from .rademacher import FunctionClass, covering_bound_terms
from .seeding import combine_seeds, substream

SOURCE_COVERING = "covering_bound"
SOURCE_MC = "mc"
SOURCE_EXACT = "exact"

_CONSISTENCY_RTOL = 1e-12


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise BadDelta(f"delta must lie in (0, 1), got {delta}")


def concentration_term(n: int, delta: float, delta_inf: float) -> float:
    """3 * delta_inf * sqrt(ln(2/delta) / (2n))."""
    _check_delta(delta)
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta_inf < 1.0:
        raise ValueError("delta_inf must be >= 1")
    return 3.0 * delta_inf * math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def theorem1_bound(empirical: float, rademacher: float, profile: MixingProfile,
                   delta: float, n: int) -> float:
    """Generic risk bound: empirical + 2 * rademacher + mean(mu) + concentration."""
    _check_delta(delta)
    if n != profile.horizon:
        raise DimensionMismatch(f"profile horizon {profile.horizon} != n {n}")
    if not 0.0 <= empirical <= 1.0:
        raise ValueError("empirical loss must lie in [0, 1]")
    if rademacher < 0.0:
        raise ValueError("rademacher term must be >= 0")
    return (empirical + 2.0 * rademacher + float(profile.mu.mean())
            + concentration_term(n, delta, profile.delta_inf))


def mcdiarmid_tail_bound(epsilon: float, n: int, c: float, delta_inf: float) -> float:
    """Two-sided dependent-data bounded-differences tail:
    2 * exp(-2 eps**2 / (n c**2 delta_inf**2)) for per-coordinate range c."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be > 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    if c <= 0.0:
        raise ValueError("c must be > 0")
    if delta_inf <= 0.0:
        raise ValueError("delta_inf must be > 0")
    return 2.0 * math.exp(-2.0 * epsilon ** 2 / (n * c ** 2 * delta_inf ** 2))


@dataclass
class BoundReport:
    """Every term of one certificate, plus the plug-in ground truth.

    total_bound is the literal sum of empirical_ramp_loss, mu_mean,
    concentration_term, small_term, and complexity_term, with
    2 * rademacher_term added instead of the last two when the rademacher
    source is a direct estimate rather than the covering bound.
    """

    n: int
    gamma: float
    delta: float
    empirical_ramp_loss: float
    empirical_zero_one: float
    rademacher_term: float
    rademacher_source: str
    mu_mean: float
    concentration_term: float
    small_term: float
    complexity_term: float
    total_bound: float
    phi_exact: bool
    mu_exact: bool
    population_ramp_estimate: float | None = None
    population_zero_one_estimate: float | None = None
    population_halfwidth: float | None = None
    bound_holds: bool | None = None
    seed: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "delta": self.delta,
            "empirical_ramp_loss": self.empirical_ramp_loss,
            "empirical_zero_one": self.empirical_zero_one,
            "rademacher_term": self.rademacher_term,
            "rademacher_source": self.rademacher_source,
            "mu_mean": self.mu_mean,
            "concentration_term": self.concentration_term,
            "small_term": self.small_term,
            "complexity_term": self.complexity_term,
            "total_bound": self.total_bound,
            "phi_exact": self.phi_exact,
            "mu_exact": self.mu_exact,
            "population_ramp_estimate": self.population_ramp_estimate,
            "population_zero_one_estimate": self.population_zero_one_estimate,
            "population_halfwidth": self.population_halfwidth,
            "bound_holds": self.bound_holds,
            "seed": self.seed,
        }


def recompose_total(report: BoundReport) -> float:
    """Recompute total_bound from the stored terms (for consistency checks)."""
    extra = 2.0 * report.rademacher_term if report.rademacher_source != SOURCE_COVERING else 0.0
    return (report.empirical_ramp_loss + report.mu_mean + report.concentration_term
            + report.small_term + report.complexity_term + extra)


def network_certificate(data: LabeledDataset, params: NetworkParams, gamma: float,
                        profile: MixingProfile, delta: float,
                        target: LabeledDataset | None = None,
                        delta_est: float = 0.01,
                        norms: LayerNorms | None = None,
                        norm_tol: float = 1e-10,
                        seed: int | None = None) -> BoundReport:
    """Assemble the network risk certificate for one trained predictor.

    The complexity terms instantiate the covering bound with B = the total
    input energy sqrt(sum ||x_i||^2), W = the largest layer axis, and the
    layer norm aggregate; they equal exactly twice the two covering-bound
    addends, which is asserted. A layer with spectral norm zero makes the
    network constant, so the certificate degenerates to the non-complexity
    terms. When `target` is given, plug-in stationary losses are attached
    and bound_holds records whether the certificate clears the plug-in
    zero-one estimate minus its half-width.
    """
    if data.kind != KIND_SEQUENCE:
        raise WrongKind("certificates are issued for sequence datasets")
    n = data.n
    if n != profile.horizon:
        raise DimensionMismatch(f"profile horizon {profile.horizon} != n {n}")
    if n < 2:
        raise ValueError("certificates need n >= 2")
    _check_delta(delta)
    if norms is None:
        norms = LayerNorms.from_params(params, tol=norm_tol)
    B = float(np.sqrt((data.inputs ** 2).sum()))
    if any(s == 0.0 for s in norms.spectral):
        first, second = 4.0 / n ** 1.5, 0.0
    else:
        first, second = covering_bound_terms(B, gamma, params.width, n, norms)
    small = 2.0 * first
    complexity = 2.0 * second
    rademacher_term = first + second
    if abs(small + complexity - 2.0 * rademacher_term) > _CONSISTENCY_RTOL * max(
            1.0, 2.0 * rademacher_term):
        raise AssertionError("certificate terms disagree with the covering bound")
    conc = concentration_term(n, delta, profile.delta_inf)
    empirical = empirical_loss(params, data, gamma)
    mu_mean = float(profile.mu.mean())
    total = empirical + mu_mean + conc + small + complexity
    report = BoundReport(
        n=n, gamma=float(gamma), delta=float(delta),
        empirical_ramp_loss=empirical,
        empirical_zero_one=zero_one_loss(params, data),
        rademacher_term=rademacher_term,
        rademacher_source=SOURCE_COVERING,
        mu_mean=mu_mean,
        concentration_term=conc,
        small_term=small,
        complexity_term=complexity,
        total_bound=total,
        phi_exact=profile.phi_exact,
        mu_exact=profile.mu_exact,
        seed=seed,
    )
    if target is not None:
        pop = population_estimate(params, target, gamma, delta_est=delta_est)
        report.population_ramp_estimate = pop.ramp_loss
        report.population_zero_one_estimate = pop.zero_one_loss
        report.population_halfwidth = pop.halfwidth
        report.bound_holds = bool(total >= pop.zero_one_loss - pop.halfwidth)
    return report


@dataclass
class TailReport:
    """Empirical tail of the path mean against the analytic bound."""

    n: int
    trials: int
    delta_inf: float
    epsilons: tuple
    frequencies: tuple
    stderrs: tuple
    bounds: tuple
    violations: tuple

    @property
    def any_violation(self) -> bool:
        return any(self.violations)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "delta_inf": self.delta_inf,
            "epsilons": list(self.epsilons),
            "frequencies": list(self.frequencies),
            "stderrs": list(self.stderrs),
            "bounds": list(self.bounds),
            "violations": list(self.violations),
        }


def validate_mcdiarmid(spec: ProcessSpec, f, n: int, trials: int, seed: int,
                       epsilons: tuple = (0.02, 0.05, 0.1, 0.2, 0.3),
                       delta_inf: float | None = None) -> TailReport:
    """Simulate the path mean (1/n) sum f(Z_i) and compare its two-sided
    tails around the grand mean with the dependent-data bound at
    per-coordinate range c = 1/n.

    `f` is a value table over (alphabet point, label) for discrete
    emissions, or any vectorized callable into [0, 1]. Passing `delta_inf`
    overrides the profile's dependence factor (a deliberately corrupted
    value is the negative control: the bound turns false and violations
    should be flagged).
    """
    if trials < 2:
        raise ValueError("need trials >= 2")
    if delta_inf is None:
        delta_inf = mixing_profile(spec, n).delta_inf
    means = sequence_value_means(spec, f, n, trials, seed)
    center = float(means.mean())
    freqs, errs, bnds, flags = [], [], [], []
    for eps in epsilons:
        hit = float(np.mean(np.abs(means - center) >= eps))
        stderr = math.sqrt(hit * (1.0 - hit) / trials)
        bound = mcdiarmid_tail_bound(eps, n, 1.0 / n, delta_inf)
        freqs.append(hit)
        errs.append(stderr)
        bnds.append(bound)
        flags.append(bool(hit - 3.0 * stderr > bound))
    return TailReport(n=n, trials=trials, delta_inf=float(delta_inf),
                      epsilons=tuple(float(e) for e in epsilons),
                      frequencies=tuple(freqs), stderrs=tuple(errs),
                      bounds=tuple(bnds), violations=tuple(flags))


@dataclass
class Lemma3Report:
    """Exact per-step expectation gaps against the drift sequence."""

    n: int
    gaps: tuple
    mu: tuple
    max_slack: float
    avg_gap: float
    mu_mean: float
    tol: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "gaps": list(self.gaps),
            "mu": list(self.mu),
            "max_slack": self.max_slack,
            "avg_gap": self.avg_gap,
            "mu_mean": self.mu_mean,
            "tol": self.tol,
            "passed": self.passed,
        }


def validate_lemma3(spec: ProcessSpec, f_table, n: int,
                    tol: float = 1e-12) -> Lemma3Report:
    """Check |E f(Z_i) - E_stationary f| <= mu_i for every i <= n, and the
    averaged version, with both sides computed exactly (discrete emissions
    only). The slack reported is max_i (gap_i - mu_i)."""
    per_step = step_expectations(spec, f_table, n)
    limit = stationary_expectation(spec, f_table)
    profile = mixing_profile(spec, n)
    gaps = np.abs(per_step - limit)
    slack = float((gaps - profile.mu).max())
    avg_gap = float(abs(per_step.mean() - limit))
    mu_mean = float(profile.mu.mean())
    passed = bool(slack <= tol and avg_gap <= mu_mean + tol)
    return Lemma3Report(n=n, gaps=tuple(float(g) for g in gaps),
                        mu=tuple(float(m) for m in profile.mu),
                        max_slack=slack, avg_gap=avg_gap, mu_mean=mu_mean,
                        tol=tol, passed=passed)


@dataclass
class SymmetrizationReport:
    """Monte Carlo check of the symmetrization inequality."""

    n: int
    trials: int
    class_size: int
    lhs_mean: float
    lhs_stderr: float
    rhs_mean: float
    rhs_stderr: float
    signs_method: str
    violation: bool

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "class_size": self.class_size,
            "lhs_mean": self.lhs_mean,
            "lhs_stderr": self.lhs_stderr,
            "rhs_mean": self.rhs_mean,
            "rhs_stderr": self.rhs_stderr,
            "signs_method": self.signs_method,
            "violation": self.violation,
        }


def _class_step_means(fclass: FunctionClass, spec: ProcessSpec, n: int,
                      seed: int, trials: int) -> np.ndarray:
    """Per-member process means (1/n) sum_i E f(Z_i).

    Exact via value tables on the finite support for discrete emissions;
    otherwise estimated from an independent batch (the extra noise only
    biases the check toward flagging, never toward passing)."""
    if spec.emission.mode == "discrete":
        alphabet = spec.emission.alphabet
        K = spec.num_classes
        out = np.empty(fclass.size)
        for m, f in enumerate(fclass.evaluators):
            tab = np.column_stack([
                np.asarray(f(alphabet, np.full(alphabet.shape[0], y, dtype=np.int64)),
                           dtype=np.float64)
                for y in range(1, K + 1)])
            out[m] = float(step_expectations(spec, tab, n).mean())
        return out
    X, Y = sample_sequences_batch(spec, n, trials, combine_seeds(seed, 1))
    F = fclass.evaluate(X.reshape(-1, spec.input_dim), Y.reshape(-1))
    return F.reshape(fclass.size, trials, n).mean(axis=(1, 2))


def validate_symmetrization(fclass: FunctionClass, spec: ProcessSpec, n: int,
                            trials: int, seed: int,
                            exact_sign_limit: int = 12,
                            mc_signs: int = 256) -> SymmetrizationReport:
    """Estimate both sides of the symmetrization step over `trials` paths.

    lhs: E sup_f [(1/n) sum_i f(Z_i) - (1/n) sum_i E f(Z_i)];
    rhs: 2 E R_hat, the conditional complexity averaged over paths, with
    signs enumerated exactly when n <= exact_sign_limit and sampled
    independently per path otherwise. Flags a violation when the lhs
    exceeds the rhs beyond combined 3-stderr bands.
    """
    if trials < 2:
        raise ValueError("need trials >= 2")
    X, Y = sample_sequences_batch(spec, n, trials, seed)
    F = fclass.evaluate(X.reshape(-1, spec.input_dim), Y.reshape(-1))
    F = F.reshape(fclass.size, trials, n)
    centers = _class_step_means(fclass, spec, n, seed, trials)
    lhs_vals = (F.mean(axis=2) - centers[:, None]).max(axis=0)

    if n <= exact_sign_limit:
        method = "exact"
        signs = _all_signs(n)
        rhat = np.empty(trials)
        for start in range(0, trials, 128):
            chunk = F[:, start:start + 128, :]
            sums = np.tensordot(chunk, signs, axes=([2], [1]))
            rhat[start:start + chunk.shape[1]] = sums.max(axis=0).mean(axis=1) / n
    else:
        method = "monte_carlo"
        rng = substream(seed, 3)
        rhat = np.empty(trials)
        for t in range(trials):
            signs = rng.integers(0, 2, size=(mc_signs, n)).astype(np.float64) * 2.0 - 1.0
            rhat[t] = float((signs @ F[:, t, :].T).max(axis=1).mean()) / n
    rhs_vals = 2.0 * rhat

    lhs_mean = float(lhs_vals.mean())
    lhs_stderr = float(lhs_vals.std(ddof=1) / math.sqrt(trials))
    rhs_mean = float(rhs_vals.mean())
    rhs_stderr = float(rhs_vals.std(ddof=1) / math.sqrt(trials))
    violation = bool(lhs_mean - 3.0 * lhs_stderr > rhs_mean + 3.0 * rhs_stderr)
    return SymmetrizationReport(n=n, trials=trials, class_size=fclass.size,
                                lhs_mean=lhs_mean, lhs_stderr=lhs_stderr,
                                rhs_mean=rhs_mean, rhs_stderr=rhs_stderr,
                                signs_method=method, violation=violation)


def _all_signs(n: int) -> np.ndarray:
    codes = np.arange(1 << n, dtype=np.uint64)[:, None]
    bits = (codes >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)
    return bits.astype(np.float64) * 2.0 - 1.0


@dataclass
class RampDominanceReport:
    trials: int
    failures: int

    def to_json_dict(self) -> dict:
        return {"trials": self.trials, "failures": self.failures}


def validate_ramp_dominance(trials: int, seed: int,
                            max_classes: int = 5) -> RampDominanceReport:
    """Random sweep of the pointwise domination: the zero-one indicator
    (argmax error, ties counted as errors) never exceeds the ramp loss of
    the negated margin, for any score vector, label, and gamma."""
    rng = substream(seed, 0)
    failures = 0
    done = 0
    while done < trials:
        batch = min(trials - done, 20000)
        K = int(rng.integers(2, max_classes + 1))
        scale = 10.0 ** rng.uniform(-2.0, 2.0)
        logits = rng.standard_normal((batch, K)) * scale
        ties = rng.random(batch) < 0.1
        labels = rng.integers(1, K + 1, size=batch)
        # force exact argmax ties on a slice so the boundary case is exercised
        idx = np.where(ties)[0]
        top = logits[idx].max(axis=1)
        logits[idx, labels[idx] - 1] = top
        gamma = float(10.0 ** rng.uniform(-2.0, 1.0))
        margins = margins_batch(logits, labels)
        indicator = (margins <= 0.0).astype(np.float64)
        ramp = ramp_loss(-margins, gamma)
        failures += int((indicator > ramp).sum())
        done += batch
    return RampDominanceReport(trials=done, failures=failures)


def certification_run(spec: ProcessSpec, arch: Architecture, train_config: TrainConfig,
                      profile: MixingProfile, n_train: int, m_target: int,
                      gamma_list, delta: float, seed: int,
                      delta_est: float = 0.01) -> list:
    """Sample, train, and certify one seed across every gamma."""
    data = sample_sequence(spec, n_train, seed)
    target = sample_target(spec, m_target, seed)
    cfg = replace(train_config, seed=combine_seeds(train_config.seed, seed))
    result = train_sgd(data, arch, cfg)
    norms = LayerNorms.from_params(result.params)
    reports = []
    for gamma in gamma_list:
        reports.append(network_certificate(
            data, result.params, float(gamma), profile, delta,
            target=target, delta_est=delta_est, norms=norms, seed=seed))
    return reports


def run_certification(spec: ProcessSpec, arch: Architecture, train_config: TrainConfig,
                      n_train: int, m_target: int, gamma_list, delta: float,
                      seeds, delta_est: float = 0.01) -> list:
    """Full pipeline over a seed list; one BoundReport per seed x gamma."""
    if not gamma_list:
        raise ValueError("gamma_list must be nonempty")
    profile = mixing_profile(spec, n_train)
    reports = []
    for seed in seeds:
        reports.extend(certification_run(spec, arch, train_config, profile,
                                         n_train, m_target, gamma_list, delta,
                                         int(seed), delta_est=delta_est))
    return reports
