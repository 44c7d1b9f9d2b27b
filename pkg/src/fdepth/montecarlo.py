"""Sampling experiments for the large-sample behaviour of local depth.

For a process whose grid values are independent with known marginal CDFs
``F_k``, the population local half-region depth factorizes:

    P(y - tau <= Y <= y) = prod_k [F_k(y_k) - F_k(y_k - tau_k)]

and likewise for the upper slab, which gives an exact target for the
sample estimate.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtr

from .dataset import FunctionalDataset, as_tau
from .local_depth import local_depth_hr

__all__ = [
    "IidProcessSpec",
    "ConsistencyReport",
    "MaximizerReport",
    "population_local_depth_iid",
    "consistency_experiment",
    "maximizer_experiment",
    "replicate_rng",
]


@dataclass(frozen=True)
class IidProcessSpec:
    """Independent, identically distributed values at each of ``p`` grid points."""

    marginal: str = "gaussian"
    params: tuple[float, float] = (0.0, 1.0)
    p: int = 2
    seed: int = 0

    def __post_init__(self):
        a, b = self.params
        if self.marginal == "gaussian":
            if not b > 0:
                raise ValueError("gaussian marginal needs sigma > 0")
        elif self.marginal == "uniform":
            if not a < b:
                raise ValueError("uniform marginal needs a < b")
        else:
            raise ValueError(f"unknown marginal {self.marginal!r}")
        if self.p < 1:
            raise ValueError("p must be positive")

    def cdf(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        a, b = self.params
        if self.marginal == "gaussian":
            return ndtr((v - a) / b)
        return np.clip((v - a) / (b - a), 0.0, 1.0)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        a, b = self.params
        if self.marginal == "gaussian":
            return rng.normal(a, b, size=(n, self.p))
        return rng.uniform(a, b, size=(n, self.p))


def replicate_rng(seed: int, *keys: int) -> np.random.Generator:
    """Philox stream determined only by ``seed`` and the integer ``keys``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def population_local_depth_iid(spec: IidProcessSpec, y, tau, method: str = "hr") -> float:
    if str(method).lower() != "hr":
        raise ValueError("population oracle is available for the half-region method only")
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != spec.p:
        raise ValueError(f"curve has {y.size} points, process has {spec.p}")
    tau = as_tau(tau, spec.p)
    lower = np.prod(spec.cdf(y) - spec.cdf(y - tau))
    upper = np.prod(spec.cdf(y + tau) - spec.cdf(y))
    return float(min(lower, upper))


@dataclass
class ConsistencyReport:
    sizes: list[int]
    errors: list[float]
    replicates: int
    seed: int
    population: float
    estimates: list[list[float]] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    def table(self) -> str:
        lines = [f"population depth = {self.population:.6f}  (replicates={self.replicates}, seed={self.seed})",
                 f"{'n':>10}  {'mean |error|':>14}"]
        lines += [f"{n:>10}  {e:>14.6f}" for n, e in zip(self.sizes, self.errors)]
        return "\n".join(lines)


def _check_ladder(sizes, replicates):
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be positive and strictly increasing")
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    return sizes


def consistency_experiment(
    spec: IidProcessSpec, y, tau, sizes=(100, 1000, 10000), replicates: int = 20, seed: int | None = None
) -> ConsistencyReport:
    """Mean absolute error of the sample local depth at ``y``, per sample size."""
    sizes = _check_ladder(sizes, replicates)
    seed = spec.seed if seed is None else int(seed)
    y = np.asarray(y, dtype=float).reshape(-1)
    target = population_local_depth_iid(spec, y, tau)
    errors, estimates = [], []
    for s, n in enumerate(sizes):
        est = []
        for r in range(replicates):
            data = spec.sample(replicate_rng(seed, s, r), n)
            est.append(local_depth_hr(y, FunctionalDataset.from_array(data), tau))
        estimates.append(est)
        errors.append(float(np.mean(np.abs(np.array(est) - target))))
    return ConsistencyReport(sizes, errors, replicates, seed, target, estimates)


@dataclass
class MaximizerReport:
    sizes: list[int]
    sup_errors: list[float]
    argmax_distance: list[float]
    population_argmax: int
    replicates: int
    seed: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def maximizer_experiment(
    spec: IidProcessSpec, candidates, tau, sizes=(100, 1000, 10000), replicates: int = 10, seed: int | None = None
) -> MaximizerReport:
    """Track the sample maximizer of local depth over a finite family of curves.

    For each size reports the mean (over replicates) of the largest absolute
    error over the family and the mean sup-norm distance between the sample
    and population maximizers.
    """
    sizes = _check_ladder(sizes, replicates)
    seed = spec.seed if seed is None else int(seed)
    cand = np.atleast_2d(np.asarray(candidates, dtype=float))
    pop = np.array([population_local_depth_iid(spec, c, tau) for c in cand])
    best = int(np.argmax(pop))
    sup_err, dist = [], []
    for s, n in enumerate(sizes):
        e_r, d_r = [], []
        for r in range(replicates):
            ds = FunctionalDataset.from_array(spec.sample(replicate_rng(seed, s, r), n))
            sample_depth = np.array([local_depth_hr(c, ds, tau) for c in cand])
            e_r.append(np.max(np.abs(sample_depth - pop)))
            d_r.append(np.max(np.abs(cand[int(np.argmax(sample_depth))] - cand[best])))
        sup_err.append(float(np.mean(e_r)))
        dist.append(float(np.mean(d_r)))
    return MaximizerReport(sizes, sup_err, dist, best, replicates, seed)
