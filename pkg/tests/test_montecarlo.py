import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdepth.montecarlo import (
    IidProcessSpec,
    consistency_experiment,
    maximizer_experiment,
    population_local_depth_iid,
    replicate_rng,
)

GAUSS = IidProcessSpec("gaussian", (0.0, 1.0), p=2, seed=11)


def test_population_examples():
    # Phi(1) - Phi(0) = 0.341344746...
    assert population_local_depth_iid(GAUSS, [0, 0], 1) == pytest.approx(0.3413447460685429**2, rel=1e-14)
    unif = IidProcessSpec("uniform", (0.0, 1.0), p=1)
    assert population_local_depth_iid(unif, [0.5], 0.25) == pytest.approx(0.25, abs=1e-15)
    for p in (1, 3):
        spec = IidProcessSpec("gaussian", (0.0, 1.0), p=p)
        assert population_local_depth_iid(spec, np.zeros(p), np.inf) == 0.5**p


def test_population_hr_only():
    with pytest.raises(ValueError):
        population_local_depth_iid(GAUSS, [0, 0], 1, method="mhr")
    with pytest.raises(ValueError):
        population_local_depth_iid(GAUSS, [0, 0, 0], 1)


@pytest.mark.parametrize("args", [("gaussian", (0, 0)), ("uniform", (1, 1)), ("cauchy", (0, 1))])
def test_spec_validation(args):
    with pytest.raises(ValueError):
        IidProcessSpec(*args)


@given(st.floats(-3, 3), st.floats(0, 2), st.floats(0, 2))
def test_population_monotone_in_tau(y, t1, t2):
    lo, hi = sorted((t1, t2))
    assert population_local_depth_iid(GAUSS, [y, -y / 2], lo) <= population_local_depth_iid(GAUSS, [y, -y / 2], hi)


def test_replicate_streams_are_keyed():
    a = replicate_rng(5, 1, 2).random(4)
    assert np.array_equal(a, replicate_rng(5, 1, 2).random(4))
    assert not np.array_equal(a, replicate_rng(5, 2, 1).random(4))
    assert not np.array_equal(a, replicate_rng(6, 1, 2).random(4))


def test_consistency_reproducible_and_serializable():
    a = consistency_experiment(GAUSS, [0, 0], 1, sizes=(50, 200), replicates=3)
    b = consistency_experiment(GAUSS, [0, 0], 1, sizes=(50, 200), replicates=3)
    assert a.to_json() == b.to_json()
    data = json.loads(a.to_json())
    assert data["sizes"] == [50, 200] and data["seed"] == 11 and len(data["estimates"][0]) == 3
    assert all(e >= 0 for e in a.errors)
    assert "population depth" in a.table()


def test_errors_shrink_along_ladder():
    rep = consistency_experiment(GAUSS, [0, 0], 1, sizes=(100, 1000, 10000), replicates=20, seed=0)
    assert rep.errors[0] > rep.errors[1] > rep.errors[2]


def test_errors_non_increasing_in_most_runs():
    ok = 0
    for seed in range(20):
        rep = consistency_experiment(GAUSS, [0, 0], 1, sizes=(100, 1000, 10000), replicates=20, seed=seed)
        ok += all(b <= a for a, b in zip(rep.errors, rep.errors[1:]))
    assert ok >= 18


def test_far_point_has_zero_error():
    rep = consistency_experiment(GAUSS, [8, 8], 1, sizes=(100, 500), replicates=2)
    # the Gaussian tail leaves a population value far below any 1/n
    assert rep.population < 1e-12 and max(rep.errors) < 1e-12
    assert rep.estimates == [[0, 0], [0, 0]]


@pytest.mark.parametrize("sizes, reps", [((100, 100), 2), ((0, 10), 2), ((10,), 0)])
def test_bad_ladder(sizes, reps):
    with pytest.raises(ValueError):
        consistency_experiment(GAUSS, [0, 0], 1, sizes=sizes, replicates=reps)


def test_maximizer_tracks_population_argmax():
    cand = np.array([[v, v] for v in (-1.5, -0.75, 0.0, 0.75, 1.5)])
    rep = maximizer_experiment(GAUSS, cand, 1, sizes=(100, 10000), replicates=5)
    assert rep.population_argmax == 2
    assert rep.sup_errors[1] < rep.sup_errors[0]
    assert rep.argmax_distance[-1] == 0
    assert json.loads(rep.to_json())["population_argmax"] == 2
