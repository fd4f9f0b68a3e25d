import itertools
import math

import numpy as np
import pytest

from robust_persuasion.arbitrary import batch_knapsack_values, batch_scheme_utilities
from robust_persuasion.core import Prior, is_bayes_plausible, sender_utility
from robust_persuasion.multidim import (
    GridInstance,
    KnapsackRegion,
    antidiagonal_embedding,
    grid_instance_from_dict,
    grid_instance_to_dict,
    is_monotone_grid,
    lift_antidiagonal_utility,
    md_regret_bound_check,
    median_knapsack_scheme,
    sample_monotone_utility,
)
from robust_persuasion.standard import optimal_knapsack


def test_grid_instance_validation():
    with pytest.raises(ValueError, match="exactly one"):
        GridInstance(dims=(2, 2))
    with pytest.raises(ValueError, match="exactly one"):
        GridInstance(
            dims=(2,), marginals=(np.array([0.5, 0.5]),), joint=np.array([0.5, 0.5])
        )
    with pytest.raises(ValueError, match="monotone"):
        GridInstance(
            dims=(2, 2),
            marginals=(np.array([0.5, 0.5]), np.array([0.5, 0.5])),
            utility=np.array([[1.0, 0.0], [0.0, 0.0]]),
        )


def test_knapsack_region():
    region = KnapsackRegion((0.5, 0.5))
    assert region.contains([0.6, 0.7])
    assert region.contains([0.5, 0.5])
    assert not region.contains([0.4, 0.9])


def test_median_scheme_k1_uniform_is_half_threshold():
    inst = GridInstance(dims=(2,), marginals=(np.array([0.5, 0.5]),))
    s = median_knapsack_scheme(inst)
    np.testing.assert_allclose(s.weights, [0.5, 0.5])
    rows = sorted(tuple(r) for r in s.posteriors)
    assert rows == [(0.0, 1.0), (1.0, 0.0)]


def test_median_scheme_high_weight_is_exactly_quarter():
    rng = np.random.default_rng(0)
    for _ in range(20):
        marginals = tuple(rng.dirichlet(np.ones(rng.integers(2, 5))) for _ in range(2))
        inst = GridInstance(dims=tuple(m.size for m in marginals), marginals=marginals)
        s = median_knapsack_scheme(inst)
        assert s.weights[0] == 0.25


def test_median_scheme_3x3_uniform_high_posterior():
    # hand conditioning: per dimension the top half weights levels (0, 1/6, 1/3),
    # so the high posterior is the product (0, 1/3, 2/3) x (0, 1/3, 2/3)
    inst = GridInstance(dims=(3, 3), marginals=(np.full(3, 1 / 3), np.full(3, 1 / 3)))
    s = median_knapsack_scheme(inst)
    expected = np.outer([0.0, 1 / 3, 2 / 3], [0.0, 1 / 3, 2 / 3]).ravel()
    np.testing.assert_allclose(s.posteriors[0], expected, atol=1e-12)


def test_median_scheme_bayes_plausible():
    rng = np.random.default_rng(1)
    for k in (1, 2, 3):
        for _ in range(8):
            dims = tuple(int(rng.integers(2, 6)) for _ in range(k))
            marginals = tuple(rng.dirichlet(np.ones(d)) for d in dims)
            inst = GridInstance(dims=dims, marginals=marginals)
            s = median_knapsack_scheme(inst)
            assert is_bayes_plausible(s, Prior(inst.joint_probs().ravel()))


def test_median_scheme_rejects_joint_priors():
    joint = np.array([[0.3, 0.2], [0.2, 0.3]])
    inst = GridInstance(dims=(2, 2), joint=joint)
    with pytest.raises(ValueError, match="product"):
        median_knapsack_scheme(inst)


def test_md_regret_zero_utility():
    inst = GridInstance(
        dims=(3, 3),
        marginals=(np.full(3, 1 / 3), np.full(3, 1 / 3)),
        utility=np.zeros((3, 3)),
    )
    regret, bound = md_regret_bound_check(inst)
    assert regret == pytest.approx(0.0, abs=1e-12)
    assert bound == 0.75


def test_md_regret_top_box_only():
    # +1 on the states Pareto-above the median, huge penalty elsewhere:
    # the scheme earns exactly 2^-k while the optimum barely exceeds it
    u = np.full((3, 3), -1e6)
    u[1:, 1:] = 1.0
    inst = GridInstance(
        dims=(3, 3), marginals=(np.full(3, 1 / 3), np.full(3, 1 / 3)), utility=u
    )
    mu, flat_u = inst.flatten()
    scheme = median_knapsack_scheme(inst)
    assert sender_utility(scheme, flat_u) == pytest.approx(0.25, abs=1e-12)
    ustar = optimal_knapsack(mu, flat_u).optimal_utility
    assert 4.0 / 9.0 <= ustar < 4.0 / 9.0 + 1e-4
    regret, bound = md_regret_bound_check(inst)
    assert regret < bound


def test_md_regret_bound_is_not_vacuous():
    # borderline utility: -1 everywhere except the top corner balancing it;
    # the whole prior pools (u* = 1) while only the high signal adopts
    u = np.full((3, 3), -1.0)
    u[2, 2] = 8.0
    inst = GridInstance(
        dims=(3, 3), marginals=(np.full(3, 1 / 3), np.full(3, 1 / 3)), utility=u
    )
    regret, bound = md_regret_bound_check(inst)
    assert regret >= bound - 0.1
    assert regret <= bound + 1e-9


def test_md_regret_random_monotone_sweep():
    rng = np.random.default_rng(2)
    for _ in range(5):
        marginals = tuple(rng.dirichlet(np.ones(3)) for _ in range(2))
        for _ in range(40):
            inst = GridInstance(
                dims=(3, 3),
                marginals=marginals,
                utility=sample_monotone_utility((3, 3), int(rng.integers(2**63))),
            )
            regret, bound = md_regret_bound_check(inst)
            assert regret <= bound + 1e-9


def test_flattened_knapsack_matches_two_atom_search_3x3():
    rng = np.random.default_rng(3)
    marginals = (rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3)))
    inst = GridInstance(
        dims=(3, 3), marginals=marginals, utility=sample_monotone_utility((3, 3), 17)
    )
    mu, u = inst.flatten()
    sol = optimal_knapsack(mu, u)
    # brute force: best two-atom scheme built from a threshold sweep over the
    # utility ordering (finer than 1e-3), plus no information
    order = np.argsort(-u.adopt_utils, kind="stable")
    masses = mu.probs[order]
    utils = u.adopt_utils[order]
    ts = np.linspace(0.0, 1.0, 2001)[1:-1]
    cum_m = np.concatenate([[0.0], np.cumsum(masses)])
    cum_v = np.concatenate([[0.0], np.cumsum(masses * utils)])
    j = np.searchsorted(cum_m, ts, side="left").clip(1, masses.size)
    top_v = cum_v[-1] - (cum_v[j - 1] + (ts - cum_m[j - 1]) * utils[j - 1])
    vals = np.where(top_v >= 0.0, 1.0 - ts, 0.0)
    best = max(float(vals.max()), 1.0 if cum_v[-1] >= 0 else 0.0)
    assert sol.optimal_utility >= best - 1e-12
    assert sol.optimal_utility == pytest.approx(best, abs=1e-3)


def test_antidiagonal_embedding_masses():
    grid, embedded = antidiagonal_embedding(2, 0.01)
    assert grid.joint[0, 1] == pytest.approx(0.495)
    assert grid.joint[0, 0] == pytest.approx(0.005)
    np.testing.assert_allclose(embedded.probs, [0.5, 0.5])
    grid4, embedded4 = antidiagonal_embedding(4, 0.01)
    assert embedded4.n == 4
    assert Prior(grid4.joint_probs().ravel())  # positivity and normalization


def test_lifted_antidiagonal_utilities_are_monotone():
    rng = np.random.default_rng(5)
    m = 3
    paretos = [
        ((i1, j1), (i2, j2))
        for i1, j1, i2, j2 in itertools.product(range(m), repeat=4)
        if (i1 <= i2 and j1 <= j2)
    ]
    for _ in range(50):
        u = lift_antidiagonal_utility(m, rng.normal(size=m))
        assert is_monotone_grid(u)
        for (i1, j1), (i2, j2) in paretos:
            assert u[i1, j1] <= u[i2, j2] + 1e-12


def test_sample_monotone_utility_soundness():
    for seed in range(1000):
        u = sample_monotone_utility((3, 3), seed)
        assert is_monotone_grid(u)
    # signs are mixed often enough to be interesting
    signs = [np.sign(sample_monotone_utility((3, 3), s)).min() for s in range(50)]
    assert any(s < 0 for s in signs)
    with pytest.raises(ValueError):
        sample_monotone_utility((300, 300), 0)


def test_grid_instance_json_round_trip():
    inst = GridInstance(
        dims=(2, 3),
        marginals=(np.array([0.4, 0.6]), np.array([0.2, 0.3, 0.5])),
        utility=np.arange(6.0).reshape(2, 3),
    )
    back = grid_instance_from_dict(grid_instance_to_dict(inst))
    assert back.dims == inst.dims
    np.testing.assert_allclose(back.utility, inst.utility)
    np.testing.assert_allclose(back.joint_probs(), inst.joint_probs())
    joint_inst = GridInstance(dims=(2, 2), joint=np.array([[0.3, 0.2], [0.2, 0.3]]))
    back2 = grid_instance_from_dict(grid_instance_to_dict(joint_inst))
    assert back2.marginals is None
    np.testing.assert_allclose(back2.joint, joint_inst.joint)
    with pytest.raises(ValueError, match="dims"):
        grid_instance_from_dict({"joint": [1.0]})
    with pytest.raises(ValueError, match="marginals"):
        grid_instance_from_dict({"dims": [2]})


def test_batch_paths_match_md_check():
    rng = np.random.default_rng(6)
    marginals = (rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3)))
    utilities = np.vstack(
        [sample_monotone_utility((3, 3), s).ravel() for s in range(20)]
    )
    base = GridInstance(dims=(3, 3), marginals=marginals)
    scheme = median_knapsack_scheme(base)
    mu = Prior(base.joint_probs().ravel())
    fast = batch_knapsack_values(mu, utilities) - batch_scheme_utilities(scheme, utilities)
    for i in range(20):
        inst = GridInstance(
            dims=(3, 3), marginals=marginals, utility=utilities[i].reshape(3, 3)
        )
        regret, _ = md_regret_bound_check(inst)
        assert regret == pytest.approx(float(fast[i]), abs=1e-12)
