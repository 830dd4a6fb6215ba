import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from footbridge import analysis, cvae, gradcore as gc
from footbridge.geometry import DesignFeatures
from footbridge.simulator import METRIC_NAMES


def brute_force_front(points, directions=("min", "min")):
    """O(n^2) dominance filter used as the extraction oracle."""
    pts = np.asarray(points, dtype=float)
    signs = np.array([1.0 if d == "min" else -1.0 for d in directions])
    work = pts * signs
    keep = []
    for i in range(len(work)):
        dominated = False
        for j in range(len(work)):
            if np.all(work[j] <= work[i]) and np.any(work[j] < work[i]):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    return tuple(keep)


def test_sensitivity_report_shapes(tiny_ckpt):
    x = DesignFeatures(1.0, 0.15, 4, 0.8, 1.0, 2.0)
    report = analysis.sensitivity(x, tiny_ckpt)
    assert report.jacobian_std.shape == (6, 12)
    assert report.per_variable_std.shape == (6, 6)
    assert report.per_variable_physical.shape == (6, 6)
    assert report.variables == ("h_girder", "t_girder", "h_p", "i", "w", "n_p")
    assert report.targets == METRIC_NAMES


def test_sensitivity_matches_finite_differences_of_predict(tiny_ckpt):
    x = DesignFeatures(1.0, 0.15, 4, 0.8, 1.0, 2.0)
    report = analysis.sensitivity(x, tiny_ckpt)
    cost_row = report.per_variable_physical[analysis.COST_INDEX]
    delta = 1e-5
    for j, feature_index in enumerate((0, 1, 3, 4, 5)):
        up = x.as_array()
        down = x.as_array()
        up[feature_index] += delta
        down[feature_index] -= delta
        fd = (
            cvae.predict(DesignFeatures.from_array(up), tiny_ckpt).metrics.cost
            - cvae.predict(DesignFeatures.from_array(down), tiny_ckpt).metrics.cost
        ) / (2.0 * delta)
        assert cost_row[j] == pytest.approx(fd, rel=1e-4, abs=1e-6)


def test_aggregate_variables_takes_adjacent_class_differences():
    jac = np.arange(72, dtype=float).reshape(6, 12)
    out = analysis._aggregate_variables(jac, n_p=4)
    np.testing.assert_array_equal(out[:, :5], jac[:, :5])
    # class index 2; step up reads columns 5+3 minus 5+2
    np.testing.assert_array_equal(out[:, 5], jac[:, 8] - jac[:, 7])
    top = analysis._aggregate_variables(jac, n_p=8)
    # top class steps down instead
    np.testing.assert_array_equal(top[:, 5], jac[:, 11] - jac[:, 10])


def test_physical_units_apply_the_chain_rule():
    std = cvae.Standardizer(
        x_mean=(0.0,) * 5,
        x_std=(2.0, 4.0, 8.0, 16.0, 32.0),
        y_mean=(0.0,) * 4,
        y_std=(3.0, 5.0, 7.0, 9.0),
    )
    per_var = np.ones((6, 6))
    out = analysis._physical_units(per_var, std)
    # continuous target rows scale by sigma_y, feature columns divide by sigma_x
    assert out[0, 0] == pytest.approx(3.0 / 2.0)
    assert out[3, 4] == pytest.approx(9.0 / 32.0)
    # flag rows stay in logit units, the discrete column is per class step
    assert out[4, 0] == pytest.approx(1.0 / 2.0)
    assert out[3, 5] == pytest.approx(9.0)


def test_swarm_reports_one_row_per_generated_design(tiny_ckpt):
    request = np.array([0.3, 0.2, 10.0, 1.5e5, 1.0, 1.0])
    swarm = analysis.sensitivity_swarm(request, 12, seed=2, ckpt=tiny_ckpt)
    assert swarm.values_std.shape == (12, 6)
    assert swarm.values_physical.shape == (12, 6)
    assert swarm.cost.shape == (12,)
    assert swarm.designs.shape == (12, 6)
    frac = swarm.sign_fraction("h_girder")
    assert 0.0 <= frac <= 1.0
    assert frac == pytest.approx(np.mean(swarm.values_std[:, 0] > 0.0))


def test_swarm_is_deterministic_per_seed(tiny_ckpt):
    request = np.array([0.3, 0.2, 10.0, 1.5e5, 1.0, 1.0])
    a = analysis.sensitivity_swarm(request, 6, seed=2, ckpt=tiny_ckpt)
    b = analysis.sensitivity_swarm(request, 6, seed=2, ckpt=tiny_ckpt)
    np.testing.assert_array_equal(a.values_std, b.values_std)
    np.testing.assert_array_equal(a.designs, b.designs)


def test_latent_map_projects_the_test_split(tiny_ckpt, tiny_dataset):
    lmap = analysis.latent_map(tiny_dataset, tiny_ckpt)
    mask = tiny_dataset.ok_mask
    X, Y = tiny_dataset.X[mask], tiny_dataset.Y[mask]
    _, _, test_idx = cvae.split_indices(len(X), tiny_ckpt.config.split, tiny_ckpt.config.seed)
    assert lmap.z.shape == (len(test_idx), tiny_ckpt.config.latent_dim)
    np.testing.assert_array_equal(lmap.y, Y[test_idx])
    # z is the encoder latent mean, recomputed here by hand
    x_enc = tiny_ckpt.standardizer.encode_x(X[test_idx])
    _, mu, _ = tiny_ckpt.model().encoder(gc.Tensor(x_enc))
    np.testing.assert_array_equal(lmap.z, mu.data)


def test_latent_map_correlations_match_numpy(tiny_ckpt, tiny_dataset):
    lmap = analysis.latent_map(tiny_dataset, tiny_ckpt)
    y_std = tiny_ckpt.standardizer.encode_y(lmap.y)[:, :4]
    cross = np.empty((4, lmap.z.shape[1]))
    for a in range(4):
        for b in range(lmap.z.shape[1]):
            cross[a, b] = np.corrcoef(y_std[:, a], lmap.z[:, b])[0, 1]
    assert lmap.mean_abs_corr_continuous == pytest.approx(np.abs(cross).mean(), rel=1e-12)
    np.testing.assert_allclose(lmap.corr_cost, np.abs(cross[3]), rtol=1e-12)


def test_surrogate_report_statistics_are_consistent(tiny_ckpt, tiny_dataset):
    report = analysis.surrogate_report(tiny_dataset, tiny_ckpt)
    assert report.n_test == len(report.true_values)
    for j, name in enumerate(("uls_util", "sls_util", "f1", "cost")):
        err = report.predicted_values[:, j] - report.true_values[:, j]
        sst = np.sum((report.true_values[:, j] - report.true_values[:, j].mean()) ** 2)
        assert report.r2[name] == pytest.approx(1.0 - np.sum(err**2) / sst, rel=1e-12)
        assert report.rmse[name] == pytest.approx(np.sqrt(np.mean(err**2)), rel=1e-12)
    for name in ("clearance_ok", "trees_ok"):
        assert 0.0 <= report.flag_accuracy[name] <= 1.0


def test_pareto_keeps_duplicate_optima():
    res = analysis.pareto_front([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])
    assert res.indices == (0, 1)


def test_pareto_single_point():
    assert analysis.pareto_front([[3.0, 4.0]]).indices == (0,)


def test_pareto_direction_handling():
    points = [[1.0, 1.0], [2.0, 2.0], [3.0, 0.5]]
    assert analysis.pareto_front(points, ("min", "min")).indices == (0, 2)
    assert analysis.pareto_front(points, ("max", "max")).indices == (1, 2)
    assert analysis.pareto_front(points, ("min", "max")).indices == (0, 1)


def test_pareto_rejects_bad_shapes():
    with pytest.raises(ValueError):
        analysis.pareto_front([])
    with pytest.raises(ValueError):
        analysis.pareto_front([[1.0, 2.0, 3.0]])


@settings(max_examples=150, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(0, 6), st.integers(0, 6)),
        min_size=1,
        max_size=40,
    ),
    st.sampled_from([("min", "min"), ("max", "min"), ("min", "max"), ("max", "max")]),
)
def test_pareto_equals_brute_force(int_points, directions):
    # small integer coordinates force plenty of exact ties
    points = [[float(a), float(b)] for a, b in int_points]
    got = analysis.pareto_front(points, directions).indices
    assert got == brute_force_front(points, directions)


def test_write_json_round_trips(tmp_path):
    payload = {"a": [1.0, 2.5], "b": {"c": 3}}
    out = tmp_path / "payload.json"
    analysis.write_json(payload, out)
    assert json.loads(out.read_text()) == payload
