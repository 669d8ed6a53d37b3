import numpy as np
import pytest

from mpcr import (
    ConfigError,
    EmptyInput,
    ExperimentRecord,
    H_eval,
    UnknownFigure,
    convergence_sweep,
    default_figure_params,
    figure_data,
    run_theorem1,
    run_theorem2,
    summarize,
    validate,
)

SMALL = {"v": [0.9, 0.2], "z0": [1, 1], "kappa": 10, "seed": 5}


def test_run_theorem1_shape_and_dominance(two_type_params):
    records = run_theorem1(two_type_params, 40, seed=2)
    assert [r.replicate for r in records] == list(range(40))
    for r in records:
        assert np.all(r.scaled_Z <= r.W_hat)
        assert np.all(r.thm1_limit >= 0.0)
        assert np.all(np.isfinite(r.thm1_limit))


def test_run_theorem1_deterministic(two_type_params):
    a = run_theorem1(two_type_params, 10, seed=3)
    b = run_theorem1(two_type_params, 10, seed=3)
    for ra, rb in zip(a, b):
        assert ra.scaled_Z.tolist() == rb.scaled_Z.tolist()
        assert ra.thm1_limit.tolist() == rb.thm1_limit.tolist()


def test_run_theorem1_threads_match_serial(two_type_params):
    serial = run_theorem1(two_type_params, 12, seed=4)
    threaded = run_theorem1(two_type_params, 12, seed=4, threads=4)
    for rs, rt in zip(serial, threaded):
        assert rs.scaled_Z.tolist() == rt.scaled_Z.tolist()
        assert rs.W_hat.tolist() == rt.W_hat.tolist()


def test_pairing_discipline():
    # mismatching a record's limit with another stream's simulation must
    # inflate the median error
    params = validate({"v": [0.9, 0.2], "z0": [1, 1], "kappa": 20, "seed": 8})
    records = run_theorem1(params, 300, seed=8)
    sim = np.array([r.scaled_Z[0] for r in records])
    lim = np.array([r.thm1_limit[0] for r in records])
    paired = np.median(np.abs(sim - lim))
    mismatched = np.median(np.abs(sim - np.roll(lim, 1)))
    assert mismatched > paired


def test_theorem1_sum_identity_all_dominant():
    params = validate({"v": [0.9, 0.9], "z0": [1, 1], "kappa": 12, "seed": 6})
    for r in run_theorem1(params, 20, seed=6, tol=1e-10):
        w0 = r.W_hat.sum()
        h = H_eval(float(w0), 0.9, 1e-10)
        assert abs(r.thm1_limit.sum() - h.value) <= 1e-8


def test_run_theorem2_offset_zero_matches_theorem1_totals(two_type_params):
    records = run_theorem2(two_type_params, 0, 10, seed=9)
    for r in records:
        # at n_offset = 0 the offset-time total limit is H(W_hat_0)
        w0 = float(r.W_hat[: two_type_params.d0].sum())
        assert r.thm2_total == pytest.approx(
            H_eval(w0, 0.9, 1e-8).value, abs=1e-7
        )
        assert r.x_total == pytest.approx(float(r.x_vec.sum()), abs=0)


def test_run_theorem2_negative_offset_reads_pivot_majorant(five_type_params):
    records = run_theorem2(five_type_params, -3, 5, seed=10)
    for r in records:
        assert r.n_offset == -3
        assert np.all(r.scaled_Z <= r.W_hat)
        assert np.all(r.x_vec >= 0.0)
        assert r.thm2_vector.shape == (5,)


def test_run_theorem2_zero_types_stay_zero():
    params = validate({"v": [0.9, 0.2, 0.2], "z0": [1, 0, 0], "kappa": 10, "seed": 3})
    for r in run_theorem2(params, 0, 10, seed=3):
        assert np.count_nonzero(r.thm2_vector) <= 1
        assert r.x_vec[1] == 0.0 and r.x_vec[2] == 0.0


def test_run_theorem2_steps_validation(two_type_params):
    with pytest.raises(ConfigError):
        run_theorem2(two_type_params, -3, 5, steps=10)  # kappa - 3 = 22
    with pytest.raises(ConfigError):
        run_theorem2(two_type_params, -30, 5)


def test_summarize_single_record():
    rec = ExperimentRecord(
        replicate=0,
        scaled_Z=np.array([0.5]),
        W_hat=np.array([0.9]),
        thm1_limit=np.array([0.8]),
    )
    s = summarize([rec], kappa=7)
    assert s.kappa == 7 and s.replicates == 1
    assert s.median_abs_error[0] == pytest.approx(0.3)
    assert s.mean_abs_error[0] == pytest.approx(0.3)


def test_summarize_lower_median_convention():
    recs = [
        ExperimentRecord(
            replicate=i,
            scaled_Z=np.array([lim - err]),
            W_hat=np.array([lim]),
            thm1_limit=np.array([lim]),
        )
        for i, (err, lim) in enumerate([(0.1, 1.0), (0.5, 1.0)])
    ]
    s = summarize(recs)
    assert s.median_abs_error[0] == pytest.approx(0.1)
    assert s.median_rel_error[0] == pytest.approx(0.1)


def test_summarize_relative_floor():
    recs = [
        ExperimentRecord(
            replicate=0,
            scaled_Z=np.array([1e-6]),
            W_hat=np.array([1e-4]),
            thm1_limit=np.array([1e-4]),  # below the 1e-3 floor
        )
    ]
    s = summarize(recs)
    assert np.isnan(s.median_rel_error[0])
    assert np.isfinite(s.median_abs_error[0])


def test_summarize_empty():
    with pytest.raises(EmptyInput):
        summarize([])


def test_summary_medians_within_range():
    params = validate(SMALL)
    records = run_theorem1(params, 31, seed=5)
    s = summarize(records, kappa=10)
    errs = np.abs(
        np.array([r.scaled_Z for r in records])
        - np.array([r.thm1_limit for r in records])
    )
    for i in range(2):
        assert errs[:, i].min() <= s.median_abs_error[i] <= errs[:, i].max()


def test_convergence_sweep_validation():
    params = validate(SMALL)
    with pytest.raises(ConfigError):
        convergence_sweep(params, [], 5)
    with pytest.raises(ConfigError):
        convergence_sweep(params, [8, 6], 5)
    with pytest.raises(ConfigError):
        convergence_sweep(params, [3, 8], 5)


def test_convergence_sweep_single_entry():
    params = validate(SMALL)
    out = convergence_sweep(params, [8], 5, seed=5)
    assert len(out) == 1
    assert out[0].kappa == 8 and out[0].replicates == 5


def test_convergence_sweep_one_replicate():
    params = validate(SMALL)
    s = convergence_sweep(params, [8], 1, seed=5)[0]
    rec = run_theorem1(
        validate({**SMALL, "kappa": 8}), 1, seed=5
    )[0]
    errs = np.abs(rec.scaled_Z - rec.thm1_limit)
    assert np.allclose(s.median_abs_error, errs)


def test_figure_data_unknown_id():
    with pytest.raises(UnknownFigure):
        figure_data("7")
    with pytest.raises(UnknownFigure):
        default_figure_params("B")


def test_figure_A_starts_at_one():
    rows = figure_data("A", options={"x_max": 2.0, "n_points": 5})
    assert rows[0]["x"] == 0.0
    assert all(rows[0][f"G_{i}"] == 1.0 for i in range(1, 9))
    # strictly below one away from the origin, ordered by type speed
    assert all(0.0 < rows[-1][f"G_{i}"] < 1.0 for i in range(1, 9))


def test_figure_A_rejects_unknown_option():
    with pytest.raises(ConfigError):
        figure_data("A", options={"bogus": 1})


def test_figure_1_columns():
    rows = figure_data("1", options={"replicates": 8, "seed": 2})
    assert len(rows) == 8
    assert list(rows[0]) == ["replicate", "scaled_Z_1", "limit_1", "scaled_Z_2", "limit_2"]


def test_figure_2_columns():
    rows = figure_data("2", options={"replicates": 8, "seed": 2})
    assert list(rows[0]) == ["replicate", "coord1", "coord2"]


def test_figure_3_clouds_ordered_by_z0():
    rows = figure_data("3", options={"replicates": 30, "seed": 2})
    assert len(rows) == 150
    sim = {t: [] for t in range(1, 6)}
    for row in rows:
        sim[row["type"]].append(row["simulated"])
    means = [np.mean(sim[t]) for t in range(1, 6)]
    assert all(a > b for a, b in zip(means, means[1:]))


def test_figure_requires_consistent_params():
    bad = validate({"v": [0.9, 0.5, 0.2], "z0": [1, 1, 1], "kappa": 10})
    with pytest.raises(ConfigError):
        figure_data("1", params=bad, options={"replicates": 2})
    with pytest.raises(ConfigError):
        figure_data("3", params=bad, options={"replicates": 2})
