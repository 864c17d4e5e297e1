import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ndqv import catalog, harness
from ndqv.states import NoiseSpec


def _pure() -> NoiseSpec:
    return NoiseSpec("worst_case_orthogonal", 0.0)


def _worst(eps: float) -> NoiseSpec:
    return NoiseSpec("worst_case_orthogonal", eps)


# ---------------------------------------------------------------------------
# confidence bounds
# ---------------------------------------------------------------------------


def test_exponential_bound_oracles():
    # half-gap Bell strategy, one-percent deviation: 299 copies reach 5%
    assert harness.confidence_exponential(0.02, 0.5, 299) <= 0.05
    assert harness.confidence_exponential(0.02, 0.5, 298) > 0.05
    assert harness.confidence_exponential(0.05, 1.0, 0) == 1.0
    assert harness.confidence_exponential(0.05, 1.0, 45) == pytest.approx(
        0.0994, abs=1e-4
    )


def test_exponential_bound_domain():
    with pytest.raises(ValueError, match="epsilon"):
        harness.confidence_exponential(0.0, 0.5, 10)
    with pytest.raises(ValueError, match="epsilon"):
        harness.confidence_exponential(1.0, 1.0, 10)
    with pytest.raises(ValueError, match="nonnegative"):
        harness.confidence_exponential(0.1, 0.5, -1)


def test_divergence_properties():
    assert harness.bernoulli_divergence(0.3, 0.3) == 0.0
    assert harness.bernoulli_divergence(0.0, 0.5) == pytest.approx(math.log(2.0))
    assert harness.bernoulli_divergence(1.0, 0.5) == pytest.approx(math.log(2.0))
    with pytest.raises(ValueError):
        harness.bernoulli_divergence(1.2, 0.5)
    with pytest.raises(ValueError):
        harness.bernoulli_divergence(0.5, 1.0)


@given(
    x=st.floats(0.0, 1.0),
    y=st.floats(0.01, 0.99),
)
def test_divergence_nonnegative(x, y):
    assert harness.bernoulli_divergence(x, y) >= 0.0


def test_chernoff_inconclusive_below_threshold():
    assert harness.confidence_chernoff(0.8, 0.4, 0.5, 100) is None
    assert harness.confidence_chernoff(0.74, 0.4, 0.5, 100) is None


def test_chernoff_equals_exponential_at_unit_frequency():
    for eps, nu, n in [(0.05, 1.0, 45), (0.02, 0.5, 299), (0.1, 0.25, 12)]:
        chern = harness.confidence_chernoff(1.0, eps, nu, n)
        expo = harness.confidence_exponential(eps, nu, n)
        assert abs(chern - expo) < 1e-12


def test_chernoff_domain():
    with pytest.raises(ValueError, match="f must"):
        harness.confidence_chernoff(1.5, 0.1, 0.5, 10)
    with pytest.raises(ValueError, match="epsilon"):
        harness.confidence_chernoff(0.9, 0.0, 0.5, 10)
    with pytest.raises(ValueError, match="positive"):
        harness.confidence_chernoff(0.9, 0.1, 0.5, 0)


def test_wilson_interval_endpoints():
    low, high = harness.wilson_interval(100, 100)
    assert high == pytest.approx(1.0)
    assert 0.9 < low < 1.0
    low0, high0 = harness.wilson_interval(0, 100)
    assert low0 == pytest.approx(0.0)
    assert 0.0 < high0 < 0.1
    with pytest.raises(ValueError):
        harness.wilson_interval(5, 0)
    with pytest.raises(ValueError):
        harness.wilson_interval(7, 5)


@given(st.data())
def test_wilson_interval_brackets_the_point(data):
    n = data.draw(st.integers(1, 500))
    k = data.draw(st.integers(0, n))
    low, high = harness.wilson_interval(k, n)
    p = k / n
    assert 0.0 <= low <= high <= 1.0
    assert low <= p + 1e-12
    assert high >= p - 1e-12


# ---------------------------------------------------------------------------
# experiment runs
# ---------------------------------------------------------------------------


def test_spec_validation():
    strat = catalog.build_strategy("bell")
    with pytest.raises(ValueError, match="backend"):
        harness.ExperimentSpec(strat, _pure(), 10, 1, backend="gpu")
    with pytest.raises(ValueError, match="mode"):
        harness.ExperimentSpec(strat, _pure(), 10, 1, mode="hope")
    with pytest.raises(ValueError, match="at least 1"):
        harness.ExperimentSpec(strat, _pure(), 0, 1)


def test_circuit_backend_needs_sequential():
    strat = catalog.build_strategy("bell")
    spec = harness.ExperimentSpec(strat, _pure(), 10, 1, backend="circuit")
    with pytest.raises(ValueError, match="sequential"):
        harness.run_experiment(spec)


def test_circuit_backend_needs_compiled_circuits():
    proto = catalog.build_sequential("ghz4")
    spec = harness.ExperimentSpec(proto, _pure(), 10, 1, backend="circuit")
    with pytest.raises(ValueError, match="compiled circuits"):
        harness.run_experiment(spec)


def test_pure_source_always_passes():
    for protocol in (catalog.build_strategy("bell"), catalog.build_sequential("bell")):
        for mode in harness.MODES:
            spec = harness.ExperimentSpec(protocol, _pure(), 250, 7, mode=mode)
            report = harness.run_experiment(spec)
            assert report.n_run == 250
            assert report.n_pass == 250
            assert report.frequency == 1.0
            assert report.verdict == "pass"
            # zero deviation supports no finite significance level
            assert report.delta_exponential is None
            assert report.delta_chernoff is None


def test_pure_source_circuit_backend():
    proto = catalog.build_sequential("bell")
    spec = harness.ExperimentSpec(proto, _pure(), 60, 3, backend="circuit")
    report = harness.run_experiment(spec)
    assert report.n_pass == 60
    assert report.per_setting_attempts == [60, 60]
    assert report.per_setting_passes == [60, 60]


def test_worst_case_sequential_frequency_tracks_fidelity():
    # all-stage pass probability of each copy equals its target overlap 0.9
    proto = catalog.build_sequential("bell")
    spec = harness.ExperimentSpec(
        proto, _worst(0.1), 10_000, 42, mode="count_frequency"
    )
    report = harness.run_experiment(spec)
    sigma = math.sqrt(0.9 * 0.1 / 10_000)
    assert abs(report.frequency - 0.9) <= 3.0 * sigma
    # deterministic stage structure: the parity stage passes both components
    assert report.per_setting_attempts[0] == 10_000
    assert report.per_setting_passes[0] == 10_000
    assert report.per_setting_passes[1] == report.n_pass
    est = report.fidelity_estimate
    assert est is not None
    assert est["f_hat"] == report.frequency
    assert est["ci_low"] < est["f_hat"] < est["ci_high"]


def test_worst_case_strategy_frequency():
    # random-setting draws accept with probability 1 - nu*eps = 0.95
    strat = catalog.build_strategy("bell")
    spec = harness.ExperimentSpec(
        strat, _worst(0.1), 10_000, 11, mode="count_frequency"
    )
    report = harness.run_experiment(spec)
    p = 1.0 - 0.5 * 0.1
    sigma = math.sqrt(p * (1.0 - p) / 10_000)
    assert abs(report.frequency - p) <= 3.0 * sigma
    assert report.fidelity_estimate is None
    assert sum(report.per_setting_attempts) == report.n_run


def test_depolarizing_source_estimates_average_fidelity():
    # white noise of weight 0.2 on two qubits has fidelity 0.8 + 0.2/4 = 0.85
    proto = catalog.build_sequential("bell")
    noise = NoiseSpec("depolarizing", 0.2)
    spec = harness.ExperimentSpec(proto, noise, 10_000, 5, mode="count_frequency")
    report = harness.run_experiment(spec)
    f_avg = 0.8 + 0.2 / 4.0
    sigma = math.sqrt(f_avg * (1.0 - f_avg) / 10_000)
    assert abs(report.fidelity_estimate["f_hat"] - f_avg) <= 3.0 * sigma


def test_random_orthogonal_noise_runs():
    proto = catalog.build_sequential("bell")
    noise = NoiseSpec("random_orthogonal", 0.3, seed=99)
    spec = harness.ExperimentSpec(proto, noise, 2000, 13, mode="count_frequency")
    report = harness.run_experiment(spec)
    sigma = math.sqrt(0.7 * 0.3 / 2000)
    assert abs(report.frequency - 0.7) <= 4.0 * sigma


def test_stop_on_fail_truncates():
    proto = catalog.build_sequential("bell")
    spec = harness.ExperimentSpec(proto, _worst(0.5), 5000, 21)
    report = harness.run_experiment(spec)
    assert report.verdict == "fail"
    assert report.n_run < 5000
    assert report.n_pass == report.n_run - 1
    assert report.delta_exponential is None


def test_all_pass_run_reports_exponential_bound():
    # seed frozen on an all-pass run; reproducibility keeps it deterministic
    proto = catalog.build_sequential("bell")
    spec = harness.ExperimentSpec(proto, _worst(0.01), 40, 0)
    report = harness.run_experiment(spec)
    assert (report.delta_exponential is not None) == (
        report.n_pass == report.n_run
    )
    if report.delta_exponential is not None:
        expected = harness.confidence_exponential(0.01, report.nu, report.n_run)
        assert report.delta_exponential == pytest.approx(expected)


def test_count_mode_verdict_threshold():
    # white noise on a gap-one protocol beats the bound by eps/d: clear pass
    proto = catalog.build_sequential("bell")
    good = harness.run_experiment(
        harness.ExperimentSpec(
            proto, NoiseSpec("depolarizing", 0.2), 4000, 3, mode="count_frequency"
        )
    )
    assert good.verdict == "pass"
    assert good.delta_chernoff is not None
    # a fixed orthogonal component overlapping the dead direction of the
    # half-gap strategy misses its bound by a margin: clear fail
    strat = catalog.build_strategy("bell")
    noise = NoiseSpec("random_orthogonal", 0.4, seed=2)
    bad = harness.run_experiment(
        harness.ExperimentSpec(strat, noise, 4000, 3, mode="count_frequency")
    )
    assert bad.frequency < 1.0 - 0.5 * 0.4
    assert bad.verdict == "fail"
    assert bad.delta_chernoff is None


def test_reports_are_reproducible():
    proto = catalog.build_sequential("two_qubit_three", theta=0.6)
    noise = NoiseSpec("random_orthogonal", 0.2, seed=4)
    a = harness.run_experiment(
        harness.ExperimentSpec(proto, noise, 500, 17, mode="count_frequency")
    )
    b = harness.run_experiment(
        harness.ExperimentSpec(proto, noise, 500, 17, mode="count_frequency")
    )
    assert harness.report_to_dict(a) == harness.report_to_dict(b)
    c = harness.run_experiment(
        harness.ExperimentSpec(proto, noise, 500, 18, mode="count_frequency")
    )
    assert harness.report_to_dict(a) != harness.report_to_dict(c)


def test_matrix_and_circuit_backends_share_the_stream():
    # shared uniform convention makes the two backends bit-identical here
    proto = catalog.build_sequential("two_qubit_three", theta=0.7)
    noise = NoiseSpec("worst_case_orthogonal", 0.3)
    reports = []
    for backend in harness.BACKENDS:
        spec = harness.ExperimentSpec(
            proto, noise, 80, 31, backend=backend, mode="count_frequency"
        )
        reports.append(harness.run_experiment(spec))
    a, b = reports
    assert (a.n_run, a.n_pass) == (b.n_run, b.n_pass)
    assert a.per_setting_attempts == b.per_setting_attempts
    assert a.per_setting_passes == b.per_setting_passes


def test_estimate_fidelity_requirements():
    strat = catalog.build_strategy("bell")
    rep = harness.run_experiment(
        harness.ExperimentSpec(strat, _pure(), 20, 1, mode="count_frequency")
    )
    with pytest.raises(ValueError, match="sequential"):
        harness.estimate_fidelity(rep)
    proto = catalog.build_sequential("bell")
    rep2 = harness.run_experiment(harness.ExperimentSpec(proto, _pure(), 20, 1))
    with pytest.raises(ValueError, match="count_frequency"):
        harness.estimate_fidelity(rep2)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _sample_report():
    proto = catalog.build_sequential("bell")
    spec = harness.ExperimentSpec(
        proto, _worst(0.1), 300, 9, mode="count_frequency"
    )
    return harness.run_experiment(spec)


def test_json_roundtrip():
    report = _sample_report()
    text = harness.report_to_json(report)
    assert text.endswith("\n")
    assert json.loads(text) == harness.report_to_dict(report)


def test_csv_shape_and_values():
    report = _sample_report()
    text = harness.report_to_csv(report)
    header, line, trailer = text.split("\n")
    assert trailer == ""
    names = header.split(",")
    cells = line.split(",")
    assert len(names) == len(harness._CSV_FIELDS) == 21
    assert len(cells) == len(names)
    row = dict(zip(names, cells))
    assert row["schema"] == "1"
    assert row["protocol_kind"] == "sequential"
    assert float(row["frequency"]) == report.frequency
    assert row["per_setting_attempts"] == ";".join(
        str(v) for v in report.per_setting_attempts
    )
    # floats use full-precision %.17g so parsing them back is exact
    assert float(row["nu"]) == report.nu


def test_csv_empty_cells_for_missing_bounds():
    proto = catalog.build_sequential("bell")
    report = harness.run_experiment(
        harness.ExperimentSpec(proto, _pure(), 10, 1)
    )
    row = dict(
        zip(
            harness.report_csv_header().split(","),
            harness.report_to_csv_line(report).split(","),
        )
    )
    assert row["delta_exponential"] == ""
    assert row["delta_chernoff"] == ""
    assert row["f_hat"] == ""
