"""Smoke test for the `interbank` extension module.

Build and install first, e.g. `pip install ./crates/python`, then run
`python python/smoke_test.py`.
"""

import pathlib
import tempfile

import interbank

ROOT = pathlib.Path(__file__).resolve().parents[1]


def isolation_by_midpoint(n_p, alpha, steps=200_000):
    m = 1.0 / (alpha + 1.0)
    h = 1.0 / steps
    return h * sum((1.0 - ((k + 0.5) * h) ** alpha * m) ** (n_p - 1) for k in range(steps))


def main():
    for n_p in (5, 50, 300):
        q0 = interbank.isolation_probability(n_p, 4.0)
        assert abs(q0 - isolation_by_midpoint(n_p, 4.0)) < 1e-6, (n_p, q0)
    _, m, _ = interbank.expected_n_m(100, 4.0)
    assert abs(m - 100 * 99 / 2 / 25) < 1e-9

    params = interbank.ModelParams(n_p=60, horizon=400, burn_in=100)
    series = interbank.simulate_series(params, interbank.WeightParams(), seed=3)
    assert len(series) == 300 and series.days() == list(range(300))
    again = interbank.simulate_series(params, seed=3)
    assert series.sizes() == again.sizes()
    assert all(0.5 < b <= 1.0 for b in interbank.bipartivity(series) if b is not None)
    assert 0.0 <= interbank.turnover_rate(series) <= 1.0

    runs = interbank.duration_interval_samples(series, "pair")
    fit = interbank.fit_power_law(runs["durations"])
    assert fit["exponent"] > 1.0
    weibull = interbank.fit_weibull_rank([float(x) for x in runs["intervals"]])
    assert 0.0 < weibull["c"] < 1.0
    curve = interbank.aggregate_degree_curve(series)
    assert interbank.aggregate_degree_exponent(curve) < 1.0

    try:
        interbank.fit_power_law([1, 2, 3])
    except interbank.InsufficientDataError:
        pass
    else:
        raise AssertionError("short sample accepted")
    try:
        interbank.ModelParams(alpha=0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid alpha accepted")

    hist = interbank.build_conditional_histogram(
        [20, 40, 60], params=interbank.ModelParams(horizon=200, burn_in=100), replicates=10
    )
    estimates = hist.estimate_series(series)
    assert any(e is not None for e in estimates)

    ingested, rejects = interbank.ingest_log(ROOT / "data" / "sample_log.csv")
    assert len(ingested) == 40 and len(rejects) == 3

    with tempfile.TemporaryDirectory() as tmp:
        path = pathlib.Path(tmp) / "series.csv"
        series.write(path)
        back = interbank.NetworkSeries.read(path)
        assert back.sizes() == series.sizes()
        assert back.edges(0) == series.edges(0)

    print("interbank smoke test passed")


if __name__ == "__main__":
    main()
