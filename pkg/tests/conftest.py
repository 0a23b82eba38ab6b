from datetime import date, timedelta

import numpy as np
import pytest

from sliding_kelly.market_data import PriceSeries, ReturnSeries


def business_days(start, n):
    days, d = [], start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += timedelta(days=1)
    return days


def make_returns(rows, start=date(2020, 1, 1)):
    rows = np.asarray(rows, dtype=float)
    dates = [start + timedelta(days=i) for i in range(rows.shape[0])]
    return ReturnSeries(dates, [f"A{i}" for i in range(rows.shape[1])], rows)


def synthetic_prices(seed=7, n=505, start=date(2018, 2, 14), assets=("AAA", "BBB", "CCC")):
    """Seeded geometric random walk; a stand-in for real daily closes in pipeline tests."""
    rng = np.random.default_rng(seed)
    m = len(assets)
    drift = np.linspace(0.0003, 0.0001, m)
    vol = np.linspace(0.008, 0.002, m)
    r = rng.normal(drift, vol, size=(n - 1, m))
    prices = 100 * np.vstack([np.ones(m), np.cumprod(1 + r, axis=0)])
    return PriceSeries(business_days(start, n), assets, np.round(prices, 4))


@pytest.fixture
def prices():
    return synthetic_prices()


@pytest.fixture
def prices_csv(tmp_path, prices):
    from sliding_kelly.market_data import write_price_csv

    path = tmp_path / "prices.csv"
    write_price_csv(prices, path)
    return path


# --- acceptance criterion reporting ---------------------------------------------


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    key = (marker.args[0], item.name)
    results = item.config._criteria
    failed = report.failed or (report.when == "call" and report.skipped)
    if failed or key not in results:
        results[key] = (marker.args[1], "FAIL" if failed else "PASS")


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), (title, status) in sorted(results.items()):
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} ({name})")
