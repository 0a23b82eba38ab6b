"""Daily price ingestion, realized returns and rolling return windows."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from datetime import date
from typing import IO, Sequence, Union

import numpy as np

CASH_ID = "CASH"

Source = Union[str, "os.PathLike[str]", IO[str]]


class MarketDataError(ValueError):
    """Base class for price/return validation failures."""


class MalformedRow(MarketDataError):
    pass


class NonPositivePrice(MarketDataError):
    pass


class UnsortedDates(MarketDataError):
    pass


class DuplicateDate(MarketDataError):
    pass


class TooFewRows(MarketDataError):
    pass


class WindowOutOfRange(MarketDataError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_dates(dates: Sequence[date]) -> None:
    for prev, cur in zip(dates, dates[1:]):
        if cur == prev:
            raise DuplicateDate(f"duplicate date {cur.isoformat()}")
        if cur < prev:
            raise UnsortedDates(f"{cur.isoformat()} follows {prev.isoformat()}")


@dataclass(frozen=True)
class PriceSeries:
    """T x m matrix of strictly positive prices; ``prices[k, i]`` is asset i at stage k."""

    dates: tuple[date, ...]
    assets: tuple[str, ...]
    prices: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "assets", tuple(self.assets))
        prices = _frozen(self.prices)
        object.__setattr__(self, "prices", prices)
        if prices.ndim != 2 or prices.shape != (len(self.dates), len(self.assets)):
            raise MalformedRow(
                f"price matrix shape {prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        if len(self.assets) < 1:
            raise MalformedRow("at least one asset column is required")
        if len(self.dates) < 2:
            raise TooFewRows(f"need at least 2 price rows, got {len(self.dates)}")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            k, i = np.argwhere(~(np.isfinite(prices) & (prices > 0)))[0]
            raise NonPositivePrice(
                f"price {prices[k, i]!r} for {self.assets[i]} on {self.dates[k].isoformat()}"
            )
        _check_dates(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    def __len__(self) -> int:
        return len(self.dates)

    def between(self, start: date | None = None, end: date | None = None) -> "PriceSeries":
        """Rows with ``start <= date <= end`` (either bound optional)."""
        keep = [
            k
            for k, d in enumerate(self.dates)
            if (start is None or d >= start) and (end is None or d <= end)
        ]
        return PriceSeries(
            dates=tuple(self.dates[k] for k in keep),
            assets=self.assets,
            prices=self.prices[keep],
        )


@dataclass(frozen=True)
class ReturnSeries:
    """Per-stage arithmetic returns.

    ``returns[k, i]`` is the return of asset i over the period starting at
    ``dates[k]``; ``dates`` therefore holds the first T-1 price dates.
    """

    dates: tuple[date, ...]
    assets: tuple[str, ...]
    returns: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "assets", tuple(self.assets))
        returns = _frozen(self.returns)
        object.__setattr__(self, "returns", returns)
        if returns.ndim != 2 or returns.shape != (len(self.dates), len(self.assets)):
            raise MarketDataError(
                f"return matrix shape {returns.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        if not np.all(np.isfinite(returns)) or np.any(returns <= -1.0):
            raise MarketDataError("returns must be finite and strictly greater than -1")

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    def __len__(self) -> int:
        return len(self.dates)

    def head(self, n: int) -> "ReturnSeries":
        return ReturnSeries(self.dates[:n], self.assets, self.returns[:n])


@dataclass(frozen=True)
class ReturnWindow:
    """M equally likely return scenarios, each with probability 1/M."""

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = _frozen(self.rows)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise MarketDataError(f"window must be a non-empty M x m matrix, got {rows.shape}")
        if not np.all(np.isfinite(rows)) or np.any(rows <= -1.0):
            raise MarketDataError("window returns must be finite and strictly greater than -1")

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    @property
    def n_assets(self) -> int:
        return self.rows.shape[1]

    @property
    def weight_per_row(self) -> float:
        return 1.0 / self.rows.shape[0]


def _open_text(source: Source) -> tuple[IO[str], bool]:
    if hasattr(source, "read"):
        return source, False  # type: ignore[return-value]
    return open(source, newline="", encoding="utf-8"), True


def load_price_csv(source: Source) -> PriceSeries:
    """Parse ``date,<asset1>,...`` CSV text (ISO dates, ``.`` decimals) into a PriceSeries."""
    handle, owned = _open_text(source)
    try:
        text = handle.read()
    finally:
        if owned:
            handle.close()
    reader = csv.reader(io.StringIO(text.lstrip("\ufeff")))
    try:
        header = next(reader)
    except StopIteration:
        raise TooFewRows("empty price file") from None
    header = [h.strip() for h in header]
    if len(header) < 2 or header[0].lower() != "date":
        raise MalformedRow(f"header must be 'date,<asset>,...', got {','.join(header)!r}")
    assets = header[1:]
    if len(set(assets)) != len(assets):
        raise MalformedRow("duplicate asset identifiers in header")

    dates: list[date] = []
    rows: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise MalformedRow(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            day = date.fromisoformat(row[0].strip())
        except ValueError:
            raise MalformedRow(f"line {lineno}: bad date {row[0]!r}") from None
        try:
            values = [float(cell) for cell in row[1:]]
        except ValueError:
            raise MalformedRow(f"line {lineno}: unparsable price in {row[1:]!r}") from None
        for asset, value in zip(assets, values):
            if not math.isfinite(value):
                raise MalformedRow(f"line {lineno}: non-finite price for {asset}")
            if value <= 0:
                raise NonPositivePrice(f"line {lineno}: price {value} for {asset}")
        dates.append(day)
        rows.append(values)

    if len(rows) < 2:
        raise TooFewRows(f"need at least 2 price rows, got {len(rows)}")
    return PriceSeries(tuple(dates), tuple(assets), np.array(rows, dtype=float))


def write_price_csv(prices: PriceSeries, target: Source) -> None:
    """Write prices in the same CSV layout ``load_price_csv`` reads (LF line endings)."""
    handle: IO[str]
    if hasattr(target, "write"):
        handle, owned = target, False  # type: ignore[assignment]
    else:
        handle, owned = open(target, "w", newline="", encoding="utf-8"), True
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["date", *prices.assets])
        for day, row in zip(prices.dates, prices.prices):
            writer.writerow([day.isoformat(), *(repr(float(v)) for v in row)])
    finally:
        if owned:
            handle.close()


def compute_returns(prices: PriceSeries) -> ReturnSeries:
    """Realized returns x_i(k) = (s_i(k+1) - s_i(k)) / s_i(k)."""
    s = prices.prices
    returns = (s[1:] - s[:-1]) / s[:-1]
    return ReturnSeries(prices.dates[:-1], prices.assets, returns)


def flip_prices(prices: PriceSeries) -> PriceSeries:
    """Reflect each asset's path about the midpoint of its own price range.

    The reflected series keeps the same minimum (so stays positive), and
    applying the transform twice returns the original prices.
    """
    s = prices.prices
    # (max - s) + min, in this order, maps each asset's minimum back onto itself exactly
    flipped = (s.max(axis=0) - s) + s.min(axis=0)
    return PriceSeries(prices.dates, prices.assets, flipped)


def slice_window(returns: ReturnSeries, k: int, size: int) -> ReturnWindow:
    """Rows x(k-size), ..., x(k-1): the information available before stage k."""
    if size < 1:
        raise WindowOutOfRange(f"window size must be >= 1, got {size}")
    if k < size or k > len(returns) - 1:
        raise WindowOutOfRange(
            f"stage {k} needs {size} prior returns and a return to apply to "
            f"(valid stages {size}..{len(returns) - 1})"
        )
    return ReturnWindow(returns.returns[k - size : k])


def append_cash_asset(returns: ReturnSeries, rate: float = 0.0) -> ReturnSeries:
    """Add a riskless column earning ``rate`` every period."""
    if not rate > -1.0:
        raise MarketDataError(f"cash rate must exceed -1, got {rate}")
    name = CASH_ID
    suffix = 0
    while name in returns.assets:
        suffix += 1
        name = f"{CASH_ID}_{suffix}"
    column = np.full((len(returns), 1), float(rate))
    return ReturnSeries(
        returns.dates,
        (*returns.assets, name),
        np.hstack([returns.returns, column]),
    )
