"""Price-series ingestion, log-return construction and return diagnostics."""

import csv
import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import (
    DomainError,
    DuplicateDate,
    InsufficientData,
    NonPositivePrice,
    ParseError,
)

__all__ = [
    "CsvSchema",
    "PriceSeries",
    "ReturnSeries",
    "ReturnDiagnostics",
    "load_csv",
    "log_returns",
    "diagnostics",
]


@dataclass(frozen=True)
class CsvSchema:
    date_column: str = "date"
    price_column: str = "price"
    date_format: str = "%Y-%m-%d"


@dataclass(frozen=True)
class PriceSeries:
    timestamps: np.ndarray  # datetime64[D], strictly increasing
    prices: np.ndarray
    symbol: str = ""


@dataclass(frozen=True)
class ReturnSeries:
    timestamps: np.ndarray
    returns: np.ndarray
    source: str = ""


def load_csv(path, schema: CsvSchema = CsvSchema(), symbol: str = "") -> PriceSeries:
    """Parse a dated price CSV; rows are sorted by date, duplicates rejected.

    Gaps between dates are left as they are: a return always spans the
    actual ratio of consecutive closes.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError(1, schema.date_column, "empty file")
        for col in (schema.date_column, schema.price_column):
            if col not in reader.fieldnames:
                raise ParseError(1, col, "column missing from header")
        for lineno, row in enumerate(reader, start=2):
            raw_date = row.get(schema.date_column)
            raw_price = row.get(schema.price_column)
            try:
                stamp = datetime.strptime(raw_date.strip(), schema.date_format).date()
            except (ValueError, AttributeError) as exc:
                raise ParseError(lineno, schema.date_column,
                                 f"bad date {raw_date!r}: {exc}") from None
            try:
                price = float(raw_price)
            except (TypeError, ValueError):
                raise ParseError(lineno, schema.price_column,
                                 f"bad price {raw_price!r}") from None
            if not math.isfinite(price):
                raise ParseError(lineno, schema.price_column,
                                 f"non-finite price {raw_price!r}")
            if price <= 0.0:
                raise NonPositivePrice(
                    f"row {lineno}: price {price} must be positive")
            rows.append((stamp, price))
    if not rows:
        raise ParseError(2, schema.date_column, "no data rows")
    rows.sort(key=lambda r: r[0])
    for (d1, _), (d2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DuplicateDate(f"duplicate date {d1.isoformat()}")
    stamps = np.array([r[0] for r in rows], dtype="datetime64[D]")
    prices = np.array([r[1] for r in rows], dtype=float)
    return PriceSeries(timestamps=stamps, prices=prices, symbol=symbol)


def log_returns(p: PriceSeries) -> ReturnSeries:
    """X_i = ln(S_i / S_{i-1}); length is one less than the price series."""
    if p.prices.shape[0] < 2:
        raise InsufficientData("need at least two prices")
    x = np.diff(np.log(p.prices))
    return ReturnSeries(timestamps=p.timestamps[1:], returns=x, source=p.symbol)


@dataclass(frozen=True)
class ReturnDiagnostics:
    acf: np.ndarray
    pacf: np.ndarray
    kurtosis: float   # raw fourth standardized moment; Gaussian baseline 3
    skewness: float
    mean: float
    variance: float


def _acf_biased(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.shape[0]
    xc = x - x.mean()
    c0 = float(np.dot(xc, xc)) / n
    if c0 <= 0.0:
        raise DomainError("zero-variance series has no autocorrelation")
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    for k in range(1, max_lag + 1):
        rho[k] = float(np.dot(xc[k:], xc[:-k])) / n / c0
    return rho


def _pacf_durbin_levinson(rho: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from the ACF by the Durbin-Levinson
    recursion; lag 0 is reported as 1 by convention."""
    m = rho.shape[0] - 1
    pacf = np.empty(m + 1)
    pacf[0] = 1.0
    if m == 0:
        return pacf
    phi_prev = np.zeros(m + 1)
    phi_prev[1] = rho[1]
    pacf[1] = rho[1]
    for k in range(2, m + 1):
        num = rho[k] - float(np.dot(phi_prev[1:k], rho[k - 1:0:-1]))
        den = 1.0 - float(np.dot(phi_prev[1:k], rho[1:k]))
        phi_kk = num / den
        phi = phi_prev.copy()
        phi[k] = phi_kk
        phi[1:k] = phi_prev[1:k] - phi_kk * phi_prev[k - 1:0:-1]
        pacf[k] = phi_kk
        phi_prev = phi
    return pacf


def diagnostics(r: ReturnSeries, max_lag: int = 20) -> ReturnDiagnostics:
    """Sample ACF (biased denominator), PACF, and moment summaries."""
    x = np.asarray(r.returns, dtype=float)
    n = x.shape[0]
    if n <= max_lag + 1:
        raise InsufficientData(f"need n > max_lag + 1, got n={n}, max_lag={max_lag}")
    rho = _acf_biased(x, max_lag)
    pacf = _pacf_durbin_levinson(rho)
    m = x.mean()
    xc = x - m
    m2 = float(np.mean(xc ** 2))
    m3 = float(np.mean(xc ** 3))
    m4 = float(np.mean(xc ** 4))
    return ReturnDiagnostics(
        acf=rho, pacf=pacf,
        kurtosis=m4 / (m2 * m2),
        skewness=m3 / m2 ** 1.5,
        mean=float(m), variance=m2,
    )
