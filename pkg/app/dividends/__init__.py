"""Ajustes de dividendos discretos nos dois sentidos."""

from app.dividends.operator import (
    DividendOperator,
    SnappedDividend,
    apply_dividend,
    build_backward_dividend_op,
    build_forward_dividend_op,
    snap_dividend_dates,
)

__all__ = [
    "DividendOperator",
    "SnappedDividend",
    "apply_dividend",
    "build_backward_dividend_op",
    "build_forward_dividend_op",
    "snap_dividend_dates",
]
