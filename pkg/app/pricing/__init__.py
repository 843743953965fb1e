"""Preços de referência via FFT e métricas de erro."""

from app.pricing.benchmark import fft_price, heston_char_fn
from app.pricing.report import ErrorReport, error_report, relative_error

__all__ = [
    "fft_price",
    "heston_char_fn",
    "ErrorReport",
    "error_report",
    "relative_error",
]
