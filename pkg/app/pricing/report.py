"""Erros relativos percentuais dos preços backward/forward contra a referência."""

from dataclasses import asdict, dataclass

from app.config.errors import ValidationError


@dataclass(frozen=True)
class ErrorReport:
    """Linha de uma tabela de convergência em theta."""
    theta: float | None
    eps_bk: float
    eps_fw: float
    gap: float
    reference_price: float

    def to_dict(self, decimals: int | None = None) -> dict:
        data = asdict(self)
        if decimals is not None:
            for key in ("eps_bk", "eps_fw", "gap"):
                data[key] = round(data[key], decimals)
        return data


def relative_error(price: float, price_ref: float) -> float:
    """(C_ref - C) / C_ref em pontos percentuais."""
    return (price_ref - price) / price_ref * 100.0


def error_report(
    price_bk: float,
    price_fw: float,
    price_ref: float,
    theta: float | None = None,
) -> ErrorReport:
    """
    Monta o relatório de erros de um par de preços.

    Args:
        price_bk: Preço da indução backward
        price_fw: Preço da densidade forward
        price_ref: Preço de referência (FFT)
        theta: Parâmetro do esquema, quando a linha faz parte de uma varredura

    Returns:
        ErrorReport com gap = eps_bk - eps_fw

    Raises:
        ValidationError: Preço de referência nulo
    """
    if price_ref == 0:
        raise ValidationError("preço de referência nulo: erro relativo indefinido")
    eps_bk = relative_error(price_bk, price_ref)
    eps_fw = relative_error(price_fw, price_ref)
    return ErrorReport(theta, eps_bk, eps_fw, eps_bk - eps_fw, price_ref)
