"""
Hierarquia de exceções do motor de diferenças finitas.
Erros de validação (configuração, grade) e de solver são separados
para que a CLI possa mapear cada família para um código de saída.
"""


class EngineError(Exception):
    """Erro base do motor."""


class ValidationError(EngineError):
    """Parâmetros, configuração ou grade inválidos."""


class GridError(ValidationError):
    """Falha na construção da grade ou grades incompatíveis."""


class SolverError(EngineError):
    """Falha numérica: fatoração, exponencial, guarda de tamanho, paridade."""
