"""
Construção das grades espaciais do motor.
Grade em S não uniforme (mapas sinh condensados em pontos de interesse)
ou log-uniforme, grade em v uniforme, com (S0, v0) sempre sobre nós.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from app.config.errors import GridError
from app.config.model import ModelParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Parâmetros declarativos da grade."""
    Ns: int
    Nv: int
    s_max_mult: float = 40.0
    v_max_mult: float = 6.0
    condense_points: tuple[float, ...] = ()
    condense_strength: float = 200.0
    log_uniform: bool = False


def _cell_widths(nodes: np.ndarray) -> np.ndarray:
    """Largura da célula centrada em cada nó (meia célula nas fronteiras)."""
    steps = np.diff(nodes)
    widths = np.empty_like(nodes)
    widths[0] = 0.5 * steps[0]
    widths[-1] = 0.5 * steps[-1]
    widths[1:-1] = 0.5 * (steps[:-1] + steps[1:])
    return widths


def _anchor_index(nodes: np.ndarray, value: float) -> int | None:
    matches = np.flatnonzero(np.isclose(nodes, value, rtol=1e-12, atol=1e-12))
    return int(matches[0]) if matches.size else None


@dataclass(frozen=True, eq=False)
class Grid2D:
    """
    Grade retangular S x v.

    Os vetores de valores sobre a grade são ordenados por linha em (i_s, i_v),
    isto é, o índice plano é i_s * Nv + i_v.
    """
    s_nodes: np.ndarray
    v_nodes: np.ndarray
    S0: float | None = None
    v0: float | None = None
    log_uniform: bool = False
    s_cell_widths: np.ndarray = field(init=False)
    v_cell_widths: np.ndarray = field(init=False)

    def __post_init__(self):
        s = np.array(self.s_nodes, dtype=float)
        v = np.array(self.v_nodes, dtype=float)
        for name, nodes in (("S", s), ("v", v)):
            if nodes.ndim != 1 or nodes.size < 3:
                raise GridError(f"grade em {name} precisa de ao menos 3 nós")
            if np.any(np.diff(nodes) <= 0):
                raise GridError(f"nós em {name} devem ser estritamente crescentes")
            if nodes[0] != 0.0:
                raise GridError(f"primeiro nó em {name} deve ser 0 (recebido {nodes[0]})")
        for arr in (s, v):
            arr.flags.writeable = False
        ws = _cell_widths(s)
        wv = _cell_widths(v)
        ws.flags.writeable = False
        wv.flags.writeable = False
        object.__setattr__(self, "s_nodes", s)
        object.__setattr__(self, "v_nodes", v)
        object.__setattr__(self, "s_cell_widths", ws)
        object.__setattr__(self, "v_cell_widths", wv)

    @property
    def Ns(self) -> int:
        return self.s_nodes.size

    @property
    def Nv(self) -> int:
        return self.v_nodes.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.Ns, self.Nv

    @property
    def size(self) -> int:
        return self.Ns * self.Nv

    @property
    def s0_index(self) -> int | None:
        return None if self.S0 is None else _anchor_index(self.s_nodes, self.S0)

    @property
    def v0_index(self) -> int | None:
        return None if self.v0 is None else _anchor_index(self.v_nodes, self.v0)

    @property
    def x_nodes(self) -> np.ndarray:
        """Log-spot log(S/S0) dos nós com S > 0."""
        if self.S0 is None:
            raise GridError("grade sem S0 não define log-spot")
        return np.log(self.s_nodes[1:] / self.S0)

    def cell_areas(self) -> np.ndarray:
        """Pesos de célula h_S(i) * h_v(j), vetor plano na ordem da grade."""
        return np.outer(self.s_cell_widths, self.v_cell_widths).ravel()

    def flat_index(self, i: int, j: int) -> int:
        return i * self.Nv + j

    def same_as(self, other: "Grid2D") -> bool:
        """Compara os nós de duas grades."""
        return self is other or (
            self.shape == other.shape
            and np.array_equal(self.s_nodes, other.s_nodes)
            and np.array_equal(self.v_nodes, other.v_nodes)
        )


def _sinh_map(point: float, s_max: float, n: int, c: float) -> np.ndarray:
    xi = np.linspace(np.arcsinh(-point / c), np.arcsinh((s_max - point) / c), n)
    nodes = point + c * np.sinh(xi)
    nodes[0], nodes[-1] = 0.0, s_max
    return nodes


def _merge_maps(maps: list[np.ndarray], n: int, s_max: float) -> np.ndarray:
    """União ordenada dos mapas, sem duplicatas, reamostrada para n nós."""
    union = np.sort(np.concatenate(maps))
    keep = np.concatenate(([True], np.diff(union) > 1e-10 * s_max))
    union = union[keep]
    if union.size == n:
        return union
    positions = np.linspace(0.0, union.size - 1, n)
    return np.interp(positions, np.arange(union.size), union)


def _snap(nodes: np.ndarray, value: float) -> np.ndarray:
    """Move o nó interior mais próximo para value."""
    nodes = nodes.copy()
    k = int(np.clip(np.argmin(np.abs(nodes - value)), 1, nodes.size - 2))
    nodes[k] = value
    if np.any(np.diff(nodes) <= 0):
        raise GridError(f"não foi possível posicionar {value} sobre a grade")
    return nodes


def _variance_nodes(spec: GridSpec, model: ModelParams) -> tuple[np.ndarray, float]:
    v_max = spec.v_max_mult * model.v0
    dv = v_max / (spec.Nv - 1)
    j0 = int(round(model.v0 / dv))
    j0 = max(j0, 1)
    if j0 > spec.Nv - 2:
        raise GridError(f"v0={model.v0} não cabe no interior de [0, {v_max}]")
    if not np.isclose(j0 * dv, model.v0, rtol=1e-12):
        v_max = model.v0 * (spec.Nv - 1) / j0
        logger.warning(f"v_max ajustado para {v_max:.6g} para que v0 caia sobre um nó")
    v_nodes = np.linspace(0.0, v_max, spec.Nv)
    v_nodes[j0] = model.v0
    return v_nodes, v_max


def build_grid(spec: GridSpec, model: ModelParams, strike: float) -> Grid2D:
    """
    Constrói a grade não uniforme em S e uniforme em v.

    Args:
        spec: Especificação da grade
        model: Parâmetros do modelo (S0, v0)
        strike: Strike de referência para S_max e condensação padrão

    Returns:
        Grid2D com S0 e v0 sobre nós

    Raises:
        GridError: Grade pequena demais ou ponto de condensação fora de [0, S_max]
    """
    if spec.Ns < 4 or spec.Nv < 4:
        raise GridError(f"Ns e Nv devem ser >= 4 (recebido {spec.Ns}, {spec.Nv})")
    if spec.log_uniform:
        return build_log_grid(spec, model, strike)

    s_max = spec.s_max_mult * max(model.S0, strike)
    points = spec.condense_points or (model.S0, strike)
    points = tuple(sorted(set(points)))
    for point in points:
        if not 0 <= point <= s_max:
            raise GridError(f"ponto de condensação {point} fora de [0, {s_max}]")

    if spec.condense_strength == 0:
        s_nodes = np.linspace(0.0, s_max, spec.Ns)
    else:
        c = s_max / spec.condense_strength
        maps = [_sinh_map(point, s_max, spec.Ns, c) for point in points]
        s_nodes = _merge_maps(maps, spec.Ns, s_max)
    s_nodes = _snap(s_nodes, model.S0)

    v_nodes, v_max = _variance_nodes(spec, model)
    logger.debug(
        f"grade construída: Ns={spec.Ns}, Nv={spec.Nv}, S_max={s_max}, "
        f"v_max={v_max:.6g}, pontos={points}"
    )
    return Grid2D(s_nodes, v_nodes, S0=model.S0, v0=model.v0)


def build_log_grid(spec: GridSpec, model: ModelParams, strike: float) -> Grid2D:
    """
    Constrói a grade log-uniforme em S (espaçamento geométrico) mais o nó S = 0.

    Os nós com S > 0 formam uma grade uniforme em x = log(S/S0) contendo x = 0,
    requisito do estágio de saltos.

    Args:
        spec: Especificação da grade (Ns conta o nó S = 0)
        model: Parâmetros do modelo
        strike: Strike de referência para S_max

    Returns:
        Grid2D marcada como log_uniform
    """
    s_max = spec.s_max_mult * max(model.S0, strike)
    x_max = np.log(s_max / model.S0)
    if x_max <= 0:
        raise GridError("S_max deve exceder S0 para a grade logarítmica")
    n_x = spec.Ns - 1
    k0 = (n_x - 1) // 2
    h = x_max / (n_x - 1 - k0)
    x_nodes = (np.arange(n_x) - k0) * h
    s_nodes = np.concatenate(([0.0], model.S0 * np.exp(x_nodes)))
    s_nodes[k0 + 1] = model.S0

    v_nodes, _ = _variance_nodes(spec, model)
    logger.debug(f"grade log-uniforme: Ns={spec.Ns}, h_x={h:.6g}, S_max={s_nodes[-1]:.6g}")
    return Grid2D(s_nodes, v_nodes, S0=model.S0, v0=model.v0, log_uniform=True)


def export_grid_csv(grid: Grid2D, path: str | Path) -> None:
    """Exporta os nós da grade em CSV (um nó por linha)."""
    frames = [
        pd.DataFrame({
            "axis": axis,
            "index": np.arange(nodes.size),
            "node": nodes,
            "cell_width": widths,
        })
        for axis, nodes, widths in (
            ("S", grid.s_nodes, grid.s_cell_widths),
            ("v", grid.v_nodes, grid.v_cell_widths),
        )
    ]
    pd.concat(frames, ignore_index=True).to_csv(path, index=False, float_format="%.12g")
