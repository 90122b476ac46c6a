"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : mapa binário de gradientes (forma QUBO exata e forma relaxada)
Tipo            : núcleo
Módulo          : binmap
ID              : QPSBGD.BINMAP.001
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from qpsbgd.errors import InvalidArgumentError, QpsbgdError, SingularInputError
from qpsbgd.qubo import QuboProblem, QuboSolver, SolveResult, SpinVector

logger = logging.getLogger(__name__)

NORMA_MINIMA = 1e-12


@dataclass(frozen=True)
class BinaryMapInput:
    """
    U: matriz n×m cujas colunas são os u_i.
    v: vetor com m entradas (no treino, ∂E/∂y_i por amostra).
    """

    U: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        U = np.array(self.U, dtype=np.float64)
        v = np.array(self.v, dtype=np.float64).reshape(-1)
        if U.ndim == 1:
            U = U.reshape(-1, 1)
        if U.ndim != 2 or U.shape[0] < 1 or U.shape[1] < 1:
            raise InvalidArgumentError(f"U deve ser n×m com n, m ≥ 1, recebido {U.shape}")
        if v.shape[0] != U.shape[1]:
            raise InvalidArgumentError(f"v tem tamanho {v.shape[0]}, esperado m = {U.shape[1]}")
        if not (np.all(np.isfinite(U)) and np.all(np.isfinite(v))):
            raise InvalidArgumentError("entradas não finitas no mapa binário")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def m(self) -> int:
        return self.U.shape[1]

    def residual(self, g) -> float:
        """Σ_i (v_i − gᵀ u_i)², o objetivo minimizado pelo mapa binário."""
        r = self.v - np.asarray(g, dtype=np.float64) @ self.U
        return float(r @ r)


def training_input(layer_input: np.ndarray, rdot_column: np.ndarray) -> BinaryMapInput | None:
    """
    Instância de treino para uma coluna: u_b = x_b / ‖x_b‖², v_b = Ṙ[b, i].
    Amostras com ‖x_b‖ < 1e-12 são descartadas; sem amostras restantes devolve None.
    """
    X = np.asarray(layer_input, dtype=np.float64)
    v = np.asarray(rdot_column, dtype=np.float64)
    normas2 = np.einsum("ij,ij->i", X, X)
    manter = np.sqrt(normas2) >= NORMA_MINIMA
    if not manter.any():
        return None
    U = (X[manter] / normas2[manter, None]).T
    return BinaryMapInput(U, v[manter])


def build_qubo(inp: BinaryMapInput) -> QuboProblem:
    U, v = inp.U, inp.v
    return QuboProblem.symmetrized(U @ U.T, -2.0 * (U @ v), float(v @ v))


def solve_binary_map(
    inp: BinaryMapInput, solver: QuboSolver, key: tuple[int, ...] = ()
) -> SolveResult:
    try:
        return solver.solve(build_qubo(inp), key=key)
    except QpsbgdError as e:
        e.add_note(f"mapa binário com n={inp.n}, m={inp.m}")
        raise


def binary_map(inp: BinaryMapInput, solver: QuboSolver) -> SpinVector:
    return solve_binary_map(inp, solver).best


def relaxed_map(inp: BinaryMapInput) -> np.ndarray:
    """Solução de norma mínima de min_b Σ_i (v_i − bᵀ u_i)²."""
    normas = np.linalg.norm(inp.U, axis=0)
    nulas = np.flatnonzero(normas == 0.0)
    if nulas.size:
        raise SingularInputError(f"colunas nulas em U: {nulas.tolist()}")

    b, *_ = np.linalg.lstsq(inp.U.T, inp.v, rcond=None)
    return b
