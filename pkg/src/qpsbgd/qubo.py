"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : problema QUBO/Ising em spins {-1,+1} e solvers intercambiáveis
Tipo            : núcleo
Módulo          : qubo
ID              : QPSBGD.QUBO.001

Energia de um estado g:  gᵀ Q g + sᵀ g + offset.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
import numpy.typing as npt

from qpsbgd.errors import CapacityError, InvalidArgumentError, ParseError

logger = logging.getLogger(__name__)

SpinVector = npt.NDArray[np.int8]

TOL_ENERGIA = 1e-9
LIMITE_EXAUSTIVO = 24
LIMITE_AMOSTRAS_EXAUSTIVO = 12
BLOCO_ENUMERACAO = 1 << 16


def as_spins(valores, n: int | None = None) -> SpinVector:
    g = np.asarray(valores)
    if g.ndim != 1:
        raise InvalidArgumentError(f"vetor de spins deve ser 1-D, recebido shape {g.shape}")
    if n is not None and g.shape[0] != n:
        raise InvalidArgumentError(f"vetor de spins com tamanho {g.shape[0]}, esperado {n}")
    if not np.all((g == 1) | (g == -1)):
        raise InvalidArgumentError("vetor de spins deve conter apenas -1 e +1")
    return g.astype(np.int8)


@dataclass(frozen=True)
class QuboProblem:
    Q: np.ndarray
    s: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        Q = np.array(self.Q, dtype=np.float64)
        s = np.array(self.s, dtype=np.float64).reshape(-1)

        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] < 1:
            raise InvalidArgumentError(f"Q deve ser quadrada n×n com n ≥ 1, recebido {Q.shape}")
        if s.shape[0] != Q.shape[0]:
            raise InvalidArgumentError(f"s tem tamanho {s.shape[0]}, esperado {Q.shape[0]}")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(s)) and math.isfinite(self.offset)):
            raise InvalidArgumentError("coeficientes não finitos no problema QUBO")

        escala = max(1.0, float(np.abs(Q).max()))
        if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * escala):
            raise InvalidArgumentError("Q não é simétrica")

        # simetria exata: Q[i][j] == Q[j][i] bit a bit
        Q = 0.5 * (Q + Q.T)
        Q.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @classmethod
    def zeros(cls, n: int) -> QuboProblem:
        return cls(np.zeros((n, n)), np.zeros(n), 0.0)

    @classmethod
    def symmetrized(cls, Q, s, offset: float = 0.0) -> QuboProblem:
        Q = np.asarray(Q, dtype=np.float64)
        return cls(0.5 * (Q + Q.T), s, offset)

    def max_abs_coefficient(self) -> float:
        return float(max(np.abs(self.Q).max(), np.abs(self.s).max()))


@dataclass(frozen=True)
class SolveResult:
    best: SpinVector
    best_energy: float
    samples: list[tuple[SpinVector, float]] = field(default_factory=list)
    reads: int = 1


class QuboSolver(Protocol):
    def solve(self, problem: QuboProblem, *, key: tuple[int, ...] = ()) -> SolveResult: ...


def energy(p: QuboProblem, g) -> float:
    gf = as_spins(g, p.n).astype(np.float64)
    return float(gf @ p.Q @ gf + p.s @ gf + p.offset)


def energies(p: QuboProblem, G: np.ndarray) -> np.ndarray:
    """Energia de cada linha de G (estados em {-1,+1})."""
    G = np.asarray(G, dtype=np.float64)
    return np.einsum("ij,jk,ik->i", G, p.Q, G) + G @ p.s + p.offset


def _estados(n: int, indices: np.ndarray) -> np.ndarray:
    # bit mais significativo = coordenada 0; bit 0 -> -1, assim a ordem dos índices
    # coincide com a ordem lexicográfica em que -1 < +1
    deslocamentos = np.arange(n - 1, -1, -1, dtype=np.int64)
    bits = (indices[:, None] >> deslocamentos[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


def solve_exhaustive(p: QuboProblem, cap: int = LIMITE_EXAUSTIVO) -> SolveResult:
    if p.n > cap:
        raise CapacityError(f"busca exaustiva limitada a n ≤ {cap}, recebido n = {p.n}")

    total = 1 << p.n
    guardar_todos = p.n <= LIMITE_AMOSTRAS_EXAUSTIVO
    melhor_indice, melhor_energia = -1, math.inf
    todas = []

    for inicio in range(0, total, BLOCO_ENUMERACAO):
        indices = np.arange(inicio, min(inicio + BLOCO_ENUMERACAO, total), dtype=np.int64)
        E = energies(p, _estados(p.n, indices))
        if guardar_todos:
            todas.append(E)

        minimo = float(E.min())
        if minimo < melhor_energia - TOL_ENERGIA:
            pos = int(np.flatnonzero(E <= minimo + TOL_ENERGIA)[0])
            melhor_indice, melhor_energia = int(indices[pos]), float(E[pos])

    best = _estados(p.n, np.array([melhor_indice], dtype=np.int64))[0]
    best_energy = energy(p, best)

    if guardar_todos:
        E = np.concatenate(todas)
        ordem = np.argsort(E, kind="stable")
        estados = _estados(p.n, ordem.astype(np.int64))
        samples = [(estados[i], float(E[k])) for i, k in enumerate(ordem)]
    else:
        samples = [(best, best_energy)]

    return SolveResult(best=best, best_energy=best_energy, samples=samples, reads=total)


@dataclass(frozen=True)
class SaParams:
    sweeps: int = 1000
    restarts: int = 32
    t_hot: float | None = None
    t_cold: float = 1e-3
    workers: int = 1

    def temperaturas(self, p: QuboProblem) -> np.ndarray:
        erros = []
        if self.sweeps < 1:
            erros.append(f"sweeps deve ser ≥ 1 (recebido {self.sweeps})")
        if self.restarts < 1:
            erros.append(f"restarts deve ser ≥ 1 (recebido {self.restarts})")
        if self.workers < 1:
            erros.append(f"workers deve ser ≥ 1 (recebido {self.workers})")
        if not self.t_cold > 0:
            erros.append(f"t_cold deve ser > 0 (recebido {self.t_cold})")

        t_hot = self.t_hot
        if t_hot is None:
            t_hot = p.max_abs_coefficient() * p.n
            if t_hot <= self.t_cold:
                # problema nulo ou quase nulo
                t_hot = 10.0 * self.t_cold
        if self.t_cold > 0 and not t_hot > self.t_cold:
            erros.append(f"t_hot deve ser > t_cold (recebido {t_hot} ≤ {self.t_cold})")
        if erros:
            raise InvalidArgumentError("; ".join(erros))

        if self.sweeps == 1:
            return np.array([t_hot])
        fracao = np.arange(self.sweeps) / (self.sweeps - 1)
        return t_hot * (self.t_cold / t_hot) ** fracao


def _recozer(p: QuboProblem, temps: np.ndarray, g0: np.ndarray, u: np.ndarray):
    """Cadeias de Metropolis vetorizadas; cada linha é uma cadeia independente."""
    Q, s = p.Q, p.s
    diag = np.diag(Q)
    g = g0.astype(np.float64)
    h = g @ Q
    E = energies(p, g)
    melhor_g, melhor_E = g.copy(), E.copy()

    for k, T in enumerate(temps):
        for i in range(p.n):
            gi = g[:, i].copy()
            dE = -4.0 * gi * (h[:, i] - diag[i] * gi) - 2.0 * s[i] * gi
            aceita = (dE <= 0.0) | (u[:, k, i] < np.exp(-np.maximum(dE, 0.0) / T))
            if not aceita.any():
                continue
            delta = np.where(aceita, -2.0 * gi, 0.0)
            h += np.outer(delta, Q[i])
            g[:, i] = gi + delta
            E += np.where(aceita, dE, 0.0)

        melhorou = E < melhor_E
        melhor_g[melhorou] = g[melhorou]
        melhor_E[melhorou] = E[melhorou]

    return melhor_g.astype(np.int8)


def solve_sa(p: QuboProblem, params: SaParams, seed: int, key: tuple[int, ...] = ()) -> SolveResult:
    temps = params.temperaturas(p)

    # um fluxo aleatório por reinício, derivado de (seed, key, índice do reinício)
    fluxos = np.random.SeedSequence([int(seed), *map(int, key)]).spawn(params.restarts)
    iniciais, uniformes = [], []
    for r, fluxo in enumerate(fluxos):
        rng = np.random.default_rng(fluxo)
        g0 = rng.choice(np.array([-1, 1], dtype=np.int8), size=p.n)
        if r == 0:
            g0[:] = 1
        iniciais.append(g0)
        uniformes.append(rng.random((len(temps), p.n)))
    G0 = np.stack(iniciais)
    U = np.stack(uniformes)

    blocos = np.array_split(np.arange(params.restarts), min(params.workers, params.restarts))
    if len(blocos) == 1:
        finais = [_recozer(p, temps, G0, U)]
    else:
        with ThreadPoolExecutor(max_workers=len(blocos)) as executor:
            finais = list(executor.map(lambda b: _recozer(p, temps, G0[b], U[b]), blocos))
    estados = np.concatenate(finais)

    samples = sorted(
        ((estado, energy(p, estado)) for estado in estados),
        key=lambda par: (par[1], tuple(int(x) for x in par[0])),
    )
    best, best_energy = samples[0]
    logger.debug("SA n=%d reinícios=%d melhor energia=%.6g", p.n, params.restarts, best_energy)
    return SolveResult(best=best, best_energy=best_energy, samples=samples, reads=params.restarts)


@dataclass(frozen=True)
class ExhaustiveSolver:
    cap: int = LIMITE_EXAUSTIVO

    def solve(self, problem: QuboProblem, *, key: tuple[int, ...] = ()) -> SolveResult:
        return solve_exhaustive(problem, cap=self.cap)


@dataclass(frozen=True)
class AnnealingSolver:
    params: SaParams = field(default_factory=SaParams)
    seed: int = 0

    def solve(self, problem: QuboProblem, *, key: tuple[int, ...] = ()) -> SolveResult:
        return solve_sa(problem, self.params, self.seed, key=key)


def jaccard(a, b) -> float:
    a = as_spins(a)
    b = as_spins(b)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"tamanhos diferentes: {a.shape[0]} e {b.shape[0]}")
    A, B = a == 1, b == 1
    uniao = int(np.count_nonzero(A | B))
    if uniao == 0:
        return 1.0
    return np.count_nonzero(A & B) / uniao


# ------------------------------
# Formato texto
# ------------------------------
def read_qubo_text(texto: str, caminho: str | None = None) -> QuboProblem:
    """
    Formato por linha: `n <int>`, `q <i> <j> <valor>` (i ≤ j, Q[i][j] = Q[j][i] = valor),
    `l <i> <valor>`, `offset <valor>`. Índices a partir de 0; `#` inicia comentário.
    """
    n = None
    quadraticos: dict[tuple[int, int], float] = {}
    lineares: dict[int, float] = {}
    offset = None

    def indice(token: str, num: int) -> int:
        try:
            i = int(token)
        except ValueError:
            raise ParseError(f"índice inválido {token!r}", num, caminho) from None
        if not 0 <= i < n:
            raise ParseError(f"índice {i} fora de [0, {n})", num, caminho)
        return i

    def valor(token: str, num: int) -> float:
        try:
            v = float(token)
        except ValueError:
            raise ParseError(f"valor inválido {token!r}", num, caminho) from None
        if not math.isfinite(v):
            raise ParseError(f"valor não finito {token!r}", num, caminho)
        return v

    for num, linha in enumerate(texto.splitlines(), start=1):
        partes = linha.split("#", 1)[0].split()
        if not partes:
            continue
        diretiva, args = partes[0].lower(), partes[1:]

        if diretiva == "n":
            if n is not None:
                raise ParseError("diretiva `n` repetida", num, caminho)
            if len(args) != 1:
                raise ParseError("uso: n <int>", num, caminho)
            try:
                n = int(args[0])
            except ValueError:
                raise ParseError(f"n inválido {args[0]!r}", num, caminho) from None
            if n < 1:
                raise ParseError(f"n deve ser ≥ 1, recebido {n}", num, caminho)
            continue

        if n is None:
            raise ParseError("a diretiva `n` deve vir antes dos coeficientes", num, caminho)

        if diretiva == "q":
            if len(args) != 3:
                raise ParseError("uso: q <i> <j> <valor>", num, caminho)
            i, j = indice(args[0], num), indice(args[1], num)
            if i > j:
                raise ParseError(f"entrada q exige i ≤ j, recebido ({i}, {j})", num, caminho)
            if (i, j) in quadraticos:
                raise ParseError(f"entrada q ({i}, {j}) duplicada", num, caminho)
            quadraticos[(i, j)] = valor(args[2], num)
        elif diretiva == "l":
            if len(args) != 2:
                raise ParseError("uso: l <i> <valor>", num, caminho)
            i = indice(args[0], num)
            if i in lineares:
                raise ParseError(f"entrada l {i} duplicada", num, caminho)
            lineares[i] = valor(args[1], num)
        elif diretiva == "offset":
            if len(args) != 1:
                raise ParseError("uso: offset <valor>", num, caminho)
            if offset is not None:
                raise ParseError("diretiva `offset` repetida", num, caminho)
            offset = valor(args[0], num)
        else:
            raise ParseError(f"diretiva desconhecida {diretiva!r}", num, caminho)

    if n is None:
        raise ParseError("diretiva `n` ausente", None, caminho)

    Q = np.zeros((n, n))
    for (i, j), v in quadraticos.items():
        Q[i, j] = Q[j, i] = v
    s = np.zeros(n)
    for i, v in lineares.items():
        s[i] = v
    return QuboProblem(Q, s, offset or 0.0)


def read_qubo_file(caminho) -> QuboProblem:
    caminho = Path(caminho)
    try:
        texto = caminho.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"não foi possível ler o arquivo: {e}", None, str(caminho)) from e
    return read_qubo_text(texto, str(caminho))


def write_qubo_text(p: QuboProblem) -> str:
    linhas = [f"n {p.n}"]
    for i in range(p.n):
        for j in range(i, p.n):
            if p.Q[i, j] != 0.0:
                linhas.append(f"q {i} {j} {float(p.Q[i, j])!r}")
    for i in range(p.n):
        if p.s[i] != 0.0:
            linhas.append(f"l {i} {float(p.s[i])!r}")
    linhas.append(f"offset {p.offset!r}")
    return "\n".join(linhas) + "\n"
