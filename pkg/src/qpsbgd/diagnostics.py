"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : teste Z da propriedade de direção consistente, similaridade de amostras
                  e gap espectral do Hamiltoniano de recozimento
Tipo            : diagnóstico
Módulo          : diagnostics
ID              : QPSBGD.DIAG.001
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.sparse as sparse

from qpsbgd.binmap import build_qubo, training_input
from qpsbgd.errors import CapacityError, EmptyTallyError, InvalidArgumentError, NumericError
from qpsbgd.net import BinaryNetwork, GradientBundle, sign, weight_gradients
from qpsbgd.optim import binary_gradients
from qpsbgd.qubo import QuboProblem, QuboSolver, jaccard

logger = logging.getLogger(__name__)

GRAD_MINIMO = 1e-12
LIMITE_DENSO = 10
MAX_NIVEIS_CSV = 16


# ------------------------------
# CDP
# ------------------------------
@dataclass(frozen=True)
class CdpTally:
    k: int
    n: int
    z: float

    def __add__(self, outro: CdpTally) -> CdpTally:
        return tally_from_counts(self.k + outro.k, self.n + outro.n)


def z_statistic(k: int, n: int, p: float = 0.5) -> float:
    return (k - n * p) / math.sqrt(n * p * (1 - p))


def tally_from_counts(k: int, n: int) -> CdpTally:
    if n <= 0:
        raise EmptyTallyError("nenhuma coordenada para comparar")
    if not 0 <= k <= n:
        raise InvalidArgumentError(f"k deve estar em [0, n], recebido k={k}, n={n}")
    return CdpTally(int(k), int(n), z_statistic(k, n))


def cdp_test(projected_signs, true_gradient) -> CdpTally:
    """Concordâncias entre o sinal projetado e sign(∇E); |∇E| < 1e-12 fica fora."""
    proj = np.asarray(projected_signs, dtype=np.float64).reshape(-1)
    grad = np.asarray(true_gradient, dtype=np.float64).reshape(-1)
    if proj.shape != grad.shape:
        raise InvalidArgumentError(f"tamanhos diferentes: {proj.size} e {grad.size}")

    valido = np.abs(grad) >= GRAD_MINIMO
    k = int(np.count_nonzero(proj[valido] == sign(grad[valido])))
    return tally_from_counts(k, int(np.count_nonzero(valido)))


def pool_tallies(tallies) -> CdpTally:
    tallies = list(tallies)
    if not tallies:
        raise EmptyTallyError("nenhuma contagem para agregar")
    return tally_from_counts(sum(t.k for t in tallies), sum(t.n for t in tallies))


def cdp_contagens(
    net: BinaryNetwork,
    batch_bundle: GradientBundle,
    full_bundle: GradientBundle,
    solver: QuboSolver,
    t: int = 0,
) -> dict[str, CdpTally]:
    """
    Compara com o sinal do gradiente no treino inteiro: a projeção QP-SBGD do
    lote (o passo desce −Ẇ, então Ẇ estima o gradiente) e o sinal do gradiente
    do lote usado pelo signSGD.
    """
    projecoes, _ = binary_gradients(net, batch_bundle, solver, t=t)
    verdade = np.concatenate([g.reshape(-1) for g in weight_gradients(full_bundle)])
    proj = np.concatenate([G.reshape(-1) for G in projecoes])
    sinais = np.concatenate([sign(g).reshape(-1) for g in weight_gradients(batch_bundle)])
    return {"qpsbgd": cdp_test(proj, verdade), "signsgd": cdp_test(sinais, verdade)}


# ------------------------------
# Similaridade
# ------------------------------
def sample_similarity(samples, top_k: int) -> np.ndarray:
    """Jaccard par a par das `top_k` primeiras amostras (pares (vetor, energia) ou vetores)."""
    vetores = [a[0] if isinstance(a, tuple) else a for a in samples]
    if not 1 <= top_k <= len(vetores):
        raise InvalidArgumentError(f"top_k={top_k} com apenas {len(vetores)} amostras")

    M = np.ones((top_k, top_k))
    for i in range(top_k):
        for j in range(i + 1, top_k):
            M[i, j] = M[j, i] = jaccard(vetores[i], vetores[j])
    return M


# ------------------------------
# Hamiltoniano de recozimento
# ------------------------------
_SX = sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
_SZ = sparse.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]]))
_ID = sparse.identity(2, format="csr")


def _operador(op, sitio: int, n: int):
    # qubit 0 é o fator mais à esquerda do produto de Kronecker
    resultado = op if sitio == 0 else _ID
    for j in range(1, n):
        resultado = sparse.kron(resultado, op if j == sitio else _ID, format="csr")
    return resultado


def basis_spins(indice: int, n: int) -> np.ndarray:
    """Spins do estado |indice⟩: bit 0 -> +1, bit 1 -> −1, qubit 0 mais significativo."""
    return np.array([1 - 2 * ((indice >> (n - 1 - j)) & 1) for j in range(n)], dtype=np.int8)


def _componentes(p: QuboProblem, cap: int) -> tuple[np.ndarray, np.ndarray]:
    if p.n > cap:
        raise CapacityError(f"Hamiltoniano denso limitado a n ≤ {cap}, recebido n = {p.n}")

    Z = [_operador(_SZ, i, p.n) for i in range(p.n)]
    dim = 2**p.n
    H_B = sparse.csr_matrix((dim, dim))
    for i in range(p.n):
        H_B = H_B - _operador(_SX, i, p.n)

    # termos diagonais de Q são constantes para spins: entram no deslocamento
    H_P = (np.trace(p.Q) + p.offset) * sparse.identity(dim, format="csr")
    for i in range(p.n):
        H_P = H_P + p.s[i] * Z[i]
        for j in range(i + 1, p.n):
            if p.Q[i, j] != 0.0:
                H_P = H_P + 2.0 * p.Q[i, j] * (Z[i] @ Z[j])
    return H_B.toarray(), H_P.diagonal()


def build_anneal_hamiltonian(p: QuboProblem, s: float, cap: int = LIMITE_DENSO) -> np.ndarray:
    """H(s) = (1 − s)·H_B + s·H_P, H_B = −Σ σx; diag(H_P) é a energia de cada estado da base."""
    if not 0.0 <= s <= 1.0:
        raise InvalidArgumentError(f"s deve estar em [0, 1], recebido {s}")
    H_B, diag_P = _componentes(p, cap)
    return (1.0 - s) * H_B + s * np.diag(diag_P)


@dataclass(frozen=True)
class AnnealSpectrum:
    grid: np.ndarray
    levels: np.ndarray
    min_gap: float
    argmin_s: float
    ground_degeneracy: int = 1
    refined_gap: float = math.nan
    refined_argmin_s: float = math.nan

    def to_frame(self, max_levels: int = MAX_NIVEIS_CSV) -> pd.DataFrame:
        k = min(self.levels.shape[1], max_levels)
        df = pd.DataFrame(self.levels[:, :k], columns=[f"E_{i}" for i in range(k)])
        df.insert(0, "s", self.grid)
        return df


def spectral_gap(
    p: QuboProblem, grid_points: int, workers: int = 1, cap: int = LIMITE_DENSO
) -> AnnealSpectrum:
    if grid_points < 3:
        raise InvalidArgumentError(f"grid_points deve ser ≥ 3, recebido {grid_points}")

    H_B, diag_P = _componentes(p, cap)
    grid = np.linspace(0.0, 1.0, grid_points)

    def niveis(s: float) -> np.ndarray:
        H = (1.0 - s) * H_B + s * np.diag(diag_P)
        try:
            return scipy.linalg.eigh(H, eigvals_only=True)
        except np.linalg.LinAlgError as e:
            raise NumericError(f"autovalores não convergiram em s = {s}: {e}") from e

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            levels = np.array(list(executor.map(niveis, grid)))
    else:
        levels = np.array([niveis(s) for s in grid])

    gaps = np.maximum(levels[:, 1] - levels[:, 0], 0.0)
    i_min = int(np.argmin(gaps))

    final = levels[-1]
    tol = 1e-9 * max(1.0, float(np.abs(final).max()))
    degenerescencia = int(np.count_nonzero(final <= final[0] + tol))
    refinado, s_refinado = math.nan, math.nan
    if degenerescencia < final.size:
        gaps_ref = levels[:, degenerescencia] - levels[:, 0]
        j = int(np.argmin(gaps_ref))
        refinado, s_refinado = float(gaps_ref[j]), float(grid[j])

    logger.debug("gap mínimo %.6g em s=%.3f (n=%d)", gaps[i_min], grid[i_min], p.n)
    return AnnealSpectrum(
        grid, levels, float(gaps[i_min]), float(grid[i_min]), degenerescencia, refinado, s_refinado
    )


def layer_qubo(layer_input, rdot, neurons: int) -> QuboProblem:
    """QUBO conjunto dos primeiros `neurons` neurônios de uma camada em um lote (Q bloco-diagonal)."""
    rdot = np.asarray(rdot, dtype=np.float64)
    if not 1 <= neurons <= rdot.shape[1]:
        raise InvalidArgumentError(f"neurons deve estar em [1, {rdot.shape[1]}]")

    n = np.asarray(layer_input).shape[1]
    blocos, lineares, offset = [], [], 0.0
    for i in range(neurons):
        inp = training_input(layer_input, rdot[:, i])
        p = QuboProblem.zeros(n) if inp is None else build_qubo(inp)
        blocos.append(p.Q)
        lineares.append(p.s)
        offset += p.offset
    return QuboProblem(scipy.linalg.block_diag(*blocos), np.concatenate(lineares), offset)


@dataclass(frozen=True)
class NeuronGapComparison:
    """Gap de cada neurônio sozinho contra o gap do QUBO conjunto dos dois."""

    single_gaps: tuple[float, float]
    joint_gap: float

    @property
    def single_gap(self) -> float:
        return float(np.mean(self.single_gaps))

    def decreases(self, tol: float = 1e-9) -> bool:
        return self.joint_gap < self.single_gap - tol


def compare_neuron_gaps(
    layer_input, rdot, grid_points: int = 101, neurons=(0, 1), workers: int = 1
) -> NeuronGapComparison:
    """
    Camada de 1 neurônio contra camada de 2 neurônios no mesmo lote. A referência de
    1 neurônio é a média dos gaps de cada um isolado: o espectro conjunto é a soma de
    Kronecker dos blocos, então o gap conjunto é o menor dos dois.
    """
    rdot = np.asarray(rdot, dtype=np.float64)
    colunas = list(neurons)
    if len(colunas) != 2 or len(set(colunas)) != 2:
        raise InvalidArgumentError(f"neurons deve ter dois índices distintos, recebido {neurons}")
    if min(colunas) < 0 or max(colunas) >= rdot.shape[1]:
        raise InvalidArgumentError(f"neurônios {colunas} fora de [0, {rdot.shape[1]})")

    par = rdot[:, colunas]
    sozinhos = tuple(
        spectral_gap(layer_qubo(layer_input, par[:, [i]], 1), grid_points, workers).min_gap
        for i in range(2)
    )
    conjunto = spectral_gap(layer_qubo(layer_input, par, 2), grid_points, workers).min_gap
    logger.debug("gaps isolados %s, conjunto %.6g", sozinhos, conjunto)
    return NeuronGapComparison(sozinhos, conjunto)
