"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : passo QP-SBGD, baselines BinaryConnect/ProxQuant e detector de ponto fixo
Tipo            : núcleo
Módulo          : optim
ID              : QPSBGD.OPTIM.001

Todas as funções de passo devolvem uma rede nova; a rede recebida não muda.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from qpsbgd.binmap import build_qubo, solve_binary_map, training_input
from qpsbgd.errors import InvalidArgumentError, QpsbgdError
from qpsbgd.net import (
    BinaryNetwork,
    GradientBundle,
    backward,
    forward,
    sign,
    weight_gradients,
)
from qpsbgd.qubo import QuboProblem, QuboSolver

logger = logging.getLogger(__name__)

KINDS = ("qpsbgd", "bc_sgd", "bc_signsgd", "proxquant")

ALPHA_PADRAO = {
    "qpsbgd": 0.05,
    "qpsbgd_remote": 0.01,
    "bc_sgd": 5e-5,
    "bc_signsgd": 0.05,
    "proxquant": 0.01,
}
LAMBDA0_PADRAO = 1e-4


@dataclass(frozen=True)
class Batch:
    """
    X: linhas do lote (MLP) ou features de todos os nós (GCN).
    y: rótulos das linhas do lote / dos nós em `nodes`.
    """

    X: np.ndarray
    y: np.ndarray
    nodes: np.ndarray | None = None

    def __post_init__(self):
        if len(np.asarray(self.y).reshape(-1)) == 0:
            raise InvalidArgumentError("lote vazio")


def _gradientes(net: BinaryNetwork, batch: Batch, binarize: bool = True) -> GradientBundle:
    _, cache = forward(net, batch.X, nodes=batch.nodes, binarize=binarize)
    return backward(net, cache, batch.y)


# ------------------------------
# QP-SBGD
# ------------------------------
def binary_gradients(
    net: BinaryNetwork,
    bundle: GradientBundle,
    solver: QuboSolver,
    t: int = 0,
    workers: int = 1,
) -> tuple[list[np.ndarray], list[dict]]:
    """
    Projeção binária de cada coluna de cada camada: Ẇ[:, i] = argmin_g Σ_b (Ṙ[b,i] − gᵀ u_b)².
    Devolve as matrizes Ẇ ∈ {±1}^{n×m} e uma linha de relatório por coluna.
    """
    tarefas = []
    for k, (camada, grad) in enumerate(zip(net.layers, bundle.layers)):
        for i in range(camada.cols):
            inp = training_input(grad.layer_input, grad.Rdot[:, i])
            problema = QuboProblem.zeros(camada.rows) if inp is None else build_qubo(inp)
            tarefas.append((k, i, inp, problema))

    def resolver(tarefa):
        k, i, inp, problema = tarefa
        chave = (t, k, i)
        try:
            if inp is None:
                return solver.solve(problema, key=chave)
            return solve_binary_map(inp, solver, key=chave)
        except QpsbgdError as e:
            e.add_note(f"iteração {t}, camada {k}, coluna {i}")
            raise

    if workers > 1 and len(tarefas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            resultados = list(executor.map(resolver, tarefas))
    else:
        resultados = [resolver(tarefa) for tarefa in tarefas]

    grads = [np.empty(c.Omega.shape) for c in net.layers]
    relatorio = []
    for (k, i, inp, problema), res in zip(tarefas, resultados):
        grads[k][:, i] = res.best
        relatorio.append(
            {
                "t": t,
                "layer": k,
                "column": i,
                "qubo_n": problema.n,
                "qubo_m": 0 if inp is None else inp.m,
                "best_energy": res.best_energy,
            }
        )
        logger.debug("t=%d camada=%d coluna=%d energia=%.6g", t, k, i, res.best_energy)
    return grads, relatorio


def qpsbgd_step(
    net: BinaryNetwork,
    batch: Batch,
    solver: QuboSolver,
    *,
    alpha: float = ALPHA_PADRAO["qpsbgd"],
    t: int = 0,
    workers: int = 1,
) -> tuple[BinaryNetwork, list[dict]]:
    bundle = _gradientes(net, batch)
    grads, relatorio = binary_gradients(net, bundle, solver, t=t, workers=workers)
    # só depois de todas as colunas resolvidas
    novos = [c.Omega - alpha * G for c, G in zip(net.layers, grads)]
    return net.with_omegas(novos), relatorio


# ------------------------------
# Baselines
# ------------------------------
def apply_bc_update(omega, grad, alpha: float) -> np.ndarray:
    return np.clip(np.asarray(omega) - alpha * np.asarray(grad), -1.0, 1.0)


def apply_signsgd_update(omega, grad, alpha: float) -> np.ndarray:
    return np.clip(np.asarray(omega) - alpha * sign(grad), -1.0, 1.0)


def prox_binary(omega, limiar: float) -> np.ndarray:
    """Prox de Σ min(|ω−1|, |ω+1|): aproxima cada ω do ±1 mais próximo em até `limiar`."""
    omega = np.asarray(omega, dtype=np.float64)
    alvo = sign(omega).astype(np.float64)
    distancia = np.abs(alvo - omega)
    return np.where(distancia <= limiar, alvo, omega + np.sign(alvo - omega) * limiar)


def bc_sgd_step(net: BinaryNetwork, batch: Batch, *, alpha: float = ALPHA_PADRAO["bc_sgd"]) -> BinaryNetwork:
    grads = weight_gradients(_gradientes(net, batch))
    return net.with_omegas(apply_bc_update(c.Omega, g, alpha) for c, g in zip(net.layers, grads))


def bc_signsgd_step(
    net: BinaryNetwork, batch: Batch, *, alpha: float = ALPHA_PADRAO["bc_signsgd"]
) -> BinaryNetwork:
    grads = weight_gradients(_gradientes(net, batch))
    return net.with_omegas(
        apply_signsgd_update(c.Omega, g, alpha) for c, g in zip(net.layers, grads)
    )


def proxquant_step(
    net: BinaryNetwork, batch: Batch, lam: float, *, alpha: float = ALPHA_PADRAO["proxquant"]
) -> BinaryNetwork:
    if lam < 0:
        raise InvalidArgumentError(f"λ deve ser ≥ 0, recebido {lam}")
    grads = weight_gradients(_gradientes(net, batch, binarize=False))
    return net.with_omegas(
        prox_binary(c.Omega - alpha * g, lam * alpha) for c, g in zip(net.layers, grads)
    )


# ------------------------------
# Estado do otimizador
# ------------------------------
@dataclass
class OptimizerState:
    kind: str
    alpha: float
    solver: QuboSolver | None = None
    t: int = 0
    lambda0: float = LAMBDA0_PADRAO
    workers: int = 1

    def __post_init__(self):
        erros = []
        if self.kind not in KINDS:
            erros.append(f"kind deve ser um de {KINDS}, recebido {self.kind!r}")
        if not self.alpha > 0:
            erros.append(f"alpha deve ser > 0, recebido {self.alpha}")
        if self.t < 0:
            erros.append(f"t deve ser ≥ 0, recebido {self.t}")
        if self.kind == "qpsbgd" and self.solver is None:
            erros.append("qpsbgd exige um solver")
        if self.lambda0 < 0:
            erros.append(f"lambda0 deve ser ≥ 0, recebido {self.lambda0}")
        if erros:
            raise InvalidArgumentError("; ".join(erros))

    def lam(self) -> float:
        return self.lambda0 * self.t

    def step(self, net: BinaryNetwork, batch: Batch) -> tuple[BinaryNetwork, list[dict]]:
        """Aplica um passo; t só avança quando o passo termina sem erro."""
        t = self.t + 1
        relatorio: list[dict] = []
        if self.kind == "qpsbgd":
            net, relatorio = qpsbgd_step(
                net, batch, self.solver, alpha=self.alpha, t=t, workers=self.workers
            )
        elif self.kind == "bc_sgd":
            net = bc_sgd_step(net, batch, alpha=self.alpha)
        elif self.kind == "bc_signsgd":
            net = bc_signsgd_step(net, batch, alpha=self.alpha)
        else:
            net = proxquant_step(net, batch, self.lambda0 * t, alpha=self.alpha)
        self.t = t
        return net, relatorio


# ------------------------------
# Ponto fixo
# ------------------------------
GradientOracle = Callable[[BinaryNetwork], GradientBundle]


def full_batch_oracle(X, y, nodes=None) -> GradientOracle:
    """Gradiente no conjunto de treino inteiro."""
    batch = Batch(np.asarray(X), np.asarray(y), nodes)
    return lambda net: _gradientes(net, batch)


def is_fixed_point(
    net: BinaryNetwork, full_gradient_oracle: GradientOracle, solver: QuboSolver
) -> list[np.ndarray]:
    """
    Avalia em s = sign(Ω). Uma coluna é ponto fixo quando a projeção binária
    do gradiente completo é exatamente −s. Devolve um vetor booleano por camada.
    """
    em_s = net.binarized()
    grads, _ = binary_gradients(em_s, full_gradient_oracle(em_s), solver)
    return [np.all(-G == c.W, axis=0) for G, c in zip(grads, net.layers)]
