"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : MLP e GCN binárias com retropropagação explícita (STE)
Tipo            : núcleo
Módulo          : net
ID              : QPSBGD.NET.001

As camadas guardam os pesos latentes Ω; a rede sempre avalia W = sign(Ω).
A perda usada na retropropagação é a soma sobre o lote (gradientes por amostra);
a perda reportada é a média.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit, log_softmax, softmax

from qpsbgd.errors import FormatError, InvalidArgumentError, StateError

logger = logging.getLogger(__name__)

HEADS = ("bce", "nll")
FLAVORS = ("mlp", "gcn")


# ------------------------------
# Funções elementares
# ------------------------------
def sign(x):
    """sign(x) = +1 se x ≥ 0, −1 caso contrário (sign(0) = +1)."""
    arr = np.asarray(x, dtype=np.float64)
    out = np.where(arr >= 0, 1, -1).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def hard_tanh(x):
    out = np.clip(np.asarray(x, dtype=np.float64), -1.0, 1.0)
    return float(out) if out.ndim == 0 else out


def hard_tanh_grad(x) -> np.ndarray:
    # derivada do STE: 1 em (−1, 1), 0 fora
    x = np.asarray(x, dtype=np.float64)
    return ((x > -1.0) & (x < 1.0)).astype(np.float64)


def normalize_adjacency(A) -> np.ndarray:
    """D^{-1/2} (A + I) D^{-1/2}, com D o grau de A + I."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"adjacência deve ser quadrada, recebido {A.shape}")
    if not np.array_equal(A, A.T):
        raise InvalidArgumentError("adjacência não é simétrica")

    A_hat = A + np.eye(A.shape[0])
    d = A_hat.sum(axis=1)
    d_inv_sqrt = 1.0 / np.sqrt(d)
    return d_inv_sqrt[:, None] * A_hat * d_inv_sqrt[None, :]


# ------------------------------
# Tipos
# ------------------------------
@dataclass(frozen=True)
class BinaryLinearLayer:
    Omega: np.ndarray

    def __post_init__(self):
        Omega = np.array(self.Omega, dtype=np.float64)
        if Omega.ndim != 2 or 0 in Omega.shape:
            raise InvalidArgumentError(f"Ω deve ser uma matriz n×m não vazia, recebido {Omega.shape}")
        if not np.all(np.isfinite(Omega)):
            raise InvalidArgumentError("Ω contém valores não finitos")
        Omega.flags.writeable = False
        object.__setattr__(self, "Omega", Omega)

    @property
    def W(self) -> np.ndarray:
        return sign(self.Omega).astype(np.float64)

    @property
    def rows(self) -> int:
        return self.Omega.shape[0]

    @property
    def cols(self) -> int:
        return self.Omega.shape[1]


@dataclass(frozen=True)
class BinaryNetwork:
    layers: tuple[BinaryLinearLayer, ...]
    head: str = "bce"
    flavor: str = "mlp"
    adjacency: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        layers = tuple(
            c if isinstance(c, BinaryLinearLayer) else BinaryLinearLayer(c) for c in self.layers
        )
        object.__setattr__(self, "layers", layers)

        erros = []
        if not layers:
            erros.append("a rede precisa de ao menos uma camada")
        for k in range(1, len(layers)):
            if layers[k - 1].cols != layers[k].rows:
                erros.append(
                    f"camadas {k - 1} e {k} não encadeiam ({layers[k - 1].cols} ≠ {layers[k].rows})"
                )
        if self.head not in HEADS:
            erros.append(f"head deve ser um de {HEADS}, recebido {self.head!r}")
        elif layers and self.head == "bce" and layers[-1].cols != 1:
            erros.append("head bce exige saída de dimensão 1")
        elif layers and self.head == "nll" and layers[-1].cols < 2:
            erros.append("head nll exige ao menos 2 classes")
        if self.flavor not in FLAVORS:
            erros.append(f"flavor deve ser um de {FLAVORS}, recebido {self.flavor!r}")
        elif self.flavor == "gcn":
            if self.adjacency is None:
                erros.append("flavor gcn exige a matriz de adjacência normalizada")
            else:
                A = np.array(self.adjacency, dtype=np.float64)
                if A.ndim != 2 or A.shape[0] != A.shape[1]:
                    erros.append(f"adjacência deve ser quadrada, recebido {A.shape}")
                else:
                    A.flags.writeable = False
                    object.__setattr__(self, "adjacency", A)
        if erros:
            raise InvalidArgumentError("; ".join(erros))

    @property
    def dims(self) -> list[int]:
        return [self.layers[0].rows] + [c.cols for c in self.layers]

    def omegas(self) -> list[np.ndarray]:
        return [c.Omega for c in self.layers]

    def with_omegas(self, omegas) -> BinaryNetwork:
        omegas = list(omegas)
        if len(omegas) != len(self.layers) or any(
            np.shape(o) != c.Omega.shape for o, c in zip(omegas, self.layers)
        ):
            raise InvalidArgumentError("formatos de Ω não correspondem à rede")
        return BinaryNetwork(
            tuple(BinaryLinearLayer(o) for o in omegas), self.head, self.flavor, self.adjacency
        )

    def binarized(self) -> BinaryNetwork:
        return self.with_omegas([c.W for c in self.layers])


def init_network(
    dims,
    rng: np.random.Generator,
    head: str = "bce",
    flavor: str = "mlp",
    adjacency: np.ndarray | None = None,
) -> BinaryNetwork:
    """Ω ~ U[−1, 1] em todas as camadas."""
    dims = list(dims)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise InvalidArgumentError(f"dimensões inválidas: {dims}")
    camadas = tuple(
        BinaryLinearLayer(rng.uniform(-1.0, 1.0, size=(dims[k], dims[k + 1])))
        for k in range(len(dims) - 1)
    )
    return BinaryNetwork(camadas, head, flavor, adjacency)


@dataclass(frozen=True)
class ForwardCache:
    weights: tuple[np.ndarray, ...]
    inputs: tuple[np.ndarray, ...]
    preacts: tuple[np.ndarray, ...]
    nodes: np.ndarray | None = None

    @property
    def logits(self) -> np.ndarray:
        if self.nodes is None:
            return self.preacts[-1]
        return self.preacts[-1][self.nodes]


@dataclass(frozen=True)
class LayerGradient:
    """Ṙ (|B| × m) e entrada da camada (|B| × n) nas mesmas linhas."""

    Rdot: np.ndarray
    layer_input: np.ndarray
    rows: np.ndarray


@dataclass(frozen=True)
class GradientBundle:
    layers: tuple[LayerGradient, ...]
    loss: float


# ------------------------------
# Cabeças
# ------------------------------
def _rotulos(head: str, labels, n_classes: int, n: int) -> np.ndarray:
    y = np.asarray(labels).reshape(-1)
    if y.shape[0] != n:
        raise InvalidArgumentError(f"{y.shape[0]} rótulos para {n} amostras")
    if not np.all((y >= 0) & (y < max(n_classes, 2)) & (y == np.round(y))):
        raise InvalidArgumentError("rótulos fora do conjunto de classes")
    return y.astype(np.int64)


def apply_head(head: str, logits: np.ndarray) -> np.ndarray:
    """bce: probabilidade sigmoid (B×1); nll: log-probabilidades (B×C)."""
    if head == "bce":
        return expit(logits)
    return log_softmax(logits, axis=1)


def head_loss_grad(head: str, logits: np.ndarray, labels) -> tuple[np.ndarray, np.ndarray]:
    """Perdas por amostra e ∂(Σ perdas)/∂logits."""
    y = _rotulos(head, labels, logits.shape[1], logits.shape[0])
    if head == "bce":
        z = logits[:, 0]
        perdas = np.logaddexp(0.0, z) - y * z
        grad = (expit(z) - y)[:, None]
    else:
        logp = log_softmax(logits, axis=1)
        perdas = -logp[np.arange(len(y)), y]
        grad = softmax(logits, axis=1)
        grad[np.arange(len(y)), y] -= 1.0
    return perdas, grad


def predict(head: str, logits: np.ndarray) -> np.ndarray:
    if head == "bce":
        return (logits[:, 0] >= 0).astype(np.int64)
    return np.argmax(logits, axis=1)


# ------------------------------
# Forward / backward
# ------------------------------
def forward(
    net: BinaryNetwork, X, *, nodes=None, binarize: bool = True
) -> tuple[np.ndarray, ForwardCache]:
    """
    MLP: X são as linhas do lote.
    GCN: X são as features de todos os nós; cada camada propaga Â·H e a saída
    fica restrita a `nodes` (todos os nós quando None).
    binarize=False usa Ω em ponto flutuante (ProxQuant).
    """
    H = np.asarray(X, dtype=np.float64)
    if H.ndim != 2 or H.shape[1] != net.layers[0].rows:
        raise InvalidArgumentError(
            f"entrada com formato {H.shape}, esperado (·, {net.layers[0].rows})"
        )

    gcn = net.flavor == "gcn"
    if gcn:
        if H.shape[0] != net.adjacency.shape[0]:
            raise InvalidArgumentError(
                f"GCN espera features de {net.adjacency.shape[0]} nós, recebido {H.shape[0]}"
            )
        if nodes is not None:
            nodes = np.asarray(nodes, dtype=np.int64).reshape(-1)
            if nodes.size == 0 or nodes.min() < 0 or nodes.max() >= H.shape[0]:
                raise InvalidArgumentError("índices de nós fora do grafo")
    elif nodes is not None:
        raise InvalidArgumentError("`nodes` só se aplica ao flavor gcn")

    pesos = tuple(c.W if binarize else c.Omega for c in net.layers)
    entradas, preativ = [], []
    for k, W in enumerate(pesos):
        entrada = net.adjacency @ H if gcn else H
        R = entrada @ W
        entradas.append(entrada)
        preativ.append(R)
        if k < len(pesos) - 1:
            H = hard_tanh(R)

    cache = ForwardCache(pesos, tuple(entradas), tuple(preativ), nodes)
    return apply_head(net.head, cache.logits), cache


def batch_loss(net: BinaryNetwork, cache: ForwardCache, labels) -> float:
    perdas, _ = head_loss_grad(net.head, cache.logits, labels)
    return float(perdas.mean())


def backward(net: BinaryNetwork, cache: ForwardCache | None, labels) -> GradientBundle:
    if cache is None:
        raise StateError("backward chamado sem cache de forward")
    if len(cache.weights) != len(net.layers) or any(
        W.shape != c.Omega.shape for W, c in zip(cache.weights, net.layers)
    ):
        raise StateError("cache de forward não corresponde à rede")

    perdas, dZ = head_loss_grad(net.head, cache.logits, labels)
    L = len(net.layers)

    if net.flavor != "gcn":
        Rdot = [None] * L
        Rdot[-1] = dZ
        for k in range(L - 1, 0, -1):
            Rdot[k - 1] = (Rdot[k] @ cache.weights[k].T) * hard_tanh_grad(cache.preacts[k - 1])
        linhas = np.arange(dZ.shape[0])
        camadas = tuple(
            LayerGradient(Rdot[k], cache.inputs[k], linhas) for k in range(L)
        )
        return GradientBundle(camadas, float(perdas.mean()))

    # GCN: gradiente em todos os nós, depois restrito às linhas relevantes
    N = net.adjacency.shape[0]
    nodes = cache.nodes if cache.nodes is not None else np.arange(N)
    Rdot = [None] * L
    Rdot[-1] = np.zeros((N, dZ.shape[1]))
    np.add.at(Rdot[-1], nodes, dZ)
    for k in range(L - 1, 0, -1):
        dH = net.adjacency.T @ (Rdot[k] @ cache.weights[k].T)
        Rdot[k - 1] = dH * hard_tanh_grad(cache.preacts[k - 1])

    camadas = []
    for k in range(L):
        lote = list(dict.fromkeys(nodes.tolist()))
        no_lote = set(lote)
        outros = [i for i in np.flatnonzero(np.any(Rdot[k] != 0.0, axis=1)) if i not in no_lote]
        linhas = np.array(lote + sorted(int(i) for i in outros), dtype=np.int64)
        camadas.append(LayerGradient(Rdot[k][linhas], cache.inputs[k][linhas], linhas))
    return GradientBundle(tuple(camadas), float(perdas.mean()))


def weight_gradients(bundle: GradientBundle) -> list[np.ndarray]:
    """∂E/∂Ω por camada via STE: entradaᵀ · Ṙ."""
    return [g.layer_input.T @ g.Rdot for g in bundle.layers]


def evaluate(net: BinaryNetwork, X, labels, *, nodes=None) -> tuple[float, float]:
    """(perda média, acurácia) com W = sign(Ω)."""
    _, cache = forward(net, X, nodes=nodes)
    y = np.asarray(labels).reshape(-1)
    perda = batch_loss(net, cache, y)
    acuracia = float(np.mean(predict(net.head, cache.logits) == y))
    return perda, acuracia


# ------------------------------
# Checkpoint
# ------------------------------
def network_to_dict(net: BinaryNetwork) -> dict:
    return {
        "layers": [
            {"rows": c.rows, "cols": c.cols, "omega": c.Omega.reshape(-1).tolist()}
            for c in net.layers
        ],
        "flavor": net.flavor,
        "head": net.head,
    }


def network_from_dict(dados: dict, adjacency: np.ndarray | None = None) -> BinaryNetwork:
    try:
        camadas = tuple(
            BinaryLinearLayer(
                np.asarray(c["omega"], dtype=np.float64).reshape(int(c["rows"]), int(c["cols"]))
            )
            for c in dados["layers"]
        )
        return BinaryNetwork(camadas, dados["head"], dados["flavor"], adjacency)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InvalidArgumentError):
            raise
        raise FormatError(f"checkpoint inválido: {e}") from e


def save_checkpoint(net: BinaryNetwork, caminho) -> Path:
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    caminho.write_text(json.dumps(network_to_dict(net)), encoding="utf-8")
    logger.debug("checkpoint salvo em %s", caminho)
    return caminho


def load_checkpoint(caminho, adjacency: np.ndarray | None = None) -> BinaryNetwork:
    caminho = Path(caminho)
    try:
        dados = json.loads(caminho.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"não foi possível ler o checkpoint {caminho}: {e}") from e
    return network_from_dict(dados, adjacency)
