"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : blobs sintéticos, UCI Adult (a1a), MNIST com features de 16 retas e Karate club
Tipo            : dados
Módulo          : datasets
ID              : QPSBGD.DADOS.001
"""

from __future__ import annotations

import gzip
import itertools
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np
import pandas as pd

from qpsbgd.errors import FormatError, InvalidArgumentError, ParseError
from qpsbgd.net import normalize_adjacency

logger = logging.getLogger(__name__)

ADULT_DIM = 123
N_LINHAS = 16
LIMIAR_KEYPOINT = 0.5
MAGIC_IMAGENS = 2051
MAGIC_ROTULOS = 2049

# partição em 4 comunidades do Karate club, por índice de nó
KARATE_ROTULOS = (
    1, 1, 1, 1, 3, 3, 3, 1, 0, 1, 3, 1, 1, 1, 0, 0, 3,
    1, 0, 1, 0, 1, 0, 0, 2, 2, 0, 0, 2, 0, 0, 2, 0, 0,
)
KARATE_BITS = 6
KARATE_TREINO = 20
KARATE_POR_CLASSE = 5


# ------------------------------
# Tipos
# ------------------------------
@dataclass(frozen=True)
class TabularDataset:
    X: np.ndarray
    y: np.ndarray
    train: np.ndarray
    test: np.ndarray
    seed: int = 0
    classes: tuple[int, ...] = (0, 1)
    name: str = ""

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        train = np.asarray(self.train, dtype=np.int64).reshape(-1)
        test = np.asarray(self.test, dtype=np.int64).reshape(-1)
        erros = []
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            erros.append(f"X {X.shape} e y {y.shape} incompatíveis")
        if not np.isin(y, self.classes).all():
            erros.append(f"rótulos fora de {self.classes}")
        if np.intersect1d(train, test).size:
            erros.append("treino e teste se sobrepõem")
        if erros:
            raise InvalidArgumentError("; ".join(erros))
        for nome, valor in (("X", X), ("y", y), ("train", train), ("test", test)):
            object.__setattr__(self, nome, valor)

    def split(self, nome: str) -> tuple[np.ndarray, np.ndarray]:
        idx = self.train if nome == "train" else self.test
        return self.X[idx], self.y[idx]

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.X, columns=[f"x{j}" for j in range(self.X.shape[1])])
        df["y"] = self.y
        df["split"] = ""
        df.loc[self.train, "split"] = "train"
        df.loc[self.test, "split"] = "test"
        return df


@dataclass(frozen=True)
class GraphDataset:
    A: np.ndarray
    X: np.ndarray
    y: np.ndarray
    train: np.ndarray
    test: np.ndarray
    seed: int = 0
    classes: tuple[int, ...] = (0, 1, 2, 3)
    name: str = ""
    A_hat: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        erros = []
        if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.array_equal(A, A.T):
            erros.append("adjacência deve ser quadrada e simétrica")
        elif np.any(np.diag(A) != 0):
            erros.append("adjacência com laços")
        if np.intersect1d(self.train, self.test).size:
            erros.append("treino e teste se sobrepõem")
        if erros:
            raise InvalidArgumentError("; ".join(erros))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "X", np.asarray(self.X, dtype=np.float64))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.int64))
        object.__setattr__(self, "train", np.asarray(self.train, dtype=np.int64))
        object.__setattr__(self, "test", np.asarray(self.test, dtype=np.int64))
        object.__setattr__(self, "A_hat", normalize_adjacency(A))

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.X, columns=[f"x{j}" for j in range(self.X.shape[1])])
        df.insert(0, "node", np.arange(self.X.shape[0]))
        df["y"] = self.y
        df["split"] = ""
        df.loc[self.train, "split"] = "train"
        df.loc[self.test, "split"] = "test"
        df["neighbors"] = [
            " ".join(str(j) for j in np.flatnonzero(linha)) for linha in self.A
        ]
        return df


def _split_semente(n: int, frac_treino: float, rng: np.random.Generator):
    perm = rng.permutation(n)
    corte = int(round(frac_treino * n))
    return np.sort(perm[:corte]), np.sort(perm[corte:])


# ------------------------------
# Blobs
# ------------------------------
def _separavel_binario(X: np.ndarray, y: np.ndarray, margem: float) -> bool:
    alvo = np.where(y == 1, 1.0, -1.0)
    for w in itertools.product((-1.0, 1.0), repeat=X.shape[1]):
        if np.all(alvo * (X @ np.array(w)) > margem):
            return True
    return False


def make_blobs(
    seed: int,
    n_samples: int = 200,
    centro: float = 2.0,
    desvio: float = 0.6,
    margem: float = 0.1,
    frac_treino: float = 0.8,
) -> TabularDataset:
    """
    Duas nuvens gaussianas em ±(centro, centro), rótulos 1 e 0, com a coluna de
    intercepto 1 anexada. Reamostra até existir w ∈ {±1}³ separando com margem.
    """
    if n_samples < 2 or n_samples % 2:
        raise InvalidArgumentError(f"n_samples deve ser par e ≥ 2, recebido {n_samples}")

    rng = np.random.default_rng(seed)
    metade = n_samples // 2
    for tentativa in itertools.count(1):
        pos = rng.normal(loc=centro, scale=desvio, size=(metade, 2))
        neg = rng.normal(loc=-centro, scale=desvio, size=(metade, 2))
        X = np.hstack([np.vstack([pos, neg]), np.ones((n_samples, 1))])
        y = np.concatenate([np.ones(metade, dtype=np.int64), np.zeros(metade, dtype=np.int64)])
        if _separavel_binario(X, y, margem):
            break
        if tentativa >= 1000:
            raise InvalidArgumentError("não foi possível gerar blobs separáveis; aumente `centro`")

    train, test = _split_semente(n_samples, frac_treino, rng)
    logger.info("blobs gerados (seed=%d, tentativas=%d)", seed, tentativa)
    return TabularDataset(X, y, train, test, seed, (0, 1), "blobs")


# ------------------------------
# Adult (svmlight)
# ------------------------------
def read_svmlight(caminho, dim: int = ADULT_DIM) -> tuple[np.ndarray, np.ndarray]:
    """Features presentes -> +1, ausentes -> −1; rótulo +1 -> 1, −1 -> 0. Índices base 1."""
    caminho = Path(caminho)
    try:
        linhas = caminho.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FormatError(f"não foi possível ler {caminho}: {e}") from e

    X, y = [], []
    for num, linha in enumerate(linhas, start=1):
        partes = linha.split("#", 1)[0].split()
        if not partes:
            continue
        try:
            rotulo = float(partes[0])
        except ValueError:
            raise ParseError(f"rótulo inválido {partes[0]!r}", num, str(caminho)) from None
        if rotulo not in (1.0, -1.0, 0.0):
            raise ParseError(f"rótulo fora de {{-1, +1}}: {partes[0]!r}", num, str(caminho))

        x = -np.ones(dim)
        for item in partes[1:]:
            idx, sep, val = item.partition(":")
            try:
                j, v = int(idx), float(val)
            except ValueError:
                raise ParseError(f"par índice:valor inválido {item!r}", num, str(caminho)) from None
            if not sep or not 1 <= j <= dim:
                raise ParseError(f"índice {idx} fora de [1, {dim}]", num, str(caminho))
            if v != 0.0:
                x[j - 1] = 1.0
        X.append(x)
        y.append(1 if rotulo > 0 else 0)

    if not X:
        raise FormatError(f"arquivo sem amostras: {caminho}")
    return np.array(X), np.array(y, dtype=np.int64)


def load_adult(
    path,
    *,
    n_features: int | None = None,
    feature_indices=None,
    seed: int = 0,
    dim: int = ADULT_DIM,
) -> TabularDataset:
    """
    `path` é a pasta com a1a e a1a.t, ou o arquivo de treino (teste = mesmo nome + ".t").
    Subconjunto de features: `feature_indices` (colunas base 0) ou `n_features`
    sorteadas com a semente.
    """
    path = Path(path)
    treino_arq = path / "a1a" if path.is_dir() else path
    teste_arq = treino_arq.with_name(treino_arq.name + ".t")

    X_tr, y_tr = read_svmlight(treino_arq, dim)
    X_te, y_te = read_svmlight(teste_arq, dim)
    X = np.vstack([X_tr, X_te])
    y = np.concatenate([y_tr, y_te])

    if feature_indices is not None:
        colunas = np.asarray(list(feature_indices), dtype=np.int64)
        if colunas.size == 0 or colunas.min() < 0 or colunas.max() >= dim:
            raise InvalidArgumentError(f"feature_indices fora de [0, {dim})")
        X = X[:, colunas]
    elif n_features is not None:
        if not 1 <= n_features <= dim:
            raise InvalidArgumentError(f"n_features deve estar em [1, {dim}]")
        colunas = np.sort(np.random.default_rng(seed).choice(dim, size=n_features, replace=False))
        X = X[:, colunas]

    train = np.arange(len(y_tr))
    test = np.arange(len(y_tr), len(y))
    logger.info("Adult carregado: %d treino, %d teste, %d features", len(train), len(test), X.shape[1])
    return TabularDataset(X, y, train, test, seed, (0, 1), "adult")


# ------------------------------
# MNIST
# ------------------------------
def _abrir(caminho: Path):
    with open(caminho, "rb") as f:
        inicio = f.read(2)
    return gzip.open(caminho, "rb") if inicio == b"\x1f\x8b" else open(caminho, "rb")


def read_idx(caminho, magic_esperado: int) -> np.ndarray:
    """Arquivo IDX big-endian (opcionalmente gzip) com dados unsigned byte."""
    caminho = Path(caminho)
    try:
        with _abrir(caminho) as f:
            dados = f.read()
    except OSError as e:
        raise FormatError(f"não foi possível ler {caminho}: {e}") from e

    if len(dados) < 4:
        raise FormatError(f"{caminho}: arquivo IDX truncado")
    (magic,) = struct.unpack(">I", dados[:4])
    if magic != magic_esperado:
        raise FormatError(f"{caminho}: magic {magic}, esperado {magic_esperado}")

    ndim = magic & 0xFF
    cabecalho = 4 + 4 * ndim
    if len(dados) < cabecalho:
        raise FormatError(f"{caminho}: cabeçalho IDX truncado")
    forma = struct.unpack(f">{ndim}I", dados[4:cabecalho])
    corpo = np.frombuffer(dados, dtype=np.uint8, offset=cabecalho)
    if corpo.size != int(np.prod(forma)):
        raise FormatError(f"{caminho}: {corpo.size} bytes de dados, esperado {int(np.prod(forma))}")
    return corpo.reshape(forma)


def read_idx_images(caminho) -> np.ndarray:
    return read_idx(caminho, MAGIC_IMAGENS)


def read_idx_labels(caminho) -> np.ndarray:
    return read_idx(caminho, MAGIC_ROTULOS)


def _normais() -> np.ndarray:
    theta = np.arange(N_LINHAS) * np.pi / N_LINHAS + np.pi / 2
    return np.column_stack([np.cos(theta), np.sin(theta)])


def line_features(imagem) -> np.ndarray:
    """
    16 retas pelo centróide (ponderado pela intensidade); feature k = +1 quando o
    semiplano positivo da reta k tem ao menos tantos keypoints quanto o negativo.
    Coordenadas (x = coluna, y = linha).
    """
    img = np.asarray(imagem, dtype=np.float64)
    maximo = img.max()
    if maximo <= 0:
        return np.ones(N_LINHAS, dtype=np.int8)
    img = img / maximo

    linhas, colunas = np.indices(img.shape)
    total = img.sum()
    centroide = np.array([(img * colunas).sum() / total, (img * linhas).sum() / total])

    kp = img > LIMIAR_KEYPOINT
    pontos = np.column_stack([colunas[kp], linhas[kp]]) - centroide
    d = pontos @ _normais().T
    pos = (d > 0).sum(axis=0)
    neg = (d < 0).sum(axis=0)
    return np.where(pos >= neg, 1, -1).astype(np.int8)


def mnist_line_features(
    images,
    labels,
    digit_pair: tuple[int, int],
    seed: int,
    n_train: int = 500,
    n_test: int = 3000,
) -> TabularDataset:
    """Classe 0 = primeiro dígito do par, classe 1 = segundo."""
    a, b = (int(d) for d in digit_pair)
    if a == b or not (0 <= a <= 9 and 0 <= b <= 9):
        raise InvalidArgumentError(f"par de dígitos inválido: {digit_pair}")
    images = np.asarray(images)
    labels = np.asarray(labels).reshape(-1)
    if images.ndim != 3 or images.shape[0] != labels.shape[0]:
        raise InvalidArgumentError("imagens e rótulos incompatíveis")

    candidatos = np.flatnonzero((labels == a) | (labels == b))
    total = n_train + n_test
    if candidatos.size < total:
        raise InvalidArgumentError(
            f"apenas {candidatos.size} imagens dos dígitos {a}/{b}, necessárias {total}"
        )

    rng = np.random.default_rng(seed)
    escolhidos = rng.permutation(candidatos)[:total]
    X = np.array([line_features(images[i]) for i in escolhidos], dtype=np.float64)
    y = (labels[escolhidos] == b).astype(np.int64)
    logger.info("MNIST %d/%d: %d treino, %d teste", a, b, n_train, n_test)
    return TabularDataset(
        X, y, np.arange(n_train), np.arange(n_train, total), seed, (0, 1), f"mnist_{a}{b}"
    )


def _arquivo_mnist(pasta: Path, nome: str) -> Path:
    for candidato in (pasta / nome, pasta / f"{nome}.gz"):
        if candidato.exists():
            return candidato
    raise FormatError(f"arquivo MNIST não encontrado: {pasta / nome}[.gz]")


def load_mnist(pasta, digit_pair, seed: int, n_train: int = 500, n_test: int = 3000) -> TabularDataset:
    pasta = Path(pasta)
    images = read_idx_images(_arquivo_mnist(pasta, "train-images-idx3-ubyte"))
    labels = read_idx_labels(_arquivo_mnist(pasta, "train-labels-idx1-ubyte"))
    return mnist_line_features(images, labels, digit_pair, seed, n_train, n_test)


# ------------------------------
# Karate club
# ------------------------------
def binary_code(indice: int, bits: int = KARATE_BITS) -> np.ndarray:
    """Código binário do índice (bit mais significativo primeiro) mapeado para ±1."""
    return np.array([1.0 if (indice >> (bits - 1 - k)) & 1 else -1.0 for k in range(bits)])


def karate_club(seed: int = 0) -> GraphDataset:
    """
    Treino: até 5 nós por classe (sempre deixando um para teste), completado
    até 20 por sorteio; teste: os 14 restantes.
    """
    G = nx.karate_club_graph()
    n = G.number_of_nodes()
    A = nx.to_numpy_array(G, nodelist=range(n), weight=None)
    y = np.array(KARATE_ROTULOS, dtype=np.int64)
    X = np.array([binary_code(i) for i in range(n)])

    rng = np.random.default_rng(seed)
    treino = []
    for c in range(4):
        nos = np.flatnonzero(y == c)
        k = min(KARATE_POR_CLASSE, nos.size - 1)
        treino.extend(rng.choice(nos, size=k, replace=False).tolist())
    restantes = np.setdiff1d(np.arange(n), treino)
    falta = KARATE_TREINO - len(treino)
    if falta > 0:
        treino.extend(rng.choice(restantes, size=falta, replace=False).tolist())

    train = np.sort(np.array(treino, dtype=np.int64))
    test = np.setdiff1d(np.arange(n), train)
    return GraphDataset(A, X, y, train, test, seed, (0, 1, 2, 3), "karate")


def dump_csv(ds: TabularDataset | GraphDataset, caminho) -> Path:
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    ds.to_frame().to_csv(caminho, index=False, float_format="%.10g")
    return caminho
