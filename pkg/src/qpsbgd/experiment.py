"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : configuração declarativa de experimentos e laço de treino por semente
Tipo            : orquestração
Módulo          : experiment
ID              : QPSBGD.EXP.001
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import threading
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from contextlib import ExitStack
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from qpsbgd.annealer_client import RemoteSolver, SamplerEndpoint
from qpsbgd.config import carregar_cfg, get_engine
from qpsbgd.datasets import (
    ADULT_DIM,
    GraphDataset,
    TabularDataset,
    karate_club,
    load_adult,
    load_mnist,
    make_blobs,
)
from qpsbgd.diagnostics import cdp_contagens, pool_tallies
from qpsbgd.errors import ConfigError, EmptyTallyError, QpsbgdError
from qpsbgd.net import BinaryNetwork, evaluate, init_network, save_checkpoint
from qpsbgd.optim import ALPHA_PADRAO, KINDS, LAMBDA0_PADRAO, Batch, OptimizerState, full_batch_oracle
from qpsbgd.qubo import AnnealingSolver, ExhaustiveSolver, QuboSolver, SaParams
from qpsbgd.relatorio import COLUNAS_METRICAS, garantir_pasta, salvar_sql

logger = logging.getLogger(__name__)

DATASETS = ("blobs", "adult", "mnist", "karate")
SOLVERS = ("exhaustive", "sa", "remote")
FORMATO_FLOAT = "%.8f"
DIM_ENTRADA = {"blobs": 3, "mnist": 16, "karate": 6}
N_CLASSES = {"blobs": 2, "adult": 2, "mnist": 2, "karate": 4}


# ------------------------------
# Configuração
# ------------------------------
@dataclass(frozen=True)
class DatasetConfig:
    kind: str = "blobs"
    path: str | None = None
    digit_pair: tuple[int, int] = (1, 7)
    n_features: int | None = None
    feature_indices: tuple[int, ...] | None = None
    n_train: int = 500
    n_test: int = 3000
    n_samples: int = 200

    def input_dim(self) -> int:
        if self.kind == "adult":
            if self.feature_indices is not None:
                return len(self.feature_indices)
            return self.n_features or ADULT_DIM
        return DIM_ENTRADA.get(self.kind, 0)


@dataclass(frozen=True)
class ArchitectureConfig:
    dims: tuple[int, ...] = (3, 1)
    flavor: str = "mlp"
    head: str = "bce"


@dataclass(frozen=True)
class SolverConfig:
    kind: str = "exhaustive"
    cap: int | None = None
    sweeps: int = 1000
    restarts: int = 32
    t_hot: float | None = None
    t_cold: float = 1e-3
    workers: int = 1
    base_url: str | None = None
    auth_token: str | None = None
    num_reads: int | None = None
    timeout: float | None = None


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "qpsbgd"
    alpha: float | None = None
    lambda0: float = LAMBDA0_PADRAO
    workers: int = 1
    solver: SolverConfig = field(default_factory=SolverConfig)

    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        if self.kind == "qpsbgd" and self.solver.kind == "remote":
            return ALPHA_PADRAO["qpsbgd_remote"]
        return ALPHA_PADRAO[self.kind]


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experimento"
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    architecture: ArchitectureConfig = field(default_factory=ArchitectureConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    batch_size: int = 10
    epochs: int = 10
    batches_per_epoch: int | None = None
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    metrics_path: str = "Arquivos/metricas.csv"
    checkpoint_dir: str | None = None
    steps_path: str | None = None
    cdp_path: str | None = None
    results_db_url: str | None = None
    seed_workers: int = 1

    def validate(self) -> ExperimentConfig:
        """Levanta ConfigError com todos os campos violados."""
        erros = []
        d, a, o = self.dataset, self.architecture, self.optimizer

        if d.kind not in DATASETS:
            erros.append(f"dataset.kind: deve ser um de {DATASETS}")
        if d.kind == "mnist" and (len(d.digit_pair) != 2 or d.digit_pair[0] == d.digit_pair[1]):
            erros.append("dataset.digit_pair: dois dígitos distintos")
        if d.n_train < 1 or d.n_test < 1:
            erros.append("dataset.n_train/n_test: devem ser ≥ 1")

        dims = list(a.dims)
        if len(dims) < 2 or any(int(x) < 1 for x in dims):
            erros.append("architecture.dims: ao menos duas dimensões ≥ 1")
        elif d.kind in DATASETS:
            if dims[0] != d.input_dim():
                erros.append(f"architecture.dims: entrada {dims[0]}, dataset fornece {d.input_dim()}")
            saida = 1 if a.head == "bce" else N_CLASSES[d.kind]
            if a.head in ("bce", "nll") and dims[-1] != saida:
                erros.append(f"architecture.dims: saída {dims[-1]}, head {a.head} exige {saida}")
        if a.head not in ("bce", "nll"):
            erros.append("architecture.head: bce ou nll")
        if a.flavor not in ("mlp", "gcn"):
            erros.append("architecture.flavor: mlp ou gcn")
        elif (a.flavor == "gcn") != (d.kind == "karate"):
            erros.append("architecture.flavor: gcn somente com o dataset karate")

        if o.kind not in KINDS:
            erros.append(f"optimizer.kind: deve ser um de {KINDS}")
        if o.alpha is not None and not o.alpha > 0:
            erros.append("optimizer.alpha: deve ser > 0")
        if o.lambda0 < 0:
            erros.append("optimizer.lambda0: deve ser ≥ 0")
        if o.workers < 1:
            erros.append("optimizer.workers: deve ser ≥ 1")
        s = o.solver
        if s.kind not in SOLVERS:
            erros.append(f"optimizer.solver.kind: deve ser um de {SOLVERS}")
        if s.kind == "sa" and (s.sweeps < 1 or s.restarts < 1 or s.workers < 1):
            erros.append("optimizer.solver: sweeps, restarts e workers devem ser ≥ 1")
        if s.kind == "sa" and not s.t_cold > 0:
            erros.append("optimizer.solver.t_cold: deve ser > 0")

        if self.batch_size < 1:
            erros.append("batch_size: deve ser ≥ 1")
        if self.epochs < 0:
            erros.append("epochs: deve ser ≥ 0")
        if self.batches_per_epoch is not None and self.batches_per_epoch < 1:
            erros.append("batches_per_epoch: deve ser ≥ 1")
        if not self.seeds:
            erros.append("seeds: lista não pode ser vazia")
        if len(set(self.seeds)) != len(self.seeds):
            erros.append("seeds: valores repetidos")
        if self.seed_workers < 1:
            erros.append("seed_workers: deve ser ≥ 1")
        if not self.metrics_path:
            erros.append("metrics_path: obrigatório")

        if erros:
            raise ConfigError(erros)
        return self


def _construir(tipo, dados: dict, prefixo: str, erros: list):
    if not isinstance(dados, dict):
        erros.append(f"{prefixo or 'config'}: deve ser um objeto JSON")
        return tipo()
    conhecidos = {f.name: f for f in dataclasses.fields(tipo)}
    kwargs = {}
    for chave, valor in dados.items():
        if chave not in conhecidos:
            erros.append(f"{prefixo}{chave}: campo desconhecido")
            continue
        aninhado = {
            "dataset": DatasetConfig,
            "architecture": ArchitectureConfig,
            "optimizer": OptimizerConfig,
            "solver": SolverConfig,
        }.get(chave)
        if aninhado is not None:
            valor = _construir(aninhado, valor, f"{prefixo}{chave}.", erros)
        elif isinstance(valor, list):
            valor = tuple(valor)
        kwargs[chave] = valor
    return tipo(**kwargs)


def config_from_dict(dados: dict) -> ExperimentConfig:
    erros: list[str] = []
    cfg = _construir(ExperimentConfig, dados, "", erros)
    if erros:
        raise ConfigError(erros)
    return cfg.validate()


def load_config(caminho) -> ExperimentConfig:
    caminho = Path(caminho)
    try:
        dados = json.loads(caminho.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"não foi possível ler {caminho}: {e}") from e
    return config_from_dict(dados)


def with_overrides(
    cfg: ExperimentConfig,
    *,
    seed: int | None = None,
    solver: str | None = None,
    epochs: int | None = None,
    alpha: float | None = None,
    metrics_path: str | None = None,
) -> ExperimentConfig:
    mudancas = {}
    if seed is not None:
        mudancas["seeds"] = (seed,)
    if epochs is not None:
        mudancas["epochs"] = epochs
    if metrics_path is not None:
        mudancas["metrics_path"] = metrics_path
    otim = cfg.optimizer
    if solver is not None:
        otim = dataclasses.replace(otim, solver=dataclasses.replace(otim.solver, kind=solver))
    if alpha is not None:
        otim = dataclasses.replace(otim, alpha=alpha)
    return dataclasses.replace(cfg, optimizer=otim, **mudancas).validate()


# ------------------------------
# Fábricas
# ------------------------------
def make_solver(scfg: SolverConfig, seed: int, env: dict | None = None) -> QuboSolver:
    if scfg.kind == "exhaustive":
        cap = scfg.cap if scfg.cap is not None else int((env or {}).get("EXHAUSTIVE_CAP") or 24)
        return ExhaustiveSolver(cap)
    if scfg.kind == "sa":
        params = SaParams(scfg.sweeps, scfg.restarts, scfg.t_hot, scfg.t_cold, scfg.workers)
        return AnnealingSolver(params, seed)

    env = env if env is not None else carregar_cfg()
    if scfg.base_url:
        endpoint = SamplerEndpoint(
            base_url=scfg.base_url,
            auth_token=scfg.auth_token or env.get("SAMPLER_TOKEN") or None,
            num_reads=scfg.num_reads or int(env.get("SAMPLER_NUM_READS") or 100),
            timeout=scfg.timeout or float(env.get("SAMPLER_TIMEOUT") or 30.0),
        )
    else:
        endpoint = SamplerEndpoint.from_cfg(env)
    return RemoteSolver(endpoint)


def load_dataset(dcfg: DatasetConfig, seed: int, data_dir="data") -> TabularDataset | GraphDataset:
    if dcfg.kind == "blobs":
        return make_blobs(seed, n_samples=dcfg.n_samples)
    if dcfg.kind == "adult":
        return load_adult(
            dcfg.path or Path(data_dir) / "adult",
            n_features=dcfg.n_features,
            feature_indices=dcfg.feature_indices,
            seed=seed,
        )
    if dcfg.kind == "mnist":
        return load_mnist(
            dcfg.path or Path(data_dir) / "mnist", dcfg.digit_pair, seed, dcfg.n_train, dcfg.n_test
        )
    return karate_club(seed)


# ------------------------------
# Treino
# ------------------------------
@dataclass
class SeedResult:
    seed: int
    metrics: list[dict]
    steps: list[dict]
    cdp: list[dict]
    network: BinaryNetwork


@dataclass
class ExperimentResult:
    metrics: pd.DataFrame
    metrics_path: Path
    checkpoints: list[Path]
    steps_path: Path | None = None
    cdp: pd.DataFrame | None = None
    cdp_path: Path | None = None


def _lotes(treino: np.ndarray, tamanho: int, quantidade: int, rng: np.random.Generator):
    """Lotes sem reposição; uma nova permutação começa quando a anterior se esgota."""
    fila: list[int] = []
    for _ in range(quantidade):
        if len(fila) < tamanho:
            fila = rng.permutation(treino).tolist()
        lote, fila = fila[:tamanho], fila[tamanho:]
        yield np.array(lote, dtype=np.int64)


def _avaliar(net: BinaryNetwork, ds, seed: int, epoch: int) -> list[dict]:
    linhas = []
    for split, idx in (("train", ds.train), ("test", ds.test)):
        if isinstance(ds, GraphDataset):
            perda, acc = evaluate(net, ds.X, ds.y[idx], nodes=idx)
        else:
            perda, acc = evaluate(net, ds.X[idx], ds.y[idx])
        linhas.append({"seed": seed, "epoch": epoch, "split": split, "loss": perda, "accuracy": acc})
    return linhas


def run_seed(
    cfg: ExperimentConfig,
    seed: int,
    env: dict | None = None,
    cdp: bool = False,
    ao_passo: Callable[[list[dict]], None] | None = None,
) -> SeedResult:
    """`ao_passo` recebe as linhas de relatório de cada passo assim que ele termina."""
    env = env if env is not None else {}
    ds = load_dataset(cfg.dataset, seed, env.get("DATA_DIR") or "data")
    grafo = isinstance(ds, GraphDataset)

    rng_init, rng_lotes = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    a = cfg.architecture
    net = init_network(a.dims, rng_init, a.head, a.flavor, ds.A_hat if grafo else None)

    o = cfg.optimizer
    precisa_solver = o.kind == "qpsbgd" or cdp
    solver = make_solver(o.solver, seed, env or None) if precisa_solver else None
    estado = OptimizerState(o.kind, o.resolved_alpha(), solver, lambda0=o.lambda0, workers=o.workers)

    oraculo = None
    if cdp:
        if grafo:
            oraculo = full_batch_oracle(ds.X, ds.y[ds.train], ds.train)
        else:
            oraculo = full_batch_oracle(ds.X[ds.train], ds.y[ds.train])

    por_epoca = cfg.batches_per_epoch or math.ceil(len(ds.train) / cfg.batch_size)
    metricas = _avaliar(net, ds, seed, 0)
    passos: list[dict] = []
    linhas_cdp: list[dict] = []

    lotes = _lotes(ds.train, min(cfg.batch_size, len(ds.train)), por_epoca * cfg.epochs, rng_lotes)
    for epoch in range(1, cfg.epochs + 1):
        contagens = {"qpsbgd": [], "signsgd": []}
        for _ in range(por_epoca):
            idx = next(lotes)
            batch = Batch(ds.X, ds.y[idx], idx) if grafo else Batch(ds.X[idx], ds.y[idx])
            try:
                if cdp:
                    bundle_lote = full_batch_oracle(batch.X, batch.y, batch.nodes)(net)
                    try:
                        tallies = cdp_contagens(net, bundle_lote, oraculo(net), solver, t=estado.t + 1)
                    except EmptyTallyError:
                        logger.debug("passo %d sem coordenadas para o teste CDP", estado.t + 1)
                        tallies = {}
                    for metodo, tally in tallies.items():
                        contagens[metodo].append(tally)
                net, relatorio = estado.step(net, batch)
            except QpsbgdError as e:
                e.add_note(f"semente {seed}, época {epoch}")
                raise
            linhas = [{"seed": seed, **linha} for linha in relatorio]
            passos.extend(linhas)
            if ao_passo is not None and linhas:
                ao_passo(linhas)

        metricas.extend(_avaliar(net, ds, seed, epoch))
        if cdp:
            for metodo, tallies in contagens.items():
                if not tallies:
                    continue
                t = pool_tallies(tallies)
                linhas_cdp.append({"seed": seed, "epoch": epoch, "method": metodo, "k": t.k, "n": t.n, "z": t.z})
        logger.info(
            "semente %d época %d: perda treino %.4f, acurácia teste %.3f",
            seed, epoch, metricas[-2]["loss"], metricas[-1]["accuracy"],
        )

    return SeedResult(seed, metricas, passos, linhas_cdp, net)


def run_experiment(
    cfg: ExperimentConfig, env: dict | None = None, cdp: bool | None = None
) -> ExperimentResult:
    """
    Treina cada semente, grava o CSV de métricas (seed, epoch, split, loss, accuracy),
    um checkpoint JSON por semente e, quando configurados, os relatórios de passo
    (JSONL), a tabela CDP e a tabela SQL `metricas`.
    """
    cfg.validate()
    env = env if env is not None else carregar_cfg()
    cdp = bool(cfg.cdp_path) if cdp is None else cdp

    steps_path = Path(cfg.steps_path) if cfg.steps_path else None
    with ExitStack() as pilha:
        ao_passo = None
        if steps_path is not None:
            # uma linha por coluna, gravada assim que o passo termina
            garantir_pasta(steps_path.parent)
            arquivo = pilha.enter_context(steps_path.open("w", encoding="utf-8"))
            trava = threading.Lock()

            def ao_passo(linhas: list[dict]) -> None:
                with trava:
                    arquivo.writelines(json.dumps(linha) + "\n" for linha in linhas)
                    arquivo.flush()

        def rodar(seed: int) -> SeedResult:
            return run_seed(cfg, seed, env, cdp, ao_passo)

        if cfg.seed_workers > 1 and len(cfg.seeds) > 1:
            with ThreadPoolExecutor(max_workers=cfg.seed_workers) as executor:
                resultados = list(executor.map(rodar, cfg.seeds))
        else:
            resultados = [rodar(seed) for seed in cfg.seeds]
    resultados.sort(key=lambda r: r.seed)

    metrics = pd.DataFrame(
        [linha for r in resultados for linha in r.metrics], columns=COLUNAS_METRICAS
    )
    metrics_path = Path(cfg.metrics_path)
    garantir_pasta(metrics_path.parent)
    metrics.to_csv(metrics_path, index=False, float_format=FORMATO_FLOAT)

    pasta_ckpt = Path(cfg.checkpoint_dir) if cfg.checkpoint_dir else metrics_path.parent
    checkpoints = [
        save_checkpoint(r.network, pasta_ckpt / f"{cfg.name}_seed{r.seed}.json") for r in resultados
    ]

    tabela_cdp, cdp_path = None, None
    if cdp:
        tabela_cdp = pd.DataFrame(
            [linha for r in resultados for linha in r.cdp],
            columns=["seed", "epoch", "method", "k", "n", "z"],
        )
        if cfg.cdp_path:
            cdp_path = Path(cfg.cdp_path)
            garantir_pasta(cdp_path.parent)
            tabela_cdp.to_csv(cdp_path, index=False, float_format=FORMATO_FLOAT)

    url = cfg.results_db_url or env.get("RESULTS_DB_URL")
    if url:
        salvar_sql(metrics, get_engine(url=url), experimento=cfg.name)

    logger.info("métricas gravadas em %s", metrics_path)
    return ExperimentResult(metrics, metrics_path, checkpoints, steps_path, tabela_cdp, cdp_path)
