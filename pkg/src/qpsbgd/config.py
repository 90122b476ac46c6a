"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : carga de variáveis do .env, banco de resultados e banner da execução
Tipo            : utils
Módulo          : config
ID              : QPSBGD.CFG.001
"""

import os

from dotenv import find_dotenv, load_dotenv
from sqlalchemy import create_engine
from sqlalchemy.engine import Engine

from qpsbgd.errors import ConfigError

PADROES = {
    "SAMPLER_NUM_READS": "100",
    "SAMPLER_TIMEOUT": "30",
    "DATA_DIR": "data",
    "OUT_DIR": "Arquivos",
    "EXHAUSTIVE_CAP": "24",
}


def carregar_cfg() -> dict:
    load_dotenv(find_dotenv(usecwd=True))

    cfg = {
        chave: (os.getenv(chave) or PADROES.get(chave, "")).strip()
        for chave in (
            "AMBIENTE",
            "SAMPLER_URL",
            "SAMPLER_TOKEN",
            "SAMPLER_NUM_READS",
            "SAMPLER_TIMEOUT",
            "RESULTS_DB_URL",
            "DATA_DIR",
            "OUT_DIR",
            "EXHAUSTIVE_CAP",
        )
    }

    invalidos = []
    for chave, tipo in (
        ("SAMPLER_NUM_READS", int),
        ("SAMPLER_TIMEOUT", float),
        ("EXHAUSTIVE_CAP", int),
    ):
        try:
            cfg[chave] = tipo(cfg[chave])
        except ValueError:
            invalidos.append(f"{chave}: valor inválido {cfg[chave]!r}")
    if invalidos:
        raise ConfigError(invalidos)

    return cfg


def exigir_cfg(cfg: dict, chaves) -> None:
    faltando = [k for k in chaves if not cfg.get(k)]
    if faltando:
        raise ConfigError(f"Variáveis ausentes no .env: {', '.join(faltando)}")


def get_engine(cfg: dict | None = None, url: str | None = None) -> Engine:
    if url is None:
        cfg = cfg if cfg is not None else carregar_cfg()
        exigir_cfg(cfg, ("RESULTS_DB_URL",))
        url = cfg["RESULTS_DB_URL"]

    return create_engine(url, pool_pre_ping=True)


# =========================
# BANNER DA EXECUÇÃO
# =========================

RESET = "\033[0m"
AMARELO = "\033[93m"
VERDE = "\033[92m"


def descrever_solver(otimizador, cfg: dict) -> str:
    """Resumo do solver QUBO de um `OptimizerConfig`; '-' quando o otimizador não usa QUBO."""
    if otimizador.kind != "qpsbgd":
        return "-"
    s = otimizador.solver
    if s.kind == "exhaustive":
        return f"exaustivo (até {s.cap or cfg.get('EXHAUSTIVE_CAP') or PADROES['EXHAUSTIVE_CAP']} bits)"
    if s.kind == "sa":
        return f"SA ({s.sweeps} varreduras x {s.restarts} reinícios)"
    return f"remoto {s.base_url or cfg.get('SAMPLER_URL') or '(sem SAMPLER_URL)'}"


def obter_info_ambiente(cfg: dict, execucoes=()) -> dict:
    """
    Campos do banner: destino dos resultados e, por `ExperimentConfig` em
    `execucoes`, dataset, otimizador, solver e sementes. A cor fica amarela
    quando alguma execução depende do amostrador remoto.
    """
    linhas = [
        {
            "nome": e.name,
            "dataset": e.dataset.kind,
            "otimizador": e.optimizer.kind,
            "solver": descrever_solver(e.optimizer, cfg),
            "sementes": list(e.seeds),
        }
        for e in execucoes
    ]
    remoto = any(linha["solver"].startswith("remoto") for linha in linhas)

    return {
        "ambiente": cfg.get("AMBIENTE") or "(não informado)",
        "saida": cfg.get("OUT_DIR") or PADROES["OUT_DIR"],
        "banco": cfg.get("RESULTS_DB_URL") or "(desativado)",
        "execucoes": linhas,
        "cor": AMARELO if remoto else VERDE,
    }


def exibir_info_ambiente_console(cfg: dict | None = None, execucoes=()) -> None:
    info = obter_info_ambiente(cfg if cfg is not None else carregar_cfg(), execucoes)

    print(info["cor"] + "=" * 60)
    print(f"Ambiente: {info['ambiente']}")
    print(f"Saída:    {info['saida']}")
    print(f"Banco:    {info['banco']}")
    for ex in info["execucoes"]:
        print(f"- {ex['nome']}: {ex['dataset']} | {ex['otimizador']} | solver {ex['solver']} | sementes {ex['sementes']}")
    print("=" * 60 + RESET)
