"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : gap espectral dos QUBOs de treino (camada de 1 contra 2 neurônios) em
                  lotes do Adult e similaridade de Jaccard das melhores amostras do recozimento
Tipo            : experimento
Módulo          : gap_espectral
ID              : QPSBGD.APP.005

Sem data/adult/a1a o estudo roda sobre lotes dos blobs e a planilha registra a fonte.
"""

import os
from pathlib import Path

import numpy as np
import pandas as pd

from qpsbgd.config import carregar_cfg, exibir_info_ambiente_console
from qpsbgd.datasets import TabularDataset, load_adult, make_blobs
from qpsbgd.diagnostics import compare_neuron_gaps, layer_qubo, sample_similarity, spectral_gap
from qpsbgd.errors import FormatError, QpsbgdError
from qpsbgd.net import backward, forward, init_network
from qpsbgd.qubo import SaParams, solve_sa
from qpsbgd.relatorio import garantir_pasta, salvar_excel

# 4 features ±1 dão pré-ativações pares: as linhas com pré-ativação 0 têm Ṙ não nulo
N_FEATURES_ADULT = 4
DIMS = {"adult": [N_FEATURES_ADULT, 4, 1], "blobs": [3, 4, 1]}
TAM_LOTE = 10
TOP_K = 4
SEMENTES_MINIMAS = 4


def limpar_console() -> None:
    os.system("cls" if os.name == "nt" else "clear")


nome_arquivo = os.path.splitext(os.path.basename(__file__))[0]


def carregar_adult(data_dir) -> TabularDataset | None:
    """Adult restrito às features mais equilibradas do treino; None sem os arquivos."""
    try:
        ds = load_adult(Path(data_dir) / "adult")
    except FormatError as e:
        print(f"Adult indisponível ({e}); usando blobs")
        return None
    equilibrio = np.abs(ds.X[ds.train].mean(axis=0))
    colunas = np.sort(np.argsort(equilibrio, kind="stable")[:N_FEATURES_ADULT])
    return TabularDataset(ds.X[:, colunas], ds.y, ds.train, ds.test, ds.seed, ds.classes, "adult")


def camada_do_lote(ds: TabularDataset, seed: int):
    """Entrada e Ṙ da primeira camada num lote sorteado com a semente."""
    rng = np.random.default_rng(seed)
    net = init_network(DIMS[ds.name], rng)
    idx = rng.choice(ds.train, size=TAM_LOTE, replace=False)
    _, cache = forward(net, ds.X[idx])
    camada = backward(net, cache, ds.y[idx]).layers[0]
    return camada.layer_input, camada.Rdot


def par_de_neuronios(rdot: np.ndarray) -> tuple[int, int]:
    ativos = np.flatnonzero(np.any(rdot != 0.0, axis=0))
    return (int(ativos[0]), int(ativos[1])) if ativos.size >= 2 else (0, 1)


def main(out_dir: str | None = None, seeds=range(5), grid: int = 101, limpar: bool = True):
    if limpar:
        limpar_console()
    try:
        cfg = carregar_cfg()
    except QpsbgdError as e:
        print(f"Erro nas variáveis de ambiente: {e}")
        return None
    exibir_info_ambiente_console(cfg)
    out_dir = out_dir or cfg["OUT_DIR"]

    adult = carregar_adult(cfg["DATA_DIR"])
    gaps, espectros, jaccards = [], [], []
    for seed in seeds:
        print(f"Semente {seed}...")
        ds = adult if adult is not None else make_blobs(seed)
        try:
            X, rdot = camada_do_lote(ds, seed)
            par = par_de_neuronios(rdot)
            cmp = compare_neuron_gaps(X, rdot, grid, neurons=par)
            gaps.append(
                {
                    "seed": seed,
                    "fonte": ds.name,
                    "neuronios": f"{par[0]},{par[1]}",
                    "gap_neuronio_a": cmp.single_gaps[0],
                    "gap_neuronio_b": cmp.single_gaps[1],
                    "gap_1_neuronio": cmp.single_gap,
                    "gap_2_neuronios": cmp.joint_gap,
                    "diminuiu": cmp.decreases(),
                }
            )
            conjunto = spectral_gap(layer_qubo(X, rdot[:, list(par)], 2), grid)
            espectros.append(conjunto.to_frame(max_levels=4).assign(seed=seed))

            sozinho = layer_qubo(X, rdot[:, [par[0]]], 1)
            amostras = solve_sa(sozinho, SaParams(sweeps=100, restarts=16), seed).samples
            M = sample_similarity(amostras, TOP_K)
            jaccards.append({"seed": seed, "jaccard_medio": float(M[~np.eye(TOP_K, dtype=bool)].mean())})
        except QpsbgdError as e:
            print(f"Erro na semente {seed}: {e}")
            return None

    tabela = pd.DataFrame(gaps)
    diminuiu = int(tabela["diminuiu"].sum())
    situacao = "ok" if diminuiu >= min(SEMENTES_MINIMAS, len(tabela)) else "abaixo do esperado"
    print(f"gap com 2 neurônios < gap com 1 neurônio em {diminuiu}/{len(tabela)} sementes ({situacao})")

    garantir_pasta(out_dir)
    caminho = salvar_excel(
        {
            "Gaps": tabela,
            "Espectro": pd.concat(espectros, ignore_index=True),
            "Jaccard": pd.DataFrame(jaccards),
        },
        Path(out_dir) / f"{nome_arquivo}.xlsx",
    )
    print(f"Arquivo salvo com sucesso: {caminho}")
    return caminho


if __name__ == "__main__":
    main()
