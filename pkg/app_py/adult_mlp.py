"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : MLPs binárias no UCI Adult (a1a): 2 camadas, 10 camadas e a
                  variante com 3 features e teste CDP
Tipo            : experimento
Módulo          : adult_mlp
ID              : QPSBGD.APP.003

Espera data/adult/a1a e data/adult/a1a.t (ou DATA_DIR no .env).
"""

import os
import sys
from pathlib import Path

import pandas as pd

from qpsbgd.config import carregar_cfg, exibir_info_ambiente_console
from qpsbgd.diagnostics import tally_from_counts
from qpsbgd.errors import QpsbgdError
from qpsbgd.experiment import load_config, run_experiment, with_overrides
from qpsbgd.relatorio import estatistica_final, gerar_relatorio, juntar_metricas, media_movel_perda

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
RODADAS = {
    "QP-SBGD": "adult_2camadas.json",
    "BC-signSGD": "adult_2camadas_bc_signsgd.json",
    "ProxQuant": "adult_2camadas_proxquant.json",
}
ARQUIVO_CDP = "adult_3features.json"


def limpar_console() -> None:
    os.system("cls" if os.name == "nt" else "clear")


nome_arquivo = os.path.splitext(os.path.basename(__file__))[0]


def resumo_cdp(tabela: pd.DataFrame) -> pd.DataFrame:
    linhas = []
    for metodo, grupo in tabela.groupby("method"):
        t = tally_from_counts(int(grupo["k"].sum()), int(grupo["n"].sum()))
        linhas.append({"metodo": metodo, "k": t.k, "n": t.n, "Z": t.z})
    return pd.DataFrame(linhas)


def metricas_2camadas(metricas: dict) -> pd.DataFrame:
    return juntar_metricas({k: metricas[k] for k in RODADAS})


def main(out_dir: str | None = None, dez_camadas: bool = False, limpar: bool = True):
    if limpar:
        limpar_console()
    try:
        cfg = carregar_cfg()
    except QpsbgdError as e:
        print(f"Erro nas variáveis de ambiente: {e}")
        return None
    out_dir = out_dir or cfg["OUT_DIR"]

    rodadas = dict(RODADAS)
    if dez_camadas:
        rodadas["QP-SBGD 10 camadas"] = "adult_10camadas.json"
    rodadas["QP-SBGD 3 features"] = ARQUIVO_CDP
    try:
        execucoes = {
            nome: with_overrides(
                load_config(CONFIGS / arquivo),
                metrics_path=str(Path(out_dir) / f"{Path(arquivo).stem}.csv"),
            )
            for nome, arquivo in rodadas.items()
        }
    except QpsbgdError as e:
        print(f"Erro de configuração: {e}")
        return None
    exibir_info_ambiente_console(cfg, execucoes.values())

    metricas = {}
    for nome, exp in execucoes.items():
        cdp = rodadas[nome] == ARQUIVO_CDP
        print(f"Treinando {nome}{' (teste CDP)' if cdp else ''}...")
        try:
            res = run_experiment(exp, cfg, cdp=cdp)
        except QpsbgdError as e:
            print(f"Erro no treino de {nome}: {e}")
            return None
        metricas[nome] = res.metrics

    comparacao = metricas_2camadas(metricas)
    final = estatistica_final(comparacao)
    treino = final[final["split"] == "train"].set_index("otimizador")["loss_media"]
    razao = treino["QP-SBGD"] / treino["BC-signSGD"]
    print(f"Perda final QP-SBGD / BC-signSGD: {razao:.3f} (até 1.10 dentro de 10%)")

    extras = {
        "Janelas": media_movel_perda(comparacao, janela=10),
        "CDP": res.cdp,
        "CDP agregado": resumo_cdp(res.cdp),
    }
    print("Gerando Excel...")
    caminho = gerar_relatorio(metricas, out_dir, nome_arquivo, extras)
    print(f"Arquivo salvo com sucesso: {caminho}")
    return caminho


if __name__ == "__main__":
    main(dez_camadas="--dez-camadas" in sys.argv)
