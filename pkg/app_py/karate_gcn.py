"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : GCN binária no Karate club com QP-SBGD e os três baselines
Tipo            : experimento
Módulo          : karate_gcn
ID              : QPSBGD.APP.002
"""

import dataclasses
import os
from pathlib import Path

from qpsbgd.config import carregar_cfg, exibir_info_ambiente_console
from qpsbgd.errors import QpsbgdError
from qpsbgd.experiment import load_config, run_experiment
from qpsbgd.relatorio import gerar_relatorio, juntar_metricas, media_movel_perda

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "karate_gcn.json"
OTIMIZADORES = ("qpsbgd", "bc_sgd", "bc_signsgd", "proxquant")


def limpar_console() -> None:
    os.system("cls" if os.name == "nt" else "clear")


nome_arquivo = os.path.splitext(os.path.basename(__file__))[0]


def main(out_dir: str | None = None, epochs: int | None = None, limpar: bool = True):
    if limpar:
        limpar_console()
    try:
        cfg = carregar_cfg()
        base = load_config(CONFIG)
    except QpsbgdError as e:
        print(f"Erro de configuração: {e}")
        return None
    out_dir = out_dir or cfg["OUT_DIR"]

    # alpha None: cada otimizador usa o seu padrão
    execucoes = {
        kind: dataclasses.replace(
            base,
            name=f"karate_gcn_{kind}",
            optimizer=dataclasses.replace(base.optimizer, kind=kind, alpha=None),
            epochs=base.epochs if epochs is None else epochs,
            metrics_path=str(Path(out_dir) / f"karate_gcn_{kind}.csv"),
        )
        for kind in OTIMIZADORES
    }
    exibir_info_ambiente_console(cfg, execucoes.values())

    metricas = {}
    for kind, exp in execucoes.items():
        print(f"Treinando {kind}...")
        try:
            metricas[kind] = run_experiment(exp.validate(), cfg).metrics
        except QpsbgdError as e:
            print(f"Erro no treino de {kind}: {e}")
            return None

    extras = {"Janelas": media_movel_perda(juntar_metricas(metricas), janela=10)}
    print("Gerando Excel...")
    caminho = gerar_relatorio(metricas, out_dir, nome_arquivo, extras)
    print(f"Arquivo salvo com sucesso: {caminho}")
    return caminho


if __name__ == "__main__":
    main()
