"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : regressão logística binária nos blobs: QP-SBGD contra BC-SGD e BC-signSGD
Tipo            : experimento
Módulo          : regressao_logistica
ID              : QPSBGD.APP.001
"""

import os
from pathlib import Path

from qpsbgd.config import carregar_cfg, exibir_info_ambiente_console
from qpsbgd.errors import QpsbgdError
from qpsbgd.experiment import load_config, run_experiment, with_overrides
from qpsbgd.relatorio import gerar_relatorio, juntar_metricas, media_movel_perda

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
RODADAS = {
    "QP-SBGD": "blobs.json",
    "BC-SGD": "blobs_bc_sgd.json",
    "BC-signSGD": "blobs_bc_signsgd.json",
}


def limpar_console() -> None:
    os.system("cls" if os.name == "nt" else "clear")


nome_arquivo = os.path.splitext(os.path.basename(__file__))[0]


def main(out_dir: str | None = None, epochs: int | None = None, limpar: bool = True):
    if limpar:
        limpar_console()
    try:
        cfg = carregar_cfg()
    except QpsbgdError as e:
        print(f"Erro nas variáveis de ambiente: {e}")
        return None
    out_dir = out_dir or cfg["OUT_DIR"]
    try:
        execucoes = {
            nome: with_overrides(
                load_config(CONFIGS / arquivo),
                epochs=epochs,
                metrics_path=str(Path(out_dir) / f"{Path(arquivo).stem}.csv"),
            )
            for nome, arquivo in RODADAS.items()
        }
    except QpsbgdError as e:
        print(f"Erro de configuração: {e}")
        return None
    exibir_info_ambiente_console(cfg, execucoes.values())

    metricas = {}
    for nome, exp in execucoes.items():
        print(f"Treinando {nome}...")
        try:
            metricas[nome] = run_experiment(exp, cfg).metrics
        except QpsbgdError as e:
            print(f"Erro no treino de {nome}: {e}")
            return None

    extras = {"Janelas": media_movel_perda(juntar_metricas(metricas), janela=1)}
    print("Gerando Excel...")
    caminho = gerar_relatorio(metricas, out_dir, nome_arquivo, extras)
    print(f"Arquivo salvo com sucesso: {caminho}")
    return caminho


if __name__ == "__main__":
    main()
