"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : MNIST binário (par de dígitos) com features de 16 retas; acurácia final
                  média ± desvio por otimizador
Tipo            : experimento
Módulo          : mnist_linhas
ID              : QPSBGD.APP.004

Espera data/mnist/train-images-idx3-ubyte[.gz] e train-labels-idx1-ubyte[.gz].
"""

import dataclasses
import os
from pathlib import Path

from qpsbgd.config import carregar_cfg, exibir_info_ambiente_console
from qpsbgd.errors import QpsbgdError
from qpsbgd.experiment import load_config, run_experiment
from qpsbgd.relatorio import estatistica_final, gerar_relatorio, juntar_metricas

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "mnist_linhas.json"
OTIMIZADORES = ("qpsbgd", "bc_sgd", "bc_signsgd")


def limpar_console() -> None:
    os.system("cls" if os.name == "nt" else "clear")


nome_arquivo = os.path.splitext(os.path.basename(__file__))[0]


def main(out_dir: str | None = None, limpar: bool = True):
    if limpar:
        limpar_console()
    try:
        cfg = carregar_cfg()
        base = load_config(CONFIG)
    except QpsbgdError as e:
        print(f"Erro de configuração: {e}")
        return None
    out_dir = out_dir or cfg["OUT_DIR"]

    execucoes = {
        kind: dataclasses.replace(
            base,
            name=f"mnist_linhas_{kind}",
            optimizer=dataclasses.replace(base.optimizer, kind=kind, alpha=None),
            metrics_path=str(Path(out_dir) / f"mnist_linhas_{kind}.csv"),
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
            for nota in getattr(e, "__notes__", []):
                print(f"  {nota}")
            return None

    final = estatistica_final(juntar_metricas(metricas))
    teste = final[final["split"] == "test"]
    for linha in teste.itertuples(index=False):
        print(f"{linha.otimizador}: {linha.acuracia_media:.3f} ± {linha.acuracia_desvio:.3f}")

    print("Gerando Excel...")
    caminho = gerar_relatorio(metricas, out_dir, nome_arquivo)
    print(f"Arquivo salvo com sucesso: {caminho}")
    return caminho


if __name__ == "__main__":
    main()
