"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : linha de comando (train, solve-qubo, spectral-gap, cdp-test, datasets dump, report)
Tipo            : CLI
Módulo          : cli
ID              : QPSBGD.CLI.001
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import pandas as pd

from qpsbgd import __version__
from qpsbgd.config import carregar_cfg, exibir_info_ambiente_console
from qpsbgd.datasets import dump_csv
from qpsbgd.diagnostics import sample_similarity, spectral_gap, tally_from_counts
from qpsbgd.errors import InvalidArgumentError, QpsbgdError
from qpsbgd.experiment import (
    DatasetConfig,
    SolverConfig,
    load_config,
    load_dataset,
    make_solver,
    run_experiment,
    with_overrides,
)
from qpsbgd.qubo import read_qubo_file
from qpsbgd.relatorio import gerar_relatorio, juntar_metricas, media_movel_perda


def _spins(g) -> str:
    return " ".join(f"{int(x):+d}" for x in g)


# ------------------------------
# Subcomandos
# ------------------------------
def cmd_train(args, env: dict) -> int:
    cfg = with_overrides(
        load_config(args.config),
        seed=args.seed,
        solver=args.solver,
        epochs=args.epochs,
        alpha=args.alpha,
        metrics_path=args.metrics,
    )
    exibir_info_ambiente_console(env, [cfg])
    print(f"Treinando '{cfg.name}'...")
    res = run_experiment(cfg, env)

    final = res.metrics[res.metrics["epoch"] == res.metrics["epoch"].max()]
    for split, grupo in final.groupby("split", sort=False):
        print(f"{split}: perda média {grupo['loss'].mean():.4f} | acurácia média {grupo['accuracy'].mean():.4f}")
    print(f"Métricas salvas em: {res.metrics_path}")
    for caminho in res.checkpoints:
        print(f"Checkpoint: {caminho}")
    if res.steps_path:
        print(f"Relatório de passos: {res.steps_path}")
    return 0


def cmd_solve_qubo(args, env: dict) -> int:
    problema = read_qubo_file(args.input)
    scfg = SolverConfig(kind=args.solver, sweeps=args.sweeps, restarts=args.restarts)
    solver = make_solver(scfg, args.seed, env)
    res = solver.solve(problema)

    print(f"best: {_spins(res.best)}")
    print(f"energy: {res.best_energy!r}")
    print(f"reads: {res.reads}")
    if args.top_k:
        M = sample_similarity(res.samples, args.top_k)
        print("jaccard:")
        for linha in M:
            print(" ".join(f"{x:.3f}" for x in linha))
    return 0


def cmd_spectral_gap(args, env: dict) -> int:
    problema = read_qubo_file(args.input)
    espectro = spectral_gap(problema, args.grid, workers=args.workers)
    saida = Path(args.output)
    saida.parent.mkdir(parents=True, exist_ok=True)
    espectro.to_frame().to_csv(saida, index=False, float_format="%.12g")

    print(f"gap mínimo (E1 − E0): {espectro.min_gap:.6g} em s = {espectro.argmin_s:.4f}")
    print(f"degenerescência do fundamental em s=1: {espectro.ground_degeneracy}")
    print(f"gap até o primeiro nível excitado fora do fundamental: {espectro.refined_gap:.6g}")
    print(f"CSV salvo em: {saida}")
    return 0


def cmd_cdp_test(args, env: dict) -> int:
    if args.config is None:
        if args.k is None or args.n is None:
            raise InvalidArgumentError("cdp-test: informe --k e --n, ou --config")
        t = tally_from_counts(args.k, args.n)
        print(f"k={t.k} n={t.n} Z={t.z:.4f}")
        return 0

    cfg = with_overrides(load_config(args.config), seed=args.seed, solver=args.solver, epochs=args.epochs)
    res = run_experiment(cfg, env, cdp=True)
    for linha in res.cdp.itertuples(index=False):
        print(f"seed={linha.seed} epoch={linha.epoch} method={linha.method} k={linha.k} n={linha.n} Z={linha.z:.4f}")
    for metodo, grupo in res.cdp.groupby("method"):
        t = tally_from_counts(int(grupo["k"].sum()), int(grupo["n"].sum()))
        print(f"{metodo} agregado: k={t.k} n={t.n} Z={t.z:.4f}")
    if args.output:
        saida = Path(args.output)
        saida.parent.mkdir(parents=True, exist_ok=True)
        res.cdp.to_csv(saida, index=False, float_format="%.8f")
        print(f"CSV salvo em: {saida}")
    return 0


def cmd_datasets_dump(args, env: dict) -> int:
    dcfg = DatasetConfig(
        kind=args.dataset,
        path=args.path,
        digit_pair=tuple(args.digit_pair),
        n_features=args.n_features,
        n_train=args.n_train,
        n_test=args.n_test,
    )
    ds = load_dataset(dcfg, args.seed, env.get("DATA_DIR") or "data")
    caminho = dump_csv(ds, args.output)
    print(f"{len(ds.y)} linhas salvas em: {caminho}")
    return 0


def cmd_report(args, env: dict) -> int:
    metricas = {}
    for item in args.metrics:
        nome, sep, caminho = item.partition("=")
        if not sep:
            nome, caminho = Path(item).stem, item
        try:
            metricas[nome] = pd.read_csv(caminho)
        except OSError as e:
            raise InvalidArgumentError(f"--metrics: não foi possível ler {caminho}: {e}") from e

    extras = {"Janelas": media_movel_perda(juntar_metricas(metricas), args.window)}
    out_dir = args.output_dir or env.get("OUT_DIR") or "Arquivos"
    caminho = gerar_relatorio(metricas, out_dir, args.name, extras)
    print(f"Arquivo salvo com sucesso: {caminho}")
    return 0


# ------------------------------
# Parser
# ------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpsbgd", description="Treino de redes binárias com QP-SBGD e diagnósticos."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log em nível DEBUG")
    sub = parser.add_subparsers(dest="comando", required=True)

    solvers = ("exhaustive", "sa", "remote")

    p = sub.add_parser("train", help="executa um experimento a partir de um JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--solver", choices=solvers)
    p.add_argument("--epochs", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--metrics", help="caminho do CSV de métricas")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("solve-qubo", help="resolve um problema no formato texto")
    p.add_argument("--input", required=True)
    p.add_argument("--solver", choices=solvers, default="exhaustive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--top-k", type=int, default=0, help="matriz de Jaccard das k melhores amostras")
    p.set_defaults(func=cmd_solve_qubo)

    p = sub.add_parser("spectral-gap", help="espectro do Hamiltoniano de recozimento")
    p.add_argument("--input", required=True)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--output", default="espectro.csv")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_spectral_gap)

    p = sub.add_parser("cdp-test", help="teste Z da propriedade de direção consistente")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--config", help="mede k, n, Z por época durante o treino")
    p.add_argument("--seed", type=int)
    p.add_argument("--solver", choices=solvers)
    p.add_argument("--epochs", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_cdp_test)

    p = sub.add_parser("datasets", help="operações sobre datasets")
    dsub = p.add_subparsers(dest="acao", required=True)
    d = dsub.add_parser("dump", help="grava o dataset em CSV")
    d.add_argument("--dataset", choices=("blobs", "adult", "mnist", "karate"), required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--output", required=True)
    d.add_argument("--path")
    d.add_argument("--digit-pair", type=int, nargs=2, default=(1, 7))
    d.add_argument("--n-features", type=int)
    d.add_argument("--n-train", type=int, default=500)
    d.add_argument("--n-test", type=int, default=3000)
    d.set_defaults(func=cmd_datasets_dump)

    p = sub.add_parser("report", help="planilha Excel comparando métricas")
    p.add_argument("--metrics", nargs="+", required=True, help="nome=caminho.csv")
    p.add_argument("--name", default="comparacao")
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        env = carregar_cfg()
        return args.func(args, env)
    except QpsbgdError as e:
        print(f"Erro: {e}", file=sys.stderr)
        for nota in getattr(e, "__notes__", []):
            print(f"  {nota}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
