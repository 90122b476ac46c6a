"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : resumo de métricas sobre sementes e planilhas Excel de comparação
Tipo            : relatório
Módulo          : relatorio
ID              : QPSBGD.REL.001
"""

from __future__ import annotations

import logging
import re
import time
from pathlib import Path

import pandas as pd
from sqlalchemy.engine import Engine

from qpsbgd.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

COLUNAS_METRICAS = ["seed", "epoch", "split", "loss", "accuracy"]
TABELA_METRICAS = "metricas"


# ------------------------------
# Utilidades
# ------------------------------
LIMITE_ABA = 31
# colunas inteiras das tabelas de métricas, passos e CDP
COLUNAS_INTEIRAS = {"seed", "epoch", "t", "layer", "column", "k", "n", "sementes", "janela"}


def garantir_pasta(caminho) -> Path:
    caminho = Path(caminho)
    caminho.mkdir(parents=True, exist_ok=True)
    return caminho


def nome_planilha(base: str, ts: str | None = None) -> str:
    """`<base>_<timestamp>.xlsx`, sem caracteres inválidos no Windows."""
    base = re.sub(r'[<>:"/\\|?*]+', "-", base).strip() or "relatorio"
    return f"{base}_{ts or time.strftime('%Y%m%d_%H%M%S')}.xlsx"


def achatar_colunas(df: pd.DataFrame) -> pd.DataFrame:
    """Colunas de agregações com vários níveis viram `nivel1_nivel2`."""
    df = df.copy()
    nomes = ["_".join(str(p) for p in c if str(p)) if isinstance(c, tuple) else str(c) for c in df.columns]
    df.columns = [re.sub(r"[\\/*?:\[\]]", "", nome).strip() for nome in nomes]
    return df


def nomes_de_abas(nomes) -> list[str]:
    """Nomes válidos e distintos; repetições após o corte em 31 caracteres ganham sufixo ` (2)`, ` (3)`..."""
    usados: set[str] = set()
    saida = []
    for nome in nomes:
        base = re.sub(r"[\\/*?:\[\]]", "", str(nome)).strip()[:LIMITE_ABA] or "Planilha"
        aba, i = base, 1
        while aba.lower() in usados:
            i += 1
            sufixo = f" ({i})"
            aba = base[: LIMITE_ABA - len(sufixo)] + sufixo
        usados.add(aba.lower())
        saida.append(aba)
    return saida


def formatar_colunas(writer, aba: str, df: pd.DataFrame) -> None:
    """Largura pelo conteúdo; inteiros sem casas e reais com 4 casas."""
    workbook = writer.book
    ws = writer.sheets[aba]
    inteiro = workbook.add_format({"num_format": "0"})
    real = workbook.add_format({"num_format": "0.0000"})
    for idx, col in enumerate(df.columns):
        serie = df[col]
        if col in COLUNAS_INTEIRAS and pd.api.types.is_numeric_dtype(serie):
            formato = inteiro
        elif pd.api.types.is_float_dtype(serie):
            formato = real
        else:
            formato = None
        largura = len(str(col))
        if not df.empty:
            texto = serie.map(lambda v: f"{v:.4f}" if formato is real else str(v))
            largura = max(largura, texto.map(len).max())
        ws.set_column(idx, idx, min(largura + 2, 60), formato)


# ------------------------------
# Resumos
# ------------------------------
def juntar_metricas(metricas: dict[str, pd.DataFrame]) -> pd.DataFrame:
    """Empilha as métricas de vários otimizadores numa tabela com a coluna `otimizador`."""
    if not metricas:
        raise InvalidArgumentError("nenhuma tabela de métricas")
    partes = []
    for nome, df in metricas.items():
        faltando = [c for c in COLUNAS_METRICAS if c not in df.columns]
        if faltando:
            raise InvalidArgumentError(f"{nome}: colunas ausentes {faltando}")
        partes.append(df[COLUNAS_METRICAS].assign(otimizador=nome))
    return pd.concat(partes, ignore_index=True)


def media_por_epoca(dados: pd.DataFrame) -> pd.DataFrame:
    """Média e desvio sobre sementes por (otimizador, época, split)."""
    grupo = [c for c in ("otimizador", "epoch", "split") if c in dados.columns]
    resumo = (
        dados.groupby(grupo, sort=True)
        .agg(
            loss_media=("loss", "mean"),
            loss_desvio=("loss", "std"),
            acuracia_media=("accuracy", "mean"),
            acuracia_desvio=("accuracy", "std"),
            sementes=("seed", "nunique"),
        )
        .reset_index()
    )
    return resumo


def estatistica_final(dados: pd.DataFrame) -> pd.DataFrame:
    """Última época de cada otimizador/split."""
    resumo = media_por_epoca(dados)
    chave = [c for c in ("otimizador", "split") if c in resumo.columns]
    ultima = resumo.groupby(chave)["epoch"].transform("max")
    return resumo[resumo["epoch"] == ultima].reset_index(drop=True)


def media_movel_perda(dados: pd.DataFrame, janela: int = 10, split: str = "train") -> pd.DataFrame:
    """Perda média sobre sementes, agregada em janelas de `janela` épocas."""
    resumo = media_por_epoca(dados)
    resumo = resumo[resumo["split"] == split].copy()
    resumo["janela"] = resumo["epoch"] // janela
    grupo = [c for c in ("otimizador", "janela") if c in resumo.columns]
    return resumo.groupby(grupo)["loss_media"].mean().reset_index()


# ------------------------------
# Saída
# ------------------------------
def salvar_excel(tabelas: dict[str, pd.DataFrame], caminho) -> Path:
    caminho = Path(caminho)
    garantir_pasta(caminho.parent)
    with pd.ExcelWriter(caminho, engine="xlsxwriter") as writer:
        for aba, df in zip(nomes_de_abas(tabelas), tabelas.values()):
            df = achatar_colunas(df)
            df.to_excel(writer, sheet_name=aba, index=False)
            formatar_colunas(writer, aba, df)
    logger.info("planilha salva em %s", caminho)
    return caminho


def gerar_relatorio(
    metricas: dict[str, pd.DataFrame],
    out_dir,
    base: str,
    extras: dict[str, pd.DataFrame] | None = None,
) -> Path:
    """Planilha com abas Dados, Resumo e Estatistica (mais abas extras), nome com timestamp."""
    dados = juntar_metricas(metricas)
    tabelas = {
        "Dados": dados,
        "Resumo": media_por_epoca(dados),
        "Estatistica": estatistica_final(dados),
    }
    tabelas.update(extras or {})
    return salvar_excel(tabelas, Path(out_dir) / nome_planilha(base))


def salvar_sql(df: pd.DataFrame, engine: Engine, tabela: str = TABELA_METRICAS, **colunas) -> int:
    """Acrescenta as linhas na tabela; `colunas` vira colunas constantes (ex.: experimento=...)."""
    df = df.assign(**colunas) if colunas else df
    df.to_sql(tabela, engine, if_exists="append", index=False)
    logger.info("%d linha(s) gravada(s) em %s", len(df), tabela)
    return len(df)
