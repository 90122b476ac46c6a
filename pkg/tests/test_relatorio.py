import pandas as pd
import pytest
from openpyxl import load_workbook

from qpsbgd.config import get_engine
from qpsbgd.errors import InvalidArgumentError
from qpsbgd.relatorio import (
    achatar_colunas,
    estatistica_final,
    gerar_relatorio,
    juntar_metricas,
    media_movel_perda,
    media_por_epoca,
    nome_planilha,
    nomes_de_abas,
    salvar_excel,
    salvar_sql,
)


def metricas(perda_base):
    linhas = []
    for seed in (0, 1):
        for epoch in range(4):
            for split in ("train", "test"):
                linhas.append(
                    {
                        "seed": seed,
                        "epoch": epoch,
                        "split": split,
                        "loss": perda_base - 0.1 * epoch + 0.01 * seed,
                        "accuracy": 0.5 + 0.1 * epoch,
                    }
                )
    return pd.DataFrame(linhas)


def test_juntar_metricas():
    dados = juntar_metricas({"qpsbgd": metricas(1.0), "bc_sgd": metricas(2.0)})
    assert set(dados["otimizador"]) == {"qpsbgd", "bc_sgd"}
    assert len(dados) == 32


def test_juntar_metricas_sem_colunas():
    with pytest.raises(InvalidArgumentError, match="accuracy"):
        juntar_metricas({"x": metricas(1.0).drop(columns="accuracy")})


def test_media_por_epoca():
    resumo = media_por_epoca(juntar_metricas({"qpsbgd": metricas(1.0)}))
    linha = resumo[(resumo["epoch"] == 2) & (resumo["split"] == "train")].iloc[0]
    assert linha["loss_media"] == pytest.approx(0.805)
    assert linha["sementes"] == 2


def test_estatistica_final_pega_ultima_epoca():
    final = estatistica_final(juntar_metricas({"a": metricas(1.0), "b": metricas(2.0)}))
    assert set(final["epoch"]) == {3}
    assert len(final) == 4


def test_media_movel():
    janelas = media_movel_perda(juntar_metricas({"a": metricas(1.0)}), janela=2)
    assert janelas["janela"].tolist() == [0, 1]
    assert janelas["loss_media"].iloc[0] == pytest.approx(0.955)


def test_nome_planilha():
    assert nome_planilha("a/b:c", "20260101_000000") == "a-b-c_20260101_000000.xlsx"
    assert nome_planilha("", "1") == "relatorio_1.xlsx"


def test_abas_truncadas_ficam_distintas():
    abas = nomes_de_abas(["x" * 40, "x" * 35, "CDP/agregado", "cdp/agregado"])
    assert abas[0] == "x" * 31
    assert abas[1] == "x" * 27 + " (2)"
    assert abas[2] == "CDPagregado"
    assert abas[3] == "cdpagregado (2)"
    assert all(len(a) <= 31 for a in abas)


def test_achatar_colunas_de_agregacao():
    df = metricas(1.0).groupby("split").agg({"loss": ["mean", "std"]}).reset_index()
    assert achatar_colunas(df).columns.tolist() == ["split", "loss_mean", "loss_std"]


def test_formato_numerico_das_colunas(tmp_path):
    caminho = salvar_excel({"Dados": metricas(1.0)}, tmp_path / "m.xlsx")
    colunas = load_workbook(caminho)["Dados"].column_dimensions
    # seed, epoch, split, loss, accuracy
    assert colunas["A"].number_format == "0"
    assert colunas["D"].number_format == "0.0000"
    assert colunas["E"].width > colunas["A"].width


def test_gerar_relatorio(tmp_path):
    extras = {"Janelas": media_movel_perda(juntar_metricas({"a": metricas(1.0)}), 2)}
    caminho = gerar_relatorio({"a": metricas(1.0), "b": metricas(2.0)}, tmp_path / "out", "comp/1", extras)
    assert caminho.exists()
    assert caminho.name.startswith("comp-1_")
    wb = load_workbook(caminho)
    assert wb.sheetnames == ["Dados", "Resumo", "Estatistica", "Janelas"]
    assert wb["Dados"].max_row == 33


def test_salvar_sql(tmp_path):
    engine = get_engine(url=f"sqlite:///{tmp_path / 'r.db'}")
    assert salvar_sql(metricas(1.0), engine, experimento="teste") == 16
    salvar_sql(metricas(2.0), engine, experimento="teste")
    lido = pd.read_sql("select * from metricas", engine)
    assert len(lido) == 32
    assert set(lido["experimento"]) == {"teste"}
