"""Testes do problema QUBO e dos solvers locais."""

import itertools

import numpy as np
import pytest

from qpsbgd.errors import CapacityError, InvalidArgumentError, ParseError
from qpsbgd.qubo import (
    AnnealingSolver,
    ExhaustiveSolver,
    QuboProblem,
    SaParams,
    energy,
    jaccard,
    read_qubo_file,
    read_qubo_text,
    solve_exhaustive,
    solve_sa,
    write_qubo_text,
)
from tests.conftest import random_problem

EXEMPLO = QuboProblem([[1.0, 0.0], [0.0, 0.0]], [-4.0, 0.0], 4.0)


def forca_bruta(p):
    """Enumerador independente: itertools em ordem lexicográfica com −1 < +1."""
    melhor, melhor_e = None, np.inf
    for g in itertools.product((-1, 1), repeat=p.n):
        v = np.array(g, dtype=float)
        e = v @ p.Q @ v + p.s @ v + p.offset
        if e < melhor_e - 1e-9:
            melhor, melhor_e = g, e
    return np.array(melhor), melhor_e


class TestQuboProblem:
    def test_rejeita_q_assimetrica(self):
        with pytest.raises(InvalidArgumentError):
            QuboProblem([[0.0, 1.0], [0.0, 0.0]], [0.0, 0.0])

    def test_rejeita_s_com_tamanho_errado(self):
        with pytest.raises(InvalidArgumentError):
            QuboProblem(np.eye(2), [0.0, 0.0, 0.0])

    def test_rejeita_coeficiente_nao_finito(self):
        with pytest.raises(InvalidArgumentError):
            QuboProblem(np.eye(2), [np.nan, 0.0])

    def test_q_simetrica_bit_a_bit(self, rng):
        p = random_problem(rng, 5)
        assert np.array_equal(p.Q, p.Q.T)

    def test_imutavel(self):
        with pytest.raises(ValueError):
            EXEMPLO.Q[0, 0] = 2.0


class TestEnergy:
    def test_exemplo_mais_mais(self):
        assert energy(EXEMPLO, [1, 1]) == 1.0

    def test_exemplo_menos_menos(self):
        assert energy(EXEMPLO, [-1, -1]) == 9.0

    def test_problema_nulo(self):
        assert energy(QuboProblem.zeros(3), [1, -1, 1]) == 0.0

    def test_tamanho_errado(self):
        with pytest.raises(InvalidArgumentError):
            energy(EXEMPLO, [1, 1, 1])

    def test_valores_fora_de_spin(self):
        with pytest.raises(InvalidArgumentError):
            energy(EXEMPLO, [1, 0])

    def test_invariante_a_simetrizacao(self, rng):
        A = rng.normal(size=(4, 4))
        s = rng.normal(size=4)
        p = QuboProblem.symmetrized(A, s)
        for g in itertools.product((-1, 1), repeat=4):
            v = np.array(g, dtype=float)
            assert energy(p, g) == pytest.approx(v @ A @ v + s @ v, abs=1e-12)


class TestSolveExhaustive:
    def test_exemplo_desempate(self):
        res = solve_exhaustive(EXEMPLO)
        assert res.best.tolist() == [1, -1]
        assert res.best_energy == 1.0

    def test_problema_nulo(self):
        res = solve_exhaustive(QuboProblem.zeros(3))
        assert res.best.tolist() == [-1, -1, -1]
        assert res.best_energy == 0.0

    def test_seis_spins_contra_forca_bruta(self, rng):
        p = random_problem(rng, 6)
        g, e = forca_bruta(p)
        res = solve_exhaustive(p)
        assert res.best.tolist() == g.tolist()
        assert res.best_energy == pytest.approx(e, abs=1e-9)

    def test_minimo_global_em_sorteios(self, rng):
        for _ in range(60):
            p = random_problem(rng, int(rng.integers(1, 9)))
            _, e = forca_bruta(p)
            res = solve_exhaustive(p)
            assert res.best_energy == pytest.approx(e, abs=1e-9)
            assert res.best_energy == energy(p, res.best)

    def test_amostras_completas_ate_12(self, rng):
        p = random_problem(rng, 5)
        res = solve_exhaustive(p)
        assert len(res.samples) == 32
        assert res.reads == 32
        energias = [e for _, e in res.samples]
        assert energias == sorted(energias)

    def test_somente_melhor_acima_de_12(self, rng):
        p = random_problem(rng, 13)
        res = solve_exhaustive(p)
        assert len(res.samples) == 1
        assert res.samples[0][1] == res.best_energy

    def test_limite_de_capacidade(self):
        with pytest.raises(CapacityError):
            solve_exhaustive(QuboProblem.zeros(25))
        with pytest.raises(CapacityError):
            ExhaustiveSolver(cap=4).solve(QuboProblem.zeros(5))


class TestSolveSa:
    def test_problema_nulo(self):
        res = solve_sa(QuboProblem.zeros(4), SaParams(sweeps=50, restarts=4), seed=0)
        assert res.best_energy == 0.0
        assert len(res.samples) == 4

    def test_deterministico(self, rng):
        p = random_problem(rng, 8)
        params = SaParams(sweeps=100, restarts=8)
        a = solve_sa(p, params, seed=3)
        b = solve_sa(p, params, seed=3)
        assert a.best.tolist() == b.best.tolist()
        assert a.best_energy == b.best_energy
        assert [g.tolist() for g, _ in a.samples] == [g.tolist() for g, _ in b.samples]

    def test_independente_de_workers(self, rng):
        p = random_problem(rng, 7)
        a = solve_sa(p, SaParams(sweeps=80, restarts=6, workers=1), seed=1)
        b = solve_sa(p, SaParams(sweeps=80, restarts=6, workers=3), seed=1)
        assert [(g.tolist(), e) for g, e in a.samples] == [(g.tolist(), e) for g, e in b.samples]

    def test_nao_pior_que_todos_positivos(self, rng):
        for _ in range(10):
            p = random_problem(rng, 6)
            res = solve_sa(p, SaParams(sweeps=5, restarts=2), seed=0)
            assert res.best_energy <= energy(p, np.ones(6)) + 1e-12

    def test_concorda_com_exaustivo(self, rng):
        acertos = 0
        for k in range(100):
            p = random_problem(rng, int(rng.integers(2, 11)))
            sa = solve_sa(p, SaParams(), seed=k)
            ex = solve_exhaustive(p)
            assert sa.best_energy >= ex.best_energy - 1e-9
            acertos += abs(sa.best_energy - ex.best_energy) <= 1e-9
        assert acertos >= 95

    def test_amostras_ordenadas(self, rng):
        res = solve_sa(random_problem(rng, 6), SaParams(sweeps=20, restarts=10), seed=0)
        energias = [e for _, e in res.samples]
        assert energias == sorted(energias)
        assert res.reads == 10

    @pytest.mark.parametrize(
        "params",
        [
            SaParams(sweeps=0),
            SaParams(restarts=0),
            SaParams(t_cold=0.0),
            SaParams(t_hot=1e-4, t_cold=1e-3),
        ],
    )
    def test_parametros_invalidos(self, params):
        with pytest.raises(InvalidArgumentError):
            solve_sa(QuboProblem.zeros(2), params, seed=0)

    def test_solver_usa_chave_na_semente(self, rng):
        p = random_problem(rng, 6)
        solver = AnnealingSolver(SaParams(sweeps=30, restarts=4), seed=9)
        a = solver.solve(p, key=(1, 0, 2))
        b = solve_sa(p, SaParams(sweeps=30, restarts=4), 9, key=(1, 0, 2))
        assert a.best_energy == b.best_energy


class TestJaccard:
    def test_identicos(self):
        assert jaccard([1, -1, 1], [1, -1, 1]) == 1.0

    def test_disjuntos(self):
        assert jaccard([1, -1], [-1, 1]) == 0.0

    def test_metade(self):
        assert jaccard([1, 1, -1], [1, -1, -1]) == 0.5

    def test_ambos_vazios(self):
        assert jaccard([-1, -1], [-1, -1]) == 1.0

    def test_simetrico(self, rng):
        a = rng.choice([-1, 1], size=9)
        b = rng.choice([-1, 1], size=9)
        assert jaccard(a, b) == jaccard(b, a)

    def test_tamanhos_diferentes(self):
        with pytest.raises(InvalidArgumentError):
            jaccard([1, 1], [1, 1, 1])


class TestFormatoTexto:
    def test_leitura(self):
        p = read_qubo_text("# exemplo\nn 2\nq 0 0 1\nq 0 1 0.5\nl 0 -4\noffset 4\n")
        assert p.Q.tolist() == [[1.0, 0.5], [0.5, 0.0]]
        assert p.s.tolist() == [-4.0, 0.0]
        assert p.offset == 4.0

    def test_entrada_duplicada(self):
        with pytest.raises(ParseError) as exc:
            read_qubo_text("n 2\nq 0 1 1\nq 0 1 2\n")
        assert exc.value.linha == 3

    def test_indices_invertidos(self):
        with pytest.raises(ParseError):
            read_qubo_text("n 2\nq 1 0 1\n")

    def test_indice_fora(self):
        with pytest.raises(ParseError) as exc:
            read_qubo_text("n 2\nl 2 1\n")
        assert exc.value.linha == 2

    def test_sem_n(self):
        with pytest.raises(ParseError):
            read_qubo_text("q 0 0 1\n")

    def test_diretiva_desconhecida(self):
        with pytest.raises(ParseError, match="desconhecida"):
            read_qubo_text("n 1\nx 0\n")

    def test_escrita_preserva_problema(self, rng, tmp_path):
        p = random_problem(rng, 4)
        caminho = tmp_path / "p.txt"
        caminho.write_text(write_qubo_text(p), encoding="utf-8")
        q = read_qubo_file(caminho)
        assert np.array_equal(q.Q, p.Q)
        assert np.array_equal(q.s, p.s)
        assert q.offset == p.offset

    def test_arquivo_ausente(self, tmp_path):
        with pytest.raises(ParseError):
            read_qubo_file(tmp_path / "nao_existe.txt")
