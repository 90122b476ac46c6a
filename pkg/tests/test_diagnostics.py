import math

import numpy as np
import pytest

from qpsbgd.diagnostics import (
    AnnealSpectrum,
    CdpTally,
    basis_spins,
    build_anneal_hamiltonian,
    cdp_contagens,
    cdp_test,
    compare_neuron_gaps,
    layer_qubo,
    pool_tallies,
    sample_similarity,
    spectral_gap,
    tally_from_counts,
)
from qpsbgd.errors import CapacityError, EmptyTallyError, InvalidArgumentError
from qpsbgd.net import backward, forward, init_network
from qpsbgd.qubo import ExhaustiveSolver, QuboProblem, energy
from tests.conftest import random_problem


class TestCdp:
    def test_primeira_contagem_de_referencia(self):
        assert tally_from_counts(2285, 3915).z == pytest.approx(10.47, abs=0.01)

    def test_segunda_contagem_de_referencia(self):
        assert tally_from_counts(2199, 3647).z == pytest.approx(12.44, abs=0.01)

    def test_metade_exata(self):
        assert tally_from_counts(50, 100).z == 0.0

    def test_contagem_vazia(self):
        with pytest.raises(EmptyTallyError):
            tally_from_counts(0, 0)

    def test_k_maior_que_n(self):
        with pytest.raises(InvalidArgumentError):
            tally_from_counts(5, 4)

    def test_exclui_gradientes_nulos(self):
        t = cdp_test([1, -1, 1, 1], [0.5, -2.0, 0.0, -1.0])
        assert (t.k, t.n) == (2, 3)

    def test_todos_excluidos(self):
        with pytest.raises(EmptyTallyError):
            cdp_test([1, -1], [0.0, 1e-15])

    def test_agregacao(self):
        a, b = tally_from_counts(3, 4), tally_from_counts(1, 6)
        assert pool_tallies([a, b]) == CdpTally(4, 10, tally_from_counts(4, 10).z)
        assert a + b == pool_tallies([a, b])

    def test_agregacao_vazia(self):
        with pytest.raises(EmptyTallyError):
            pool_tallies([])

    def test_contagens_com_lote_igual_ao_treino(self, rng):
        net = init_network([4, 3, 1], rng)
        X = rng.choice([-1.0, 1.0], size=(12, 4))
        y = rng.integers(0, 2, size=12)
        _, cache = forward(net, X)
        bundle = backward(net, cache, y)
        tallies = cdp_contagens(net, bundle, bundle, ExhaustiveSolver())
        assert set(tallies) == {"qpsbgd", "signsgd"}
        assert tallies["signsgd"].k == tallies["signsgd"].n
        assert tallies["qpsbgd"].n == tallies["signsgd"].n


class TestSimilaridade:
    def test_matriz(self):
        amostras = [(np.array([1, -1, 1]), 0.0), (np.array([1, 1, -1]), 1.0), (np.array([1, -1, 1]), 2.0)]
        M = sample_similarity(amostras, 3)
        np.testing.assert_allclose(np.diag(M), 1.0)
        np.testing.assert_allclose(M, M.T)
        assert M[0, 2] == 1.0
        assert M[0, 1] == pytest.approx(1 / 3)

    def test_top_k_maior_que_amostras(self):
        with pytest.raises(InvalidArgumentError):
            sample_similarity([np.array([1, -1])], 2)


class TestHamiltoniano:
    def test_base_em_s_zero(self):
        H = build_anneal_hamiltonian(QuboProblem.zeros(3), 0.0)
        autovalores = np.linalg.eigvalsh(H)
        assert autovalores[0] == pytest.approx(-3.0)
        assert autovalores[1] == pytest.approx(-1.0)

    def test_diagonal_em_s_um_e_a_energia(self, rng):
        p = random_problem(rng, 4)
        H = build_anneal_hamiltonian(p, 1.0)
        assert np.count_nonzero(H - np.diag(np.diag(H))) == 0
        for indice in range(16):
            assert H[indice, indice] == pytest.approx(energy(p, basis_spins(indice, 4)), abs=1e-12)

    def test_simetrico(self, rng):
        H = build_anneal_hamiltonian(random_problem(rng, 3), 0.3)
        np.testing.assert_allclose(H, H.T)

    def test_base_computacional(self):
        assert basis_spins(0, 3).tolist() == [1, 1, 1]
        assert basis_spins(1, 3).tolist() == [1, 1, -1]
        assert basis_spins(4, 3).tolist() == [-1, 1, 1]

    def test_limite_de_capacidade(self):
        with pytest.raises(CapacityError):
            build_anneal_hamiltonian(QuboProblem.zeros(11), 0.5)

    def test_s_fora_do_intervalo(self):
        with pytest.raises(InvalidArgumentError):
            build_anneal_hamiltonian(QuboProblem.zeros(2), 1.5)


class TestSpectralGap:
    def test_spin_unico(self):
        # H(s) = [[s, −(1−s)], [−(1−s), −s]]: gap 2·sqrt(s² + (1−s)²)
        esp = spectral_gap(QuboProblem([[0.0]], [1.0]), 101)
        assert esp.min_gap == pytest.approx(math.sqrt(2.0))
        assert esp.argmin_s == pytest.approx(0.5)
        assert esp.ground_degeneracy == 1

    def test_niveis_contra_eigvalsh(self, rng):
        p = random_problem(rng, 3)
        esp = spectral_gap(p, 11)
        for s, niveis in zip(esp.grid, esp.levels):
            np.testing.assert_allclose(
                niveis, np.linalg.eigvalsh(build_anneal_hamiltonian(p, s)), atol=1e-10
            )

    def test_offset_nao_muda_gap(self, rng):
        p = random_problem(rng, 3, offset=False)
        q = QuboProblem(p.Q, p.s, 17.5)
        assert spectral_gap(p, 21).min_gap == pytest.approx(spectral_gap(q, 21).min_gap, abs=1e-9)

    def test_grade_mais_fina_nao_aumenta_gap(self, rng):
        p = random_problem(rng, 4)
        assert spectral_gap(p, 201).min_gap <= spectral_gap(p, 101).min_gap + 1e-12

    def test_workers(self, rng):
        p = random_problem(rng, 3)
        np.testing.assert_array_equal(spectral_gap(p, 15, workers=3).levels, spectral_gap(p, 15).levels)

    def test_problema_nulo_degenerado(self):
        esp = spectral_gap(QuboProblem.zeros(2), 11)
        assert esp.ground_degeneracy == 4
        assert math.isnan(esp.refined_gap)
        assert esp.min_gap == pytest.approx(0.0, abs=1e-12)

    def test_gap_refinado_com_fundamental_degenerado(self):
        # energia g0·g1: dois fundamentais (+1,−1) e (−1,+1)
        p = QuboProblem([[0.0, 0.5], [0.5, 0.0]], [0.0, 0.0])
        esp = spectral_gap(p, 51)
        assert esp.ground_degeneracy == 2
        assert esp.refined_gap > 0.0

    def test_dois_neuronios_diminuem_gap(self):
        diminuiu = 0
        for seed in range(5):
            rng = np.random.default_rng(seed)
            X = rng.normal(size=(5, 3))
            rdot = rng.normal(size=(5, 2))
            cmp = compare_neuron_gaps(X, rdot, 41)
            assert cmp.joint_gap == pytest.approx(min(cmp.single_gaps), abs=1e-8)
            diminuiu += cmp.decreases()
        assert diminuiu >= 4

    def test_neuronios_identicos_nao_diminuem_gap(self, rng):
        X = rng.normal(size=(4, 2))
        coluna = rng.normal(size=(4, 1))
        cmp = compare_neuron_gaps(X, np.hstack([coluna, coluna]), 21)
        assert cmp.single_gaps[0] == pytest.approx(cmp.single_gaps[1], abs=1e-12)
        assert not cmp.decreases()

    def test_neuronios_invalidos(self, rng):
        with pytest.raises(InvalidArgumentError):
            compare_neuron_gaps(rng.normal(size=(3, 2)), rng.normal(size=(3, 2)), 11, neurons=(1, 1))

    def test_gap_continuo_em_tres_grades(self, rng):
        p = random_problem(rng, 3)
        g51, g101, g201 = (spectral_gap(p, k).min_gap for k in (51, 101, 201))
        # gap é 2·‖H_P − H_B‖-Lipschitz em s; cada grade está contida na seguinte
        diag = np.diag(build_anneal_hamiltonian(p, 1.0))
        lipschitz = 2.0 * (p.n + float(np.abs(diag).max()))
        assert -1e-9 <= g51 - g101 <= lipschitz * 0.02 / 2
        assert -1e-9 <= g101 - g201 <= lipschitz * 0.01 / 2

    def test_layer_qubo_bloco_diagonal(self, rng):
        p = layer_qubo(rng.normal(size=(4, 2)), rng.normal(size=(4, 3)), 3)
        assert p.n == 6
        assert np.all(p.Q[:2, 2:] == 0.0)

    def test_grade_pequena(self):
        with pytest.raises(InvalidArgumentError):
            spectral_gap(QuboProblem.zeros(1), 2)

    def test_tabela(self, rng):
        esp = spectral_gap(random_problem(rng, 2), 5)
        assert isinstance(esp, AnnealSpectrum)
        df = esp.to_frame()
        assert list(df.columns) == ["s", "E_0", "E_1", "E_2", "E_3"]
        assert len(df) == 5
        assert list(esp.to_frame(max_levels=2).columns) == ["s", "E_0", "E_1"]
