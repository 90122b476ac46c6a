"""
Projeto         : qpsbgd
Criado em       : 2026-10-19
Versão          : 0.1.0
Descrição       : cliente HTTP/JSON para um sampler QUBO remoto (annealer ou serviço hospedado)
Tipo            : integração
Módulo          : annealer_client
ID              : QPSBGD.SAMPLER.001

POST {base_url}/solve
  corpo:    {"n", "linear", "quadratic": [[i, j, J_ij], ...] (i < j), "offset", "num_reads"}
  resposta: {"samples": [[±1, ...], ...], "energies": [...]}
Variáveis de spin ±1 nos dois sentidos.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field

import numpy as np
import requests

from qpsbgd.config import carregar_cfg, exigir_cfg
from qpsbgd.errors import (
    IntegrityError,
    InvalidArgumentError,
    ProtocolError,
    TransportError,
)
from qpsbgd.qubo import QuboProblem, SolveResult, energy

logger = logging.getLogger(__name__)

TOL_ENERGIA_REMOTA = 1e-6


@dataclass(frozen=True)
class SamplerEndpoint:
    base_url: str
    auth_token: str | None = None
    num_reads: int = 100
    timeout: float = 30.0
    retries: int = 3
    backoff: float = 0.5

    def __post_init__(self):
        erros = []
        if not self.base_url:
            erros.append("base_url vazio")
        if self.num_reads < 1:
            erros.append(f"num_reads deve ser ≥ 1 (recebido {self.num_reads})")
        if not self.timeout > 0:
            erros.append(f"timeout deve ser > 0 (recebido {self.timeout})")
        if self.retries < 0:
            erros.append(f"retries deve ser ≥ 0 (recebido {self.retries})")
        if erros:
            raise InvalidArgumentError("; ".join(erros))

    @property
    def url(self) -> str:
        return self.base_url.rstrip("/") + "/solve"

    @classmethod
    def from_cfg(cls, cfg: dict | None = None) -> SamplerEndpoint:
        cfg = cfg if cfg is not None else carregar_cfg()
        exigir_cfg(cfg, ("SAMPLER_URL",))
        return cls(
            base_url=cfg["SAMPLER_URL"],
            auth_token=cfg.get("SAMPLER_TOKEN") or None,
            num_reads=int(cfg.get("SAMPLER_NUM_READS") or 100),
            timeout=float(cfg.get("SAMPLER_TIMEOUT") or 30.0),
        )


def problem_to_wire(p: QuboProblem, num_reads: int) -> dict:
    # para spins, gᵀQg = tr(Q) + Σ_{i<j} 2·Q_ij g_i g_j
    quadratic = [
        [i, j, 2.0 * float(p.Q[i, j])]
        for i in range(p.n)
        for j in range(i + 1, p.n)
        if p.Q[i, j] != 0.0
    ]
    return {
        "n": p.n,
        "linear": [float(x) for x in p.s],
        "quadratic": quadratic,
        "offset": float(p.offset + np.trace(p.Q)),
        "num_reads": int(num_reads),
    }


def _post(corpo: dict, ep: SamplerEndpoint, session: requests.Session) -> dict:
    headers = {"Content-Type": "application/json", "Accept": "application/json"}
    if ep.auth_token:
        headers["Authorization"] = f"Bearer {ep.auth_token}"

    for tentativa in range(ep.retries + 1):
        try:
            resp = session.post(ep.url, json=corpo, headers=headers, timeout=ep.timeout)
            if resp.status_code >= 500:
                raise requests.ConnectionError(f"HTTP {resp.status_code}")
            break
        except (requests.Timeout, requests.ConnectionError) as e:
            if tentativa == ep.retries:
                raise TransportError(
                    f"sampler em {ep.url} indisponível após {ep.retries + 1} tentativas: {e}"
                ) from e
            espera = ep.backoff * 2**tentativa
            logger.warning("falha no sampler (%s); nova tentativa em %.2fs", e, espera)
            time.sleep(espera)

    if resp.status_code >= 400:
        raise ProtocolError(f"sampler respondeu HTTP {resp.status_code}: {resp.text[:200]}")
    try:
        return resp.json()
    except ValueError as e:
        raise ProtocolError(f"resposta do sampler não é JSON: {e}") from e


def _amostras(dados, n: int) -> list[tuple[np.ndarray, float]]:
    if not isinstance(dados, dict):
        raise ProtocolError("resposta do sampler deve ser um objeto JSON")
    samples, energies = dados.get("samples"), dados.get("energies")
    if not isinstance(samples, list) or not isinstance(energies, list):
        raise ProtocolError("resposta sem `samples`/`energies`")
    if len(samples) != len(energies) or not samples:
        raise ProtocolError(
            f"{len(samples)} amostras para {len(energies)} energias na resposta do sampler"
        )

    pares = []
    for k, (amostra, e) in enumerate(zip(samples, energies)):
        try:
            g = np.asarray(amostra, dtype=np.float64)
            e = float(e)
        except (TypeError, ValueError):
            raise ProtocolError(f"amostra {k} mal formada") from None
        if g.shape != (n,) or not np.all((g == 1) | (g == -1)):
            raise ProtocolError(f"amostra {k} não é um vetor de {n} spins ±1")
        pares.append((g.astype(np.int8), e))
    return pares


def remote_solve(
    p: QuboProblem, ep: SamplerEndpoint, session: requests.Session | None = None
) -> SolveResult:
    sessao = session or requests.Session()
    try:
        dados = _post(problem_to_wire(p, ep.num_reads), ep, sessao)
    finally:
        if session is None:
            sessao.close()

    aceitas, rejeitadas = [], 0
    for g, reportada in _amostras(dados, p.n):
        recalculada = energy(p, g)
        if abs(reportada - recalculada) > TOL_ENERGIA_REMOTA:
            rejeitadas += 1
            continue
        aceitas.append((g, recalculada))

    if rejeitadas:
        logger.warning("%d amostra(s) com energia inconsistente descartada(s)", rejeitadas)
    if not aceitas:
        raise IntegrityError(
            f"todas as {rejeitadas} amostras do sampler têm energia inconsistente"
        )

    aceitas.sort(key=lambda par: (par[1], tuple(int(x) for x in par[0])))
    best, best_energy = aceitas[0]
    return SolveResult(best=best, best_energy=best_energy, samples=aceitas, reads=len(aceitas) + rejeitadas)


@dataclass
class RemoteSolver:
    """Uma requisição por vez por endpoint."""

    endpoint: SamplerEndpoint
    session: requests.Session = field(default_factory=requests.Session, repr=False)
    _trava: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def solve(self, problem: QuboProblem, *, key: tuple[int, ...] = ()) -> SolveResult:
        with self._trava:
            return remote_solve(problem, self.endpoint, self.session)

    def close(self) -> None:
        self.session.close()
