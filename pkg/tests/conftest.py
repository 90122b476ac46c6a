import gzip
import json
import struct
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from qpsbgd.qubo import QuboProblem, solve_exhaustive


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def sem_env(monkeypatch, tmp_path):
    # isola os testes de um .env local e das variáveis do ambiente
    monkeypatch.chdir(tmp_path)
    for chave in (
        "AMBIENTE",
        "SAMPLER_URL",
        "SAMPLER_TOKEN",
        "SAMPLER_NUM_READS",
        "SAMPLER_TIMEOUT",
        "RESULTS_DB_URL",
        "DATA_DIR",
        "OUT_DIR",
        "EXHAUSTIVE_CAP",
    ):
        monkeypatch.delenv(chave, raising=False)


def random_problem(rng, n, offset=True):
    A = rng.normal(size=(n, n))
    return QuboProblem.symmetrized(A, rng.normal(size=n), float(rng.normal()) if offset else 0.0)


def problem_from_wire(corpo):
    n = corpo["n"]
    Q = np.zeros((n, n))
    for i, j, J in corpo["quadratic"]:
        Q[i, j] = Q[j, i] = J / 2.0
    return QuboProblem(Q, corpo["linear"], corpo["offset"])


# ------------------------------
# Sampler de loopback
# ------------------------------
class SamplerFalso:
    """Servidor HTTP em processo que implementa POST /solve com busca exaustiva."""

    def __init__(self):
        self.modo = "ok"
        self.falhas = 0
        self.requisicoes = []
        servidor = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                tamanho = int(self.headers.get("Content-Length", 0))
                corpo = json.loads(self.rfile.read(tamanho))
                servidor.requisicoes.append({"path": self.path, "headers": dict(self.headers), "body": corpo})

                if servidor.falhas > 0:
                    servidor.falhas -= 1
                    self.send_response(503)
                    self.end_headers()
                    return

                if self.path != "/solve":
                    self.send_response(404)
                    self.end_headers()
                    return

                if servidor.modo == "malformed":
                    resposta = {"samples": [[1, 0]], "energies": [0.0]}
                else:
                    res = solve_exhaustive(problem_from_wire(corpo))
                    amostras = res.samples[: corpo["num_reads"]]
                    energias = [e for _, e in amostras]
                    if servidor.modo == "corrupt":
                        energias = [e + 1.0 for e in energias]
                    resposta = {
                        "samples": [[int(x) for x in g] for g, _ in amostras],
                        "energies": energias,
                    }

                dados = json.dumps(resposta).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(dados)))
                self.end_headers()
                self.wfile.write(dados)

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.httpd.server_address[1]}"
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def sampler_server():
    with SamplerFalso() as servidor:
        yield servidor


# ------------------------------
# Arquivos de dados
# ------------------------------
def escrever_idx(caminho, array, magic, comprimir=False):
    array = np.asarray(array, dtype=np.uint8)
    dados = struct.pack(">I", magic) + struct.pack(f">{array.ndim}I", *array.shape) + array.tobytes()
    if comprimir:
        with gzip.open(caminho, "wb") as f:
            f.write(dados)
    else:
        caminho.write_bytes(dados)
    return caminho


@pytest.fixture
def adult_dir(tmp_path):
    pasta = tmp_path / "adult"
    pasta.mkdir()
    (pasta / "a1a").write_text(
        "+1 3:1 7:1\n-1 1:1 2:1 123:1\n+1 5:1\n-1 7:1 9:1\n", encoding="utf-8"
    )
    (pasta / "a1a.t").write_text("-1 3:1\n+1 4:1 8:1\n", encoding="utf-8")
    return pasta


def imagem_um_lado():
    """Keypoints todos no semiplano positivo de todas as 16 retas."""
    img = np.zeros((28, 28), dtype=np.uint8)
    img[14, 0:3] = 255
    img[13, 16:26] = 76  # 0.3 do máximo, abaixo do limiar de keypoint
    return img


def imagem_simetrica():
    img = np.zeros((28, 28), dtype=np.uint8)
    for r, c in ((10, 10), (18, 18), (10, 18), (18, 10), (14, 8), (14, 20)):
        img[r, c] = 255
    return img


@pytest.fixture
def mnist_arrays(rng):
    """Imagens sintéticas dos dígitos 1 e 7 (retas verticais e diagonais)."""
    imagens, rotulos = [], []
    for k in range(40):
        img = np.zeros((28, 28), dtype=np.uint8)
        if k % 2 == 0:
            c = int(rng.integers(10, 18))
            img[4:24, c] = 255
            rotulos.append(1)
        else:
            img[5, 6:22] = 255
            for r in range(6, 24):
                img[r, max(0, 22 - (r - 5))] = 255
            rotulos.append(7)
        imagens.append(img)
    return np.array(imagens), np.array(rotulos, dtype=np.uint8)
