"""Treino de redes neurais binárias por projeção QUBO do gradiente (QP-SBGD)."""

__version__ = "0.1.0"
