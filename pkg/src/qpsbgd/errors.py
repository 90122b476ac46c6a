"""Exceções do pacote qpsbgd."""


class QpsbgdError(Exception):
    """Raiz de todos os erros levantados pelo pacote."""


class InvalidArgumentError(QpsbgdError, ValueError):
    pass


class CapacityError(QpsbgdError):
    pass


class SingularInputError(QpsbgdError):
    pass


class StateError(QpsbgdError):
    pass


class TransportError(QpsbgdError):
    pass


class ProtocolError(QpsbgdError):
    pass


class IntegrityError(QpsbgdError):
    pass


class EmptyTallyError(QpsbgdError):
    pass


class NumericError(QpsbgdError):
    pass


class FormatError(QpsbgdError):
    pass


class ParseError(FormatError):
    def __init__(self, mensagem: str, linha: int | None = None, caminho: str | None = None):
        self.linha = linha
        self.caminho = caminho
        prefixo = ""
        if caminho:
            prefixo += f"{caminho}:"
        if linha is not None:
            prefixo += f"{linha}: "
        elif prefixo:
            prefixo += " "
        super().__init__(prefixo + mensagem)


class ConfigError(QpsbgdError):
    def __init__(self, campos: list[str] | str):
        if isinstance(campos, str):
            campos = [campos]
        self.campos = list(campos)
        super().__init__("; ".join(self.campos))
