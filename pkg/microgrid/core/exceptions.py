class BaseException(Exception):
    """
    Classe base para exceções personalizadas na aplicação.

    Herda da classe `Exception` embutida do Python e fornece funcionalidades
    para lidar com erros de forma mais específica e organizada. Cada
    subclasse define a mensagem padrão, o código de saída usado pela linha de
    comando e o status HTTP usado pelos controllers.
    """
    message: str = "Internal Server Error"
    exit_code: int = 1
    status_code: int = 500

    def __init__(self, message: str | None = None) -> None:
        if message:
            self.message = message
        super().__init__(self.message)


class ParseException(BaseException):
    """
    Erro de sintaxe ao ler um arquivo de problema, perfil ou solução.

    A mensagem carrega a localização (linha/coluna) quando disponível.
    """
    message = "Could not parse input file"
    exit_code = 2
    status_code = 422


class ProblemValidationException(BaseException):
    """
    Violação de um invariante do problema; a mensagem nomeia o campo.
    """
    message = "Invalid planning problem"
    exit_code = 2
    status_code = 422


class UnknownScenarioException(BaseException):
    message = "Unknown scenario"
    exit_code = 2
    status_code = 404


class ScenarioTechnologyException(BaseException):
    message = "Scenario references a technology absent from the catalog"
    exit_code = 2
    status_code = 422


class ModelSizeException(BaseException):
    message = "Model exceeds the configured size limit"
    exit_code = 2
    status_code = 413


class DimensionMismatchException(BaseException):
    message = "Dimension mismatch"
    exit_code = 2
    status_code = 422


class NumericalException(BaseException):
    """
    Falha numérica do simplex; a mensagem traz o contexto de linha/coluna.
    """
    message = "Numerical failure"


class InfeasibleException(BaseException):
    message = "Problem is infeasible"
    exit_code = 3
    status_code = 422


class LimitHitException(BaseException):
    message = "Solver limit reached"
    exit_code = 4
    status_code = 422


class NoIncumbentException(BaseException):
    message = "no incumbent"
    exit_code = 3
    status_code = 422


class VerificationException(BaseException):
    message = "Solution failed the feasibility check"
    exit_code = 5
    status_code = 422


class OracleBoundException(BaseException):
    message = "Instance exceeds the tiny-instance bounds"
    exit_code = 2
    status_code = 422


class FingerprintMismatchException(BaseException):
    message = "Reports do not share one problem fingerprint"
    exit_code = 2
    status_code = 422


class OutputWriteException(BaseException):
    message = "Could not write outputs"
