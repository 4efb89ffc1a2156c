"""
Hierarquia de exceções do toolkit.

Cada família carrega o código de saída usado pela CLI:
- 1: erro de uso (flags, opções conflitantes)
- 2: erro de dados/validação
- 3: falha numérica
"""

from typing import Any, Optional, Sequence


class ModerationError(Exception):
    """Erro base do toolkit"""

    exit_code: int = 3


# ==============================================================================
# USO (exit 1)
# ==============================================================================
class UsageError(ModerationError):
    """Flags desconhecidas, opções conflitantes ou campos obrigatórios ausentes"""

    exit_code = 1


# ==============================================================================
# DADOS / VALIDAÇÃO (exit 2)
# ==============================================================================
class DataValidationError(ModerationError):
    exit_code = 2


class NonBinaryColumnError(DataValidationError):
    def __init__(self, role: str, column: str, bad_value: Any):
        self.role = role
        self.column = column
        self.bad_value = bad_value
        super().__init__(f"non-binary {role}: coluna '{column}' contém o valor {bad_value!r}")


class MissingValueError(DataValidationError):
    def __init__(self, role: str, column: str, count: int):
        self.role = role
        self.column = column
        self.count = count
        super().__init__(
            f"missing/non-finite {role}: coluna '{column}' tem {count} valor(es) ausente(s) ou não finito(s)"
        )


class LengthMismatchError(DataValidationError):
    pass


class EmptyArmError(DataValidationError):
    def __init__(self, role: str, value: int):
        self.role = role
        self.value = value
        super().__init__(f"{role} sem nenhuma observação com valor {value}")


class MissingColumnError(DataValidationError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"coluna ausente: '{column}'")


class CsvParseError(DataValidationError):
    def __init__(self, row: int, column: str, raw: str):
        self.row = row
        self.column = column
        self.raw = raw
        super().__init__(f"falha ao interpretar '{raw}' na linha {row}, coluna '{column}'")


class EmptyCellError(DataValidationError):
    def __init__(self, cells: Sequence[str]):
        self.cells = tuple(cells)
        super().__init__(f"célula(s) (T,S) vazia(s): {', '.join(self.cells)}")


class SingleLevelModeratorError(DataValidationError):
    def __init__(self, treatment_level: int):
        self.treatment_level = treatment_level
        super().__init__(
            f"moderador com um único nível dentro do subconjunto T={treatment_level}"
        )


class InsufficientDataError(DataValidationError):
    pass


# ==============================================================================
# NUMÉRICO (exit 3)
# ==============================================================================
class NumericalError(ModerationError):
    exit_code = 3


class RankDeficiencyError(NumericalError):
    def __init__(self, columns: Sequence[str]):
        self.columns = tuple(columns)
        super().__init__(f"matriz de desenho com posto incompleto; colunas colineares: {', '.join(self.columns)}")


class SeparationError(NumericalError):
    def __init__(self, message: str, partial_fit: Optional[Any] = None):
        self.partial_fit = partial_fit
        super().__init__(message)


class DegenerateVarianceError(NumericalError):
    pass


class MixtureConvergenceError(NumericalError):
    def __init__(self, subset: int, iterations: int):
        self.subset = subset
        self.iterations = iterations
        super().__init__(
            f"EM não convergiu no subconjunto T={subset} após {iterations} iterações"
        )


class MatchingError(NumericalError):
    pass


class PropensityBoundsError(NumericalError):
    pass


class LevelCurveError(NumericalError):
    pass


class MonteCarloError(NumericalError):
    pass
