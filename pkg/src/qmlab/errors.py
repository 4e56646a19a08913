"""Exception hierarchy shared by every module."""


class QmlabError(Exception):
    """Base class for all library errors."""


class IncompatibleShapeError(QmlabError, ValueError):
    """Operands live in algebras with different block structures."""


class NotHermitianError(QmlabError, ValueError):
    """An operation that needs a self-adjoint element received something else."""


class InvalidArgumentError(QmlabError, ValueError):
    """An argument is outside the domain of the operation."""


class NotAStateError(InvalidArgumentError):
    """A density fails positivity or normalisation."""


class UndefinedReductionError(QmlabError, ValueError):
    """Conditioning on an event whose probability is (numerically) zero."""


class NotCommutingError(QmlabError, ValueError):
    """Observables that must commute do not."""


class NotCompletelyPositiveError(QmlabError, ValueError):
    """A map fails the unitality or positivity checks."""


class BiasedMeasurementError(QmlabError, ValueError):
    """The setup does not satisfy M(pointer) == measured observable."""


class DegenerateGapError(QmlabError, ValueError):
    """Two pointer expectations coincide so a ratio bound is undefined."""


class PreconditionError(QmlabError, ValueError):
    """Hypotheses of a bound are violated.

    ``defects`` maps each hypothesis name to its measured defect.
    """

    def __init__(self, message: str, defects: dict | None = None):
        super().__init__(message)
        self.defects = dict(defects or {})


class SizeGuardError(QmlabError, ValueError):
    """A dense representation would exceed the configured dimension cap."""


class UnknownNameError(QmlabError, KeyError):
    """A suite, scenario or proposition identifier is not registered."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""
