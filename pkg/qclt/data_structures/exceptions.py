from typing import Any, ClassVar, Optional

__all__ = (
    "ExitException",
    "InvalidConfigurationException",
    "ConditionsViolated",
    "UnstableExperiment",
    "NumericalException",
    "InvalidMatrix",
    "NotPSD",
    "NotInvertible",
    "NotPD",
    "InvalidArgument",
    "BadStart",
    "StalledStart",
    "StepOutOfDomain",
    "ModelInconsistency",
    "NotCentered",
    "DegenerateC",
    "TooFewSamples",
    "SizeMismatch",
    "TooLarge",
)


class ExitException(Exception):
    __slots__ = ("message",)
    exit_code: ClassVar[int] = 1

    def __init__(self, message: str, *args: object) -> None:
        self.message = message
        super().__init__(message, *args)

    def __reduce__(self) -> tuple[Any, ...]:
        # args hold the formatted message, not the constructor arguments
        state: dict[str, Any] = {
            name: getattr(self, name)
            for klass in type(self).__mro__
            for name in getattr(klass, "__slots__", ())
            if hasattr(self, name)
        }
        state.update(vars(self))
        return _restore, (type(self), self.args, state)


def _restore(
    cls: type[ExitException], args: tuple[Any, ...], state: dict[str, Any]
) -> ExitException:
    instance: ExitException = cls.__new__(cls)
    instance.args = args
    for name, value in state.items():
        setattr(instance, name, value)
    return instance


class InvalidConfigurationException(ExitException):
    exit_code: ClassVar[int] = 4

    def __init__(self, message: str = "Invalid configuration", *args: object) -> None:
        super().__init__(message, *args)


class ConditionsViolated(ExitException):
    __slots__ = ("detail",)
    exit_code: ClassVar[int] = 2

    def __init__(self, detail: str, *args: object) -> None:
        self.detail = detail
        super().__init__(f"Model conditions violated: {detail}", *args)


class UnstableExperiment(ExitException):
    __slots__ = ("failures", "replications")
    exit_code: ClassVar[int] = 3

    def __init__(self, failures: int, replications: int, *args: object) -> None:
        self.failures = failures
        self.replications = replications
        super().__init__(
            " ".join(
                (
                    f"{failures} of {replications} replications failed to minimize,",
                    "aborting experiment",
                )
            ),
            *args,
        )


class NumericalException(ExitException):
    """Base for errors raised by the numerical library"""


class InvalidMatrix(NumericalException):
    pass


class NotPSD(NumericalException):
    __slots__ = ("lambda_min",)

    def __init__(self, lambda_min: float, *args: object) -> None:
        self.lambda_min = lambda_min
        super().__init__(
            f"Matrix is not positive semi-definite, smallest eigenvalue {lambda_min:.6g}",
            *args,
        )


class NotInvertible(NumericalException):
    __slots__ = ("lambda_min",)

    def __init__(self, lambda_min: float, *args: object) -> None:
        self.lambda_min = lambda_min
        super().__init__(
            f"Matrix is numerically singular, smallest eigenvalue {lambda_min:.6g}",
            *args,
        )


class NotPD(NumericalException):
    __slots__ = ("lambda_min",)

    def __init__(self, lambda_min: float, *args: object) -> None:
        self.lambda_min = lambda_min
        super().__init__(
            f"Cholesky factorization failed, smallest eigenvalue {lambda_min:.6g}",
            *args,
        )


class InvalidArgument(NumericalException):
    pass


class BadStart(NumericalException):
    __slots__ = ("index",)

    def __init__(self, index: int, *args: object) -> None:
        self.index = index
        super().__init__(f"Objective is not finite at start {index}", *args)


class StalledStart(NumericalException):
    __slots__ = ("index",)

    def __init__(self, index: Optional[int] = None, *args: object) -> None:
        self.index = index
        super().__init__(
            (
                "Line search stalled on every start"
                if index is None
                else f"Line search stalled on start {index}"
            ),
            *args,
        )


class StepOutOfDomain(NumericalException):
    pass


class ModelInconsistency(NumericalException):
    pass


class NotCentered(NumericalException):
    pass


class DegenerateC(NumericalException):
    pass


class TooFewSamples(NumericalException):
    pass


class SizeMismatch(NumericalException):
    pass


class TooLarge(NumericalException):
    pass
