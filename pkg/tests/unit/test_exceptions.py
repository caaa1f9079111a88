"""Unit tests for the exception hierarchy"""

import pickle

from qclt.data_structures.exceptions import (
    BadStart,
    ConditionsViolated,
    ExitException,
    InvalidConfigurationException,
    NotInvertible,
    NotPD,
    NotPSD,
    StalledStart,
    StepOutOfDomain,
    UnstableExperiment,
)

ERRORS: tuple[ExitException, ...] = (
    NotPSD(-1e-3),
    NotInvertible(1e-3),
    NotPD(2.5e-14),
    BadStart(2),
    StalledStart(),
    StalledStart(4),
    StepOutOfDomain("Finite-difference steps leave the parameter box"),
    ConditionsViolated("design_lambda_min at n=50"),
    UnstableExperiment(7, 100),
    InvalidConfigurationException(),
)


def test_exceptions_survive_pickling() -> None:
    for error in ERRORS:
        restored = pickle.loads(pickle.dumps(error))
        assert type(restored) is type(error)
        assert restored.message == error.message, " ".join(
            (
                f"{type(error).__name__} changed its message across pickling",
                f"Expected: {error.message}",
                f"Observed: {restored.message}",
            )
        )
        assert restored.args == error.args
        assert restored.exit_code == error.exit_code


def test_exception_attributes_survive_pickling() -> None:
    restored = pickle.loads(pickle.dumps(NotInvertible(1e-3)))
    assert restored.lambda_min == 1e-3

    unstable = pickle.loads(pickle.dumps(UnstableExperiment(7, 100)))
    assert (unstable.failures, unstable.replications) == (7, 100)

    violated = pickle.loads(pickle.dumps(ConditionsViolated("corr_lambda_min")))
    assert violated.detail == "corr_lambda_min"
    assert violated.message == "Model conditions violated: corr_lambda_min"

    assert pickle.loads(pickle.dumps(BadStart(3))).index == 3
