"""Shared fixtures: canonical instances and bundled data paths."""

from pathlib import Path

import numpy as np
import pytest

from adastep import (
    DiagonalQuadraticProblem,
    LogisticRegressionProblem,
    generate_quadratic,
    logistic_reference_optimum,
    parse_libsvm,
)

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "adastep" / "data"


@pytest.fixture(scope="session")
def two_component_1d() -> DiagonalQuadraticProblem:
    """f_1 = x^2/2, f_2 = (x-2)^2/2: x* = 1, f* = 1/2, sigma^2_{f,1} = 1/2."""
    return DiagonalQuadraticProblem(
        np.array([[1.0], [1.0]]), np.array([[0.0], [2.0]]), interpolated=False
    )


@pytest.fixture(scope="session")
def sc_instance() -> DiagonalQuadraticProblem:
    return generate_quadratic("strongly_convex", interpolated=False, n=50, d=100, seed=7)


@pytest.fixture(scope="session")
def sc_interp_instance() -> DiagonalQuadraticProblem:
    return generate_quadratic("strongly_convex", interpolated=True, n=50, d=100, seed=7)


@pytest.fixture(scope="session")
def gc_instance() -> DiagonalQuadraticProblem:
    return generate_quadratic("general_convex", interpolated=False, n=50, d=100, seed=7)


@pytest.fixture(scope="session")
def mini_corpus_path() -> Path:
    return DATA_DIR / "mini_corpus.libsvm"


@pytest.fixture(scope="session")
def synth2000_path() -> Path:
    return DATA_DIR / "synth2000.libsvm"


@pytest.fixture(scope="session")
def logistic_problem(synth2000_path) -> LogisticRegressionProblem:
    return LogisticRegressionProblem(parse_libsvm(synth2000_path))


@pytest.fixture(scope="session")
def logistic_reference(logistic_problem):
    return logistic_reference_optimum(logistic_problem)
