"""Concrete problem instances with exact or high-precision reference optima.

Two families are provided:

* diagonal quadratics  f_i(x) = 1/2 (x - b_i)^T diag(a_i) (x - b_i),
  generated in four regimes (strongly convex / general convex, each
  interpolated or not) with a controlled Hessian spectrum, and
* L2-regularized logistic regression on sparse binary-classification
  data in LIBSVM text format.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np
import scipy.optimize
import scipy.sparse
from scipy.special import expit

from .problem_core import (
    ConfigurationError,
    FiniteSumProblem,
    as_params,
    make_rng,
)

PROBLEM_SCHEMA_VERSION = 1

# Spectrum targets for the generator: the general-convex instance places
# 20 column means at 2^-20 .. 2^-1 and the top one at 10; the strongly
# convex instance pins the extreme column means at 1 and 10.
_TINY_EIGS = 2.0 ** np.arange(-20, 0)  # 20 values, 2^-20 .. 2^-1
_TOP_EIG = 10.0
_CLIP_LO, _CLIP_HI = 1.0, 10.0


@dataclass(frozen=True)
class ReferenceOptimum:
    """Minimum of the full objective, with provenance of how it was found."""

    f_star: float
    x_star: np.ndarray
    method: str


class DiagonalQuadraticProblem(FiniteSumProblem):
    """Finite sum of diagonal quadratics 1/2 (x-b_i)^T diag(a_i) (x-b_i).

    ``lb_mode`` selects what :meth:`batch_lower_bound` returns: the exact
    closed-form minibatch minimum (default) or the generic bound 0.
    """

    def __init__(self, a, b, interpolated: bool, regime: str = "custom",
                 seed: int | None = None, lb_mode: str = "exact"):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.ndim != 2 or a.shape != b.shape:
            raise ConfigurationError(
                f"curvature/center shape mismatch: {a.shape} vs {b.shape}"
            )
        if np.any(a < 0):
            raise ConfigurationError("curvature entries must be non-negative")
        if lb_mode not in ("exact", "zero"):
            raise ConfigurationError(f"unknown lb_mode {lb_mode!r}")
        if interpolated and not np.all(b == b[0]):
            raise ConfigurationError("interpolated instance requires identical centers")
        self.a = a
        self.b = b
        self.n, self.dim = a.shape
        self.interpolated = interpolated
        self.regime = regime
        self.seed = seed
        self.lb_mode = lb_mode
        # O(d) closed forms for the full objective.
        self._a_mean = a.mean(axis=0)
        self._ab_mean = (a * b).mean(axis=0)
        self._abb_mean = float((a * b * b).sum(axis=1).mean())

    def batch_value(self, batch, x) -> float:
        diff = x[None, :] - self.b[batch]
        return float(0.5 * (self.a[batch] * diff * diff).sum(axis=1).mean())

    def batch_gradient(self, batch, x) -> np.ndarray:
        diff = x[None, :] - self.b[batch]
        return (self.a[batch] * diff).mean(axis=0)

    def full_value(self, x) -> float:
        return float(0.5 * (self._a_mean @ (x * x) - 2.0 * (self._ab_mean @ x)
                            + self._abb_mean))

    def full_gradient(self, x) -> np.ndarray:
        return self._a_mean * x - self._ab_mean

    def batch_lower_bound(self, batch) -> float:
        if self.lb_mode == "exact":
            return self.batch_min(batch)
        return 0.0

    def batch_min(self, batch) -> float:
        """Exact inf_x of the averaged batch quadratic, per coordinate."""
        if self.interpolated or len(batch) == 1:
            return 0.0  # a single component attains 0 at its own center
        a_bar = self.a[batch].mean(axis=0)
        ab_bar = (self.a[batch] * self.b[batch]).mean(axis=0)
        abb_bar = (self.a[batch] * self.b[batch] ** 2).mean(axis=0)
        active = a_bar > 0
        # coordinates with zero averaged curvature contribute zero
        residual = abb_bar[active] - ab_bar[active] ** 2 / a_bar[active]
        return float(0.5 * residual.sum())

    def smoothness_constant(self) -> tuple[float, bool]:
        return float(self.a.max()), True

    def strong_convexity_constant(self) -> float:
        """mu of the full objective: smallest averaged curvature."""
        return float(self._a_mean.min())


def generate_quadratic(regime: str, interpolated: bool, n: int, d: int,
                       seed: int, mask_density: float = 0.1) -> DiagonalQuadraticProblem:
    """Draw a diagonal-quadratic instance with a controlled spectrum.

    Both regimes start from curvature entries N(0, 15^2) clipped to
    [1, 10].  The strongly convex regime rescales two columns so the
    Hessian of the average has extreme eigenvalues exactly 1 and 10.
    The general convex regime first applies a Bernoulli(mask_density)
    sparsity mask (resampled until every column is nonempty), then
    rescales the first 20 column means onto 2^-20 .. 2^-1 and the last
    onto 10, leaving every component Hessian positive semi-definite.
    """
    if regime not in ("strongly_convex", "general_convex"):
        raise ConfigurationError(f"unknown regime {regime!r}")
    if n < 1:
        raise ConfigurationError("need n >= 1 components")
    if regime == "general_convex" and d < len(_TINY_EIGS) + 1:
        raise ConfigurationError(
            f"general_convex regime needs d >= {len(_TINY_EIGS) + 1}"
        )
    if d < 3:
        raise ConfigurationError("need d >= 3")

    rng = make_rng(seed)
    a = np.clip(rng.normal(0.0, 15.0, size=(n, d)), _CLIP_LO, _CLIP_HI)

    if regime == "strongly_convex":
        a[:, d - 2] *= 1.0 * n / a[:, d - 2].sum()
        a[:, d - 1] *= _TOP_EIG * n / a[:, d - 1].sum()
    else:
        mask = rng.random(size=(n, d)) < mask_density
        while True:
            empty = ~mask.any(axis=0)
            if not empty.any():
                break
            mask[:, empty] = rng.random(size=(n, int(empty.sum()))) < mask_density
        a = a * mask
        targets = np.ones(d)
        targets[: len(_TINY_EIGS)] = _TINY_EIGS
        targets[d - 1] = _TOP_EIG
        scaled = list(range(len(_TINY_EIGS))) + [d - 1]
        for j in scaled:
            a[:, j] *= targets[j] * n / a[:, j].sum()

    if interpolated:
        b = np.tile(rng.normal(0.0, 10.0, size=d), (n, 1))
    else:
        b = rng.normal(0.0, 10.0, size=(n, d))

    return DiagonalQuadraticProblem(a, b, interpolated=interpolated,
                                    regime=regime, seed=seed)


def quadratic_reference_optimum(problem: DiagonalQuadraticProblem) -> ReferenceOptimum:
    """Closed-form optimum of the averaged diagonal quadratic."""
    if problem.interpolated:
        return ReferenceOptimum(0.0, problem.b[0].copy(), "closed_form_interpolated")
    a_bar = problem._a_mean
    if np.any(a_bar <= 0):
        raise ConfigurationError("averaged curvature has a zero coordinate")
    x_star = problem._ab_mean / a_bar
    return ReferenceOptimum(problem.full_value(x_star), x_star, "closed_form")


def _iter_batches(n: int, batch_size: int, max_enumeration: int,
                  sample_count: int, seed: int):
    """All size-B subsets when cheap, else a seeded uniform sample."""
    if math.comb(n, batch_size) <= max_enumeration:
        for batch in combinations(range(n), batch_size):
            yield np.asarray(batch)
    else:
        rng = make_rng(seed, stream=7)
        for _ in range(sample_count):
            batch = rng.choice(n, size=batch_size, replace=False)
            batch.sort()
            yield batch


def sigma_f_B(problem: FiniteSumProblem, batch_size: int,
              sample_count: int = 10_000, seed: int = 0,
              reference: ReferenceOptimum | None = None) -> float:
    """Optimal objective difference f* - E[f*_B] (>= 0).

    Exact enumeration over all batches when there are at most 10^4 of
    them, otherwise a Monte-Carlo estimate over ``sample_count`` draws.
    Requires exact minibatch minima (quadratic problems).
    """
    if getattr(problem, "interpolated", False):
        return 0.0
    if reference is None:
        reference = quadratic_reference_optimum(problem)
    total, count = 0.0, 0
    for batch in _iter_batches(problem.n, batch_size, 10_000, sample_count, seed):
        fmin = problem.batch_min(batch)
        if fmin is None:
            raise ConfigurationError("sigma_f_B needs exact minibatch minima")
        total += fmin
        count += 1
    return reference.f_star - total / count


def err_f_B(problem: FiniteSumProblem, batch_size: int,
            sample_count: int = 10_000, seed: int = 0) -> float | None:
    """Estimation error E[f*_B - l*_B], or None when f*_B is unknown."""
    total, count = 0.0, 0
    for batch in _iter_batches(problem.n, batch_size, 10_000, sample_count, seed):
        fmin = problem.batch_min(batch)
        if fmin is None:
            return None
        total += fmin - problem.batch_lower_bound(batch)
        count += 1
    return total / count


# ---------------------------------------------------------------------------
# LIBSVM-format sparse datasets and regularized logistic regression
# ---------------------------------------------------------------------------


class LibsvmParseError(ValueError):
    """Malformed LIBSVM input; carries the (1-based) offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


DEFAULT_LABEL_MAP = {1.0: 1, -1.0: -1, 0.0: -1}


@dataclass
class SparseDataset:
    """Sparse binary-classification rows in CSR layout, labels in {-1,+1}.

    Column indices are 0-based internally and strictly increasing within
    each row; ``dim`` equals one plus the largest index seen.
    """

    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    labels: np.ndarray
    dim: int

    @property
    def n(self) -> int:
        return len(self.labels)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.values[lo:hi]

    def to_csr(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.csr_matrix(
            (self.values, self.indices, self.indptr), shape=(self.n, self.dim)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseDataset):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.labels, other.labels)
        )

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for arr in (self.indptr, self.indices, self.values, self.labels):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(str(self.dim).encode())
        return h.hexdigest()


def parse_libsvm(source, label_map: dict | None = None) -> SparseDataset:
    """Parse LIBSVM text ("<label> <idx>:<val> ...", 1-based indices).

    ``source`` may be a string, a path, or an iterable of lines.  Labels
    are mapped to {-1,+1} via ``label_map`` (default sends 0 and -1 to
    -1, and +1 to +1).  Blank lines are ignored; any other malformed
    content raises :class:`LibsvmParseError` with its line number.
    """
    if label_map is None:
        label_map = DEFAULT_LABEL_MAP
    if isinstance(source, Path):
        lines = source.read_text().splitlines()
    elif isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = [line.rstrip("\n") for line in source]

    labels: list[int] = []
    indptr = [0]
    indices: list[int] = []
    values: list[float] = []
    max_index = -1

    for line_no, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens:
            continue
        try:
            raw_label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(line_no, f"non-numeric label {tokens[0]!r}") from None
        if raw_label not in label_map:
            raise LibsvmParseError(line_no, f"unknown label {tokens[0]!r}")
        labels.append(label_map[raw_label])

        prev = 0
        for token in tokens[1:]:
            idx_str, sep, val_str = token.partition(":")
            if not sep:
                raise LibsvmParseError(line_no, f"malformed feature token {token!r}")
            try:
                idx = int(idx_str)
                val = float(val_str)
            except ValueError:
                raise LibsvmParseError(
                    line_no, f"non-numeric feature token {token!r}"
                ) from None
            if idx < 1:
                raise LibsvmParseError(line_no, f"feature index {idx} below 1")
            if idx <= prev:
                raise LibsvmParseError(
                    line_no, f"feature indices not strictly increasing at {token!r}"
                )
            prev = idx
            indices.append(idx - 1)
            values.append(val)
            max_index = max(max_index, idx - 1)
        indptr.append(len(indices))

    return SparseDataset(
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        values=np.asarray(values, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        dim=max_index + 1,
    )


def serialize_libsvm(dataset: SparseDataset) -> str:
    """Inverse of :func:`parse_libsvm`; float values round-trip bit-exactly."""
    out = io.StringIO()
    for i in range(dataset.n):
        idx, val = dataset.row(i)
        parts = ["+1" if dataset.labels[i] > 0 else "-1"]
        parts.extend(f"{j + 1}:{float(v)!r}" for j, v in zip(idx, val))
        out.write(" ".join(parts))
        out.write("\n")
    return out.getvalue()


class LogisticRegressionProblem(FiniteSumProblem):
    """f_i(x) = log(1 + exp(-y_i a_i^T x)) + (1/2n) ||x||^2.

    The losses are non-negative, so 0 is always a valid minibatch lower
    bound.  The log/exp is evaluated via logaddexp to stay stable for
    large margins.
    """

    def __init__(self, dataset: SparseDataset):
        self.dataset = dataset
        self.X = dataset.to_csr()
        self.y = dataset.labels.astype(np.float64)
        self.n = dataset.n
        self.dim = dataset.dim
        self.reg = 1.0 / (2.0 * self.n)  # coefficient on ||x||^2

    def _margins(self, batch, x) -> np.ndarray:
        return self.y[batch] * (self.X[batch] @ x)

    def batch_value(self, batch, x) -> float:
        m = self._margins(batch, x)
        return float(np.logaddexp(0.0, -m).mean() + self.reg * (x @ x))

    def batch_gradient(self, batch, x) -> np.ndarray:
        m = self._margins(batch, x)
        coef = -self.y[batch] * expit(-m)
        grad = np.asarray(self.X[batch].T @ coef).ravel() / len(batch)
        return grad + 2.0 * self.reg * x

    def full_value(self, x) -> float:
        return self.batch_value(np.arange(self.n), x)

    def full_gradient(self, x) -> np.ndarray:
        return self.batch_gradient(np.arange(self.n), x)

    def batch_lower_bound(self, batch) -> float:
        return 0.0

    def smoothness_constant(self) -> tuple[float, bool]:
        row_sq = np.asarray(self.X.multiply(self.X).sum(axis=1)).ravel()
        return float(row_sq.max() / 4.0 + 2.0 * self.reg), False


def logistic_reference_optimum(problem: LogisticRegressionProblem,
                               grad_tol: float = 1e-10) -> ReferenceOptimum:
    """High-precision optimum: L-BFGS warm start plus Newton polishing.

    Deterministic for a fixed dataset; fails loudly if the final
    full-gradient norm exceeds 1e-8.
    """
    x0 = np.zeros(problem.dim)
    res = scipy.optimize.minimize(
        problem.full_value, x0, jac=problem.full_gradient, method="L-BFGS-B",
        options={"maxiter": 2000, "ftol": 1e-18, "gtol": 1e-12},
    )
    x = res.x
    X = problem.X.toarray() if problem.dim <= 2000 else None
    for _ in range(50):
        grad = problem.full_gradient(x)
        if np.linalg.norm(grad) <= grad_tol or X is None:
            break
        m = problem.y * (X @ x)
        s = expit(-m)
        weights = s * (1.0 - s)
        hess = (X.T * weights) @ X / problem.n
        hess[np.diag_indices_from(hess)] += 2.0 * problem.reg
        x = x - np.linalg.solve(hess, grad)
    grad_norm = float(np.linalg.norm(problem.full_gradient(x)))
    if grad_norm > 1e-8:
        raise RuntimeError(
            f"reference optimum not converged: |grad| = {grad_norm:.3e}"
        )
    return ReferenceOptimum(problem.full_value(x), x, "lbfgs+newton")


# ---------------------------------------------------------------------------
# Problem (de)serialization for replayable experiments
# ---------------------------------------------------------------------------


def quadratic_to_dict(problem: DiagonalQuadraticProblem) -> dict:
    return {
        "schema_version": PROBLEM_SCHEMA_VERSION,
        "kind": "diagonal_quadratic",
        "regime": problem.regime,
        "interpolated": problem.interpolated,
        "seed": problem.seed,
        "lb_mode": problem.lb_mode,
        "a": problem.a.tolist(),
        "b": problem.b.tolist(),
    }


def save_problem(problem: DiagonalQuadraticProblem, path) -> None:
    Path(path).write_text(json.dumps(quadratic_to_dict(problem), sort_keys=True))


def load_problem(path) -> DiagonalQuadraticProblem:
    payload = json.loads(Path(path).read_text())
    if payload.get("schema_version") != PROBLEM_SCHEMA_VERSION:
        raise ConfigurationError(
            f"unsupported problem schema {payload.get('schema_version')!r}"
        )
    if payload.get("kind") != "diagonal_quadratic":
        raise ConfigurationError(f"unknown problem kind {payload.get('kind')!r}")
    return DiagonalQuadraticProblem(
        np.asarray(payload["a"]), np.asarray(payload["b"]),
        interpolated=payload["interpolated"], regime=payload["regime"],
        seed=payload["seed"], lb_mode=payload.get("lb_mode", "exact"),
    )


def problem_content_hash(problem: FiniteSumProblem) -> str:
    """Stable content hash used in trace headers to pin the instance."""
    if isinstance(problem, DiagonalQuadraticProblem):
        h = hashlib.sha256()
        h.update(problem.a.tobytes())
        h.update(problem.b.tobytes())
        h.update(problem.regime.encode())
        h.update(b"1" if problem.interpolated else b"0")
        return h.hexdigest()
    if isinstance(problem, LogisticRegressionProblem):
        return problem.dataset.content_hash()
    raise ConfigurationError(f"cannot hash problem of type {type(problem).__name__}")
