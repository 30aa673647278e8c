# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Second-order fully nonlinear operators F(x, xi, X) and their structural checks"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._errors import DegenerateGradientError, NumericError, ParameterError

SANDWICH_TOL = 1e-10


@dataclass(frozen=True)
class EllipticityPair:
    """Ellipticity constants 0 < lam <= Lam"""

    lam: float
    Lam: float

    def __post_init__(self):
        if not (self.lam > 0 and self.Lam >= self.lam and np.isfinite(self.Lam)):
            raise ParameterError(
                "ellipticity pair requires 0 < lambda <= Lambda < inf, "
                f"got ({self.lam}, {self.Lam})"
            )


@dataclass(frozen=True, eq=False)
class SymMat2:
    """
    Symmetric 2x2 matrix [[a11, a12], [a12, a22]].

    The entries may be scalars or arrays of a common shape, in which case the
    object stands for one matrix per array position.
    """

    a11: float | np.ndarray
    a12: float | np.ndarray
    a22: float | np.ndarray

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "SymMat2":
        """Build from an array of shape (..., 2, 2), symmetrising the off-diagonal"""
        matrix = np.asarray(matrix, dtype=float)
        off = 0.5 * (matrix[..., 0, 1] + matrix[..., 1, 0])
        return cls(matrix[..., 0, 0], off, matrix[..., 1, 1])

    @classmethod
    def identity(cls, scale: float = 1.0) -> "SymMat2":
        """scale * Id"""
        return cls(scale, 0.0, scale)

    @classmethod
    def diag(cls, d1: float, d2: float) -> "SymMat2":
        """Diagonal matrix"""
        return cls(d1, 0.0, d2)

    def to_array(self) -> np.ndarray:
        """Array of shape (..., 2, 2)"""
        a11, a12, a22 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in self.entries))
        return np.stack([np.stack([a11, a12], axis=-1), np.stack([a12, a22], axis=-1)], axis=-2)

    @property
    def entries(self) -> tuple:
        """(a11, a12, a22)"""
        return (self.a11, self.a12, self.a22)

    @property
    def trace(self):
        """a11 + a22"""
        return self.a11 + self.a22

    @property
    def det(self):
        """a11 * a22 - a12^2"""
        return self.a11 * self.a22 - self.a12 * self.a12

    @property
    def frobenius(self):
        """Frobenius norm"""
        return np.sqrt(self.a11**2 + 2.0 * self.a12**2 + self.a22**2)

    def eigenvalues(self) -> tuple[np.ndarray, np.ndarray]:
        """Closed-form eigenvalues (e1, e2) with e1 <= e2"""
        mean = 0.5 * (np.asarray(self.a11) + np.asarray(self.a22))
        radius = np.hypot(0.5 * (np.asarray(self.a11) - np.asarray(self.a22)), self.a12)
        return mean - radius, mean + radius

    def quadratic_form(self, v1, v2):
        """v^T X v"""
        return self.a11 * v1 * v1 + 2.0 * self.a12 * v1 * v2 + self.a22 * v2 * v2

    def inner(self, other: "SymMat2"):
        """Frobenius inner product tr(self * other)"""
        return self.a11 * other.a11 + 2.0 * self.a12 * other.a12 + self.a22 * other.a22

    def scaled(self, factor) -> "SymMat2":
        """factor * X"""
        return SymMat2(factor * self.a11, factor * self.a12, factor * self.a22)

    def take(self, index) -> "SymMat2":
        """Select array positions of every entry"""
        return SymMat2(*(np.broadcast_to(v, np.shape(self.a11))[index] for v in self.entries))

    def __add__(self, other: "SymMat2") -> "SymMat2":
        return SymMat2(self.a11 + other.a11, self.a12 + other.a12, self.a22 + other.a22)

    def __sub__(self, other: "SymMat2") -> "SymMat2":
        return SymMat2(self.a11 - other.a11, self.a12 - other.a12, self.a22 - other.a22)

    def __neg__(self) -> "SymMat2":
        return SymMat2(-self.a11, -self.a12, -self.a22)


class ModulusKind(Enum):
    """Families of moduli of continuity for the coefficient oscillation"""

    POWER = "power"
    LINEAR = "linear"
    GENERIC = "generic"


@dataclass(frozen=True)
class ModulusDescriptor:
    """
    Modulus of continuity omega of the coefficient oscillation.

    POWER means omega(t) = constant * t^alpha, LINEAR means omega(t) = constant * t.
    GENERIC wraps an arbitrary callable and cannot be inverted.
    """

    kind: ModulusKind
    alpha: float = 1.0
    constant: float = 1.0
    func: Callable[[float], float] | None = None

    def __call__(self, t: float) -> float:
        if self.kind is ModulusKind.POWER:
            return self.constant * t**self.alpha
        if self.kind is ModulusKind.LINEAR:
            return self.constant * t
        if self.func is None:
            raise ParameterError("generic modulus descriptor without a function")
        return float(self.func(t))

    def inverse(self, s: float) -> float:
        """
        omega^{-1}(s).

        Raises:
            ParameterError: If the descriptor cannot be inverted in closed form.
        """
        if self.constant <= 0:
            raise ParameterError(f"modulus with constant {self.constant} is not invertible")
        if self.kind is ModulusKind.POWER:
            if self.alpha <= 0:
                raise ParameterError(f"power modulus needs alpha > 0, got {self.alpha}")
            return (s / self.constant) ** (1.0 / self.alpha)
        if self.kind is ModulusKind.LINEAR:
            return s / self.constant
        raise ParameterError(f"modulus of kind '{self.kind.value}' has no closed-form inverse")


def _split(v) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(v, dtype=float)
    return arr[..., 0], arr[..., 1]


def pucci_plus(X: SymMat2, e: EllipticityPair):
    """Lam * (sum of positive eigenvalues) + lam * (sum of negative eigenvalues)"""
    total = 0.0
    for eig in X.eigenvalues():
        total = total + np.where(eig > 0, e.Lam * eig, e.lam * eig)
    return total


def pucci_minus(X: SymMat2, e: EllipticityPair):
    """lam * (sum of positive eigenvalues) + Lam * (sum of negative eigenvalues)"""
    total = 0.0
    for eig in X.eigenvalues():
        total = total + np.where(eig > 0, e.lam * eig, e.Lam * eig)
    return total


def normalized_p_laplacian(xi, X: SymMat2, p: float, fallback: bool = False):
    """
    tr[(Id + (p - 2) xi (x) xi / |xi|^2) X].

    Raises:
        DegenerateGradientError: If xi vanishes somewhere and the trace
        fallback is not enabled.
    """
    xi1, xi2 = _split(xi)
    norm2 = xi1 * xi1 + xi2 * xi2
    vanishing = norm2 == 0
    if np.any(vanishing) and not fallback:
        raise DegenerateGradientError(
            "normalized p-Laplacian is undefined for a vanishing gradient"
        )
    safe = np.where(vanishing, 1.0, norm2)
    directional = X.quadratic_form(xi1, xi2) / safe
    return X.trace + np.where(vanishing, 0.0, (p - 2.0) * directional)


def infinity_laplacian(xi, X: SymMat2):
    """xi^T X xi, not normalized"""
    xi1, xi2 = _split(xi)
    return X.quadratic_form(xi1, xi2)


def _odd_root(y, m: int):
    return np.sign(y) * np.abs(y) ** (1.0 / m)


def m_momentum(X: SymMat2, m: int, sigma: Sequence[float]):
    """
    sum_j (sigma_j^m + e_j(X)^m)^{1/m} - sum_j sigma_j, eigenvalues ascending.

    Raises:
        ParameterError: If m is not an odd integer >= 3 or some sigma_j <= 0.
    """
    _validate_m_momentum(m, sigma)
    total = -float(sum(sigma))
    for s, eig in zip(sigma, X.eigenvalues()):
        total = total + _odd_root(s**m + np.asarray(eig) ** m, m)
    return total


def _validate_m_momentum(m: int, sigma: Sequence[float]) -> None:
    if int(m) != m or m < 3 or m % 2 == 0:
        raise ParameterError(f"m must be an odd integer >= 3, got {m}")
    if len(sigma) != 2 or any(s <= 0 for s in sigma):
        raise ParameterError(f"sigma must hold two positive reals, got {tuple(sigma)}")


def m_momentum_ellipticity(
    sigma: Sequence[float], m: int, window: tuple[float, float]
) -> EllipticityPair:
    """
    Ellipticity pair of the m-momentum operator for matrices whose spectrum
    lies in `window` = [a, b] with 0 < a < b.

    The derivative of t -> (s^m + t^m)^{1/m} equals (t^m / (s^m + t^m))^{(m-1)/m},
    increasing in t and decreasing in s, so the extremes sit at the corners.
    """
    _validate_m_momentum(m, sigma)
    low, high = window
    if not 0 < low < high:
        raise ParameterError(f"spectral window must satisfy 0 < a < b, got {window}")

    def slope(t: float, s: float) -> float:
        return (t**m / (s**m + t**m)) ** ((m - 1) / m)

    return EllipticityPair(slope(low, max(sigma)), slope(high, min(sigma)))


@dataclass(frozen=True, kw_only=True)
class OperatorSpec:
    """
    Base of the operator zoo. Every variant evaluates F(x, xi, X) on arrays.

    `modulus` and `C_F` describe the coefficient oscillation for the smallness
    regime. A `spectral_window` restricts the matrices on which the declared
    ellipticity pair holds.
    """

    ellipticity: EllipticityPair | None = None
    modulus: ModulusDescriptor | None = None
    C_F: float = 0.0
    spectral_window: tuple[float, float] | None = None

    name = "operator"

    def evaluate(self, x, xi, X: SymMat2):
        """F(x, xi, X) at arrays of points (..., 2), gradients (..., 2) and matrices"""
        raise NotImplementedError

    def __call__(self, x, xi, X: SymMat2):
        return self.evaluate(x, xi, X)

    @property
    def x_dependent(self) -> bool:
        """Whether the coefficients vary with x"""
        return False

    def ellipticity_bound(self, xi) -> float:
        """Upper ellipticity constant over the given gradients, for step size control"""
        if self.ellipticity is None:
            raise ParameterError(f"operator '{self.name}' has no ellipticity pair")
        return self.ellipticity.Lam

    def sandwich_pair(self, xi) -> tuple[float, float]:
        """(lam, Lam) used by the sandwich check at a fixed gradient"""
        if self.ellipticity is None:
            raise ParameterError(f"operator '{self.name}' has no ellipticity pair")
        return self.ellipticity.lam, self.ellipticity.Lam


@dataclass(frozen=True, kw_only=True)
class PucciPlus(OperatorSpec):
    """Maximal Pucci operator. `monotone` selects the wide-stencil discretization"""

    monotone: bool = False
    name = "pucci_plus"

    def __post_init__(self):
        if self.ellipticity is None:
            raise ParameterError("Pucci operators need an ellipticity pair")

    def evaluate(self, x, xi, X: SymMat2):
        return pucci_plus(X, self.ellipticity)


@dataclass(frozen=True, kw_only=True)
class PucciMinus(OperatorSpec):
    """Minimal Pucci operator"""

    monotone: bool = False
    name = "pucci_minus"

    def __post_init__(self):
        if self.ellipticity is None:
            raise ParameterError("Pucci operators need an ellipticity pair")

    def evaluate(self, x, xi, X: SymMat2):
        return pucci_minus(X, self.ellipticity)


def constant_coefficient(matrix: SymMat2) -> Callable[[np.ndarray, np.ndarray], SymMat2]:
    """Coefficient field A(x) = matrix"""

    def coefficient(x1: np.ndarray, x2: np.ndarray) -> SymMat2:
        ones = np.ones(np.broadcast(x1, x2).shape)
        return SymMat2(matrix.a11 * ones, matrix.a12 * ones, matrix.a22 * ones)

    return coefficient


@dataclass(frozen=True, kw_only=True)
class LinearTrace(OperatorSpec):
    """tr(A(x) X) for a symmetric coefficient field A"""

    coefficient: Callable[[np.ndarray, np.ndarray], SymMat2] = field(
        default=constant_coefficient(SymMat2.identity())
    )
    varying: bool = False
    name = "trace"

    def __post_init__(self):
        if self.ellipticity is None:
            object.__setattr__(self, "ellipticity", EllipticityPair(1.0, 1.0))

    def evaluate(self, x, xi, X: SymMat2):
        x1, x2 = _split(x)
        return self.coefficient(x1, x2).inner(X)

    @property
    def x_dependent(self) -> bool:
        return self.varying


@dataclass(frozen=True, kw_only=True)
class BellmanInf(OperatorSpec):
    """inf over a finite family of constant coefficient matrices of tr(A X)"""

    matrices: tuple[SymMat2, ...] = ()
    name = "bellman_inf"

    def __post_init__(self):
        if not self.matrices:
            raise ParameterError("Bellman family must not be empty")
        if self.ellipticity is None:
            raise ParameterError("Bellman operators need an ellipticity pair")
        for index, matrix in enumerate(self.matrices):
            low, high = matrix.eigenvalues()
            if low < self.ellipticity.lam - 1e-12 or high > self.ellipticity.Lam + 1e-12:
                raise ParameterError(
                    f"Bellman matrix {index} has spectrum [{low}, {high}] outside "
                    f"[{self.ellipticity.lam}, {self.ellipticity.Lam}]"
                )

    def evaluate(self, x, xi, X: SymMat2):
        values = [matrix.inner(X) for matrix in self.matrices]
        return np.minimum.reduce(np.broadcast_arrays(*values))


def default_bellman_family(e: EllipticityPair) -> tuple[SymMat2, ...]:
    """Two axis-aligned and one rotated matrix with spectrum {lam, Lam}"""
    mean, half = 0.5 * (e.lam + e.Lam), 0.5 * (e.Lam - e.lam)
    return (SymMat2.diag(e.lam, e.Lam), SymMat2.diag(e.Lam, e.lam), SymMat2(mean, half, mean))


@dataclass(frozen=True, kw_only=True)
class MMomentum(OperatorSpec):
    """m-momentum operator; uniformly elliptic only on a positive spectral window"""

    m: int = 3
    sigma: tuple[float, float] = (1.0, 1.0)
    name = "m_momentum"

    def __post_init__(self):
        _validate_m_momentum(self.m, self.sigma)
        if self.ellipticity is None and self.spectral_window is not None:
            object.__setattr__(
                self,
                "ellipticity",
                m_momentum_ellipticity(self.sigma, self.m, self.spectral_window),
            )

    def evaluate(self, x, xi, X: SymMat2):
        return m_momentum(X, self.m, self.sigma)

    def ellipticity_bound(self, xi) -> float:
        # slope of every eigen-term is at most 1 on nonnegative spectra
        return 1.0 if self.ellipticity is None else self.ellipticity.Lam


@dataclass(frozen=True, kw_only=True)
class NormalizedPLaplacian(OperatorSpec):
    """Normalized p-Laplacian. With `fallback`, a vanishing gradient yields tr X"""

    p: float = 2.0
    fallback: bool = False
    name = "p_laplacian"

    def __post_init__(self):
        if self.p <= 1:
            raise ParameterError(f"normalized p-Laplacian needs p > 1, got {self.p}")
        if self.ellipticity is None:
            object.__setattr__(
                self,
                "ellipticity",
                EllipticityPair(min(self.p - 1.0, 1.0), max(self.p - 1.0, 1.0)),
            )

    def evaluate(self, x, xi, X: SymMat2):
        return normalized_p_laplacian(xi, X, self.p, fallback=self.fallback)


@dataclass(frozen=True, kw_only=True)
class InfinityLaplacian(OperatorSpec):
    """Un-normalized infinity Laplacian, degenerate elliptic with pair (0, |xi|^2)"""

    name = "infinity_laplacian"

    def evaluate(self, x, xi, X: SymMat2):
        return infinity_laplacian(xi, X)

    def ellipticity_bound(self, xi) -> float:
        xi1, xi2 = _split(xi)
        return max(float(np.max(xi1 * xi1 + xi2 * xi2, initial=0.0)), 1.0)

    def sandwich_pair(self, xi) -> tuple[float, float]:
        xi1, xi2 = _split(xi)
        return 0.0, float(xi1 * xi1 + xi2 * xi2)


@dataclass(frozen=True, kw_only=True)
class FrozenAt(OperatorSpec):
    """The inner operator with its coefficients frozen at x0"""

    x0: tuple[float, float] = (0.0, 0.0)
    inner: OperatorSpec = field(default_factory=LinearTrace)
    name = "frozen"

    def __post_init__(self):
        if self.ellipticity is None:
            object.__setattr__(self, "ellipticity", self.inner.ellipticity)

    def evaluate(self, x, xi, X: SymMat2):
        shape = np.broadcast(np.asarray(X.a11), np.asarray(xi, dtype=float)[..., 0]).shape
        frozen = np.broadcast_to(np.asarray(self.x0, dtype=float), shape + (2,))
        return self.inner.evaluate(frozen, xi, X)

    def ellipticity_bound(self, xi) -> float:
        return self.inner.ellipticity_bound(xi)

    def sandwich_pair(self, xi) -> tuple[float, float]:
        return self.inner.sandwich_pair(xi)


@dataclass(frozen=True, kw_only=True)
class Rescaled(OperatorSpec):
    """(tau^2 / kappa) * F(x0 + tau x, (kappa / tau) xi, (kappa / tau^2) X)"""

    kappa: float = 1.0
    tau: float = 1.0
    x0: tuple[float, float] = (0.0, 0.0)
    inner: OperatorSpec = field(default_factory=LinearTrace)
    name = "rescaled"

    def __post_init__(self):
        if self.kappa <= 0 or self.tau <= 0:
            raise ParameterError(f"kappa and tau must be positive, got {self.kappa}, {self.tau}")
        if self.ellipticity is None:
            object.__setattr__(self, "ellipticity", self.inner.ellipticity)

    def evaluate(self, x, xi, X: SymMat2):
        x = np.asarray(x, dtype=float)
        moved = np.asarray(self.x0, dtype=float) + self.tau * x
        scaled_xi = (self.kappa / self.tau) * np.asarray(xi, dtype=float)
        scaled_X = X.scaled(self.kappa / self.tau**2)
        return (self.tau**2 / self.kappa) * self.inner.evaluate(moved, scaled_xi, scaled_X)

    @property
    def x_dependent(self) -> bool:
        return self.inner.x_dependent

    def ellipticity_bound(self, xi) -> float:
        return self.inner.ellipticity_bound((self.kappa / self.tau) * np.asarray(xi, dtype=float))

    def sandwich_pair(self, xi) -> tuple[float, float]:
        return self.inner.sandwich_pair(xi)


def evaluate(op: OperatorSpec, x, xi, X: SymMat2):
    """Evaluate an operator of the zoo"""
    return op.evaluate(x, xi, X)


def recession(
    op: OperatorSpec, X: SymMat2, tau: float, x=(0.0, 0.0), xi=(1.0, 0.0)
) -> float | np.ndarray:
    """
    tau * F(x, xi, X / tau), one step towards the recession operator.

    Raises:
        ParameterError: If tau <= 0.
        NumericError: If the evaluation overflows.
    """
    if tau <= 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    with np.errstate(over="ignore", invalid="ignore"):
        value = tau * np.asarray(op.evaluate(x, xi, X.scaled(1.0 / tau)), dtype=float)
    if not np.all(np.isfinite(value)):
        raise NumericError(f"recession evaluation overflowed at tau={tau}")
    return value if value.ndim else float(value)


def recession_sequence(
    op: OperatorSpec,
    X: SymMat2,
    taus: Sequence[float],
    reference: float,
    x=(0.0, 0.0),
    xi=(1.0, 0.0),
) -> list[float]:
    """|tau F(X / tau) - reference| for every tau"""
    return [abs(float(recession(op, X, tau, x=x, xi=xi)) - reference) for tau in taus]


def random_symmetric(rng: np.random.Generator, size: int, low=-1.0, high=1.0) -> SymMat2:
    """Matrices with independent uniform entries in [low, high]"""
    entries = rng.uniform(low, high, size=(3, size))
    return SymMat2(entries[0], entries[1], entries[2])


def random_with_spectrum(
    rng: np.random.Generator, size: int, window: tuple[float, float], signed: bool = False
) -> SymMat2:
    """
    Matrices R diag(e1, e2) R^T with e_i uniform in window and random rotation R.

    With `signed`, the window bounds |e_i| and each eigenvalue gets a random sign.
    """
    eig = rng.uniform(window[0], window[1], size=(2, size))
    if signed:
        eig = eig * rng.choice((-1.0, 1.0), size=(2, size))
    angle = rng.uniform(0.0, np.pi, size=size)
    c, s = np.cos(angle), np.sin(angle)
    return SymMat2(
        c * c * eig[0] + s * s * eig[1],
        c * s * (eig[0] - eig[1]),
        s * s * eig[0] + c * c * eig[1],
    )


def random_unit_frobenius(rng: np.random.Generator, size: int) -> SymMat2:
    """Matrices distributed uniformly on the unit Frobenius sphere"""
    v = rng.standard_normal(size=(3, size))
    v /= np.linalg.norm(v, axis=0)
    return SymMat2(v[0], v[1] / np.sqrt(2.0), v[2])


@dataclass
class SandwichReport:
    """Outcome of the uniform ellipticity check. Violations are (sample, margin)"""

    samples: int
    lam: float
    Lam: float
    lower_violations: list[tuple[int, float]] = field(default_factory=list)
    upper_violations: list[tuple[int, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """No violation beyond tolerance"""
        return not self.lower_violations and not self.upper_violations


def sandwich_check(
    op: OperatorSpec,
    samples: int,
    seed: int,
    xi=(1.0, 0.0),
    tol: float = SANDWICH_TOL,
) -> SandwichReport:
    """
    Check M^-(X - Y) <= F(x, xi, X) - F(x, xi, Y) <= M^+(X - Y) on random pairs.

    Matrices have entries in [-1, 1], or spectrum in the operator's spectral
    window if it declares one. Points are drawn from [-0.5, 0.5]^2.

    Args:
        op (OperatorSpec): The operator to check.
        samples (int): Number of random pairs.
        seed (int): Seed of the random generator.
        xi: Fixed gradient used for gradient-dependent operators.
        tol (float): Allowed violation.

    Returns:
        SandwichReport: The violations found, as data.
    """
    if samples < 1:
        raise ParameterError(f"samples must be at least 1, got {samples}")
    rng = np.random.default_rng(seed)
    if op.spectral_window is not None:
        X = random_with_spectrum(rng, samples, op.spectral_window)
        Y = random_with_spectrum(rng, samples, op.spectral_window)
    else:
        X = random_symmetric(rng, samples)
        Y = random_symmetric(rng, samples)
    points = rng.uniform(-0.5, 0.5, size=(samples, 2))
    grads = np.broadcast_to(np.asarray(xi, dtype=float), (samples, 2))

    lam, Lam = op.sandwich_pair(np.asarray(xi, dtype=float))
    diff = op.evaluate(points, grads, X) - op.evaluate(points, grads, Y)
    low_e, high_e = (X - Y).eigenvalues()
    lower = lam * np.maximum(low_e, 0) + Lam * np.minimum(low_e, 0)
    lower = lower + lam * np.maximum(high_e, 0) + Lam * np.minimum(high_e, 0)
    upper = Lam * np.maximum(low_e, 0) + lam * np.minimum(low_e, 0)
    upper = upper + Lam * np.maximum(high_e, 0) + lam * np.minimum(high_e, 0)

    report = SandwichReport(samples=samples, lam=lam, Lam=Lam)
    for index in np.flatnonzero(lower - diff > tol):
        report.lower_violations.append((int(index), float(lower[index] - diff[index])))
    for index in np.flatnonzero(diff - upper > tol):
        report.upper_violations.append((int(index), float(diff[index] - upper[index])))
    if not report.passed:
        logging.info(
            "Operator '%s' violates its ellipticity pair in %s of %s samples",
            op.name,
            len(report.lower_violations) + len(report.upper_violations),
            samples,
        )
    return report


def coefficient_oscillation(
    op: OperatorSpec, x, x0, samples: int, seed: int = 0, xi=(1.0, 0.0)
) -> float:
    """
    Monte-Carlo estimate of sup_{|X| = 1} |F(x, xi, X) - F(x0, xi, X)|.

    Returns 0 for x = x0 and for operators without x-dependence.
    """
    if samples < 1:
        raise ParameterError(f"samples must be at least 1, got {samples}")
    if tuple(map(float, x)) == tuple(map(float, x0)) or not op.x_dependent:
        return 0.0
    rng = np.random.default_rng(seed)
    X = random_unit_frobenius(rng, samples)
    grads = np.broadcast_to(np.asarray(xi, dtype=float), (samples, 2))
    here = op.evaluate(np.broadcast_to(np.asarray(x, dtype=float), (samples, 2)), grads, X)
    there = op.evaluate(np.broadcast_to(np.asarray(x0, dtype=float), (samples, 2)), grads, X)
    return float(np.max(np.abs(here - there)))


def operator_from_name(
    name: str,
    lam: float = 1.0,
    Lam: float = 1.0,
    p: float = 2.0,
    m: int = 3,
    sigma: tuple[float, float] = (1.0, 1.0),
    monotone: bool = False,
    fallback: bool = True,
) -> OperatorSpec:
    """
    Construct an operator of the zoo from its configuration name.

    Raises:
        ParameterError: If the name is unknown or the parameters are invalid.
    """
    if name == "trace":
        return LinearTrace()
    if name == "pucci_plus":
        return PucciPlus(ellipticity=EllipticityPair(lam, Lam), monotone=monotone)
    if name == "pucci_minus":
        return PucciMinus(ellipticity=EllipticityPair(lam, Lam), monotone=monotone)
    if name == "bellman_inf":
        pair = EllipticityPair(lam, Lam)
        return BellmanInf(ellipticity=pair, matrices=default_bellman_family(pair))
    if name == "m_momentum":
        return MMomentum(m=m, sigma=sigma)
    if name == "p_laplacian":
        return NormalizedPLaplacian(p=p, fallback=fallback)
    if name == "infinity_laplacian":
        return InfinityLaplacian()
    raise ParameterError(f"unknown operator '{name}'")


OPERATOR_NAMES = (
    "trace",
    "pucci_plus",
    "pucci_minus",
    "bellman_inf",
    "m_momentum",
    "p_laplacian",
    "infinity_laplacian",
)
