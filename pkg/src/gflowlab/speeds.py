"""Curvature speed functions and their restriction algebra.

A speed is a symmetric, 1-homogeneous, strictly monotone function
gamma: Gamma -> R_+ of the principal curvatures.  Three families are built
in:

* ``sum``          -- gamma(lam) = lam_1 + ... + lam_n (mean curvature),
* ``bh``           -- gamma(lam) = (sum_{i<j} (lam_i + lam_j)^{-1})^{-1},
* ``sigma_ratio``  -- gamma(lam) = sigma_k(lam) / sigma_{k-1}(lam).

Alongside gamma itself the module provides the two-argument restriction
F(x, y) = gamma(x, y, ..., y), its partial inverse f (the unique x >= 0
with F(x, y) = z), and the ellipticity ceiling Q = lim_{x->inf} F(x, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from . import _accel
from .errors import ConeViolation, DomainViolation

KINDS = ("sum", "bh", "sigma_ratio")

_KIND_CODES = {"sum": _accel.KIND_SUM, "bh": _accel.KIND_BH,
               "sigma_ratio": _accel.KIND_SIGMA}


def _elementary_symmetric(lam: np.ndarray) -> np.ndarray:
    """All elementary symmetric polynomials sigma_0..sigma_n of ``lam``."""
    e = np.zeros(lam.size + 1)
    e[0] = 1.0
    for x in lam:
        e[1:] = e[1:] + x * e[:-1]
    return e


@dataclass(frozen=True)
class CurvatureVector:
    """An ordered list of principal curvatures lam_1 <= ... <= lam_n."""

    entries: tuple

    def __post_init__(self):
        ent = tuple(float(x) for x in self.entries)
        if len(ent) < 2:
            raise ValueError("need at least two principal curvatures")
        if any(a > b for a, b in zip(ent, ent[1:])):
            raise ValueError("entries must be sorted ascending")
        object.__setattr__(self, "entries", ent)

    @property
    def n(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)


def _as_lambda(lam) -> np.ndarray:
    if isinstance(lam, CurvatureVector):
        return lam.as_array()
    arr = np.asarray(lam, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("curvature vector must be 1D with n >= 2 entries")
    return arr


class SpeedFunction:
    """A built-in curvature speed together with its cached constants.

    Instances are immutable in spirit: all state is set at construction.
    The cached constants are F(0,1), F(1,1), a_lin = dgamma^1(0,1,...,1)
    and the extrapolated ellipticity ceiling Q.
    """

    def __init__(self, kind: str, n: int, k: int | None = None):
        if kind not in KINDS:
            raise ValueError(f"unknown speed kind {kind!r}; choose from {KINDS}")
        n = int(n)
        if n < 2:
            raise ValueError("dimension n must be >= 2")
        if kind == "bh":
            if n < 3:
                raise ConeViolation(
                    "bh speed needs n >= 3: for n = 2 the pair structure is "
                    "degenerate and the inversion window collapses")
            k = None
        elif kind == "sigma_ratio":
            k = 2 if k is None else int(k)
            if k < 1:
                raise ValueError("sigma_ratio needs k >= 1")
            if n < k + 1:
                raise ConeViolation(
                    f"sigma_ratio(k={k}) needs n >= k+1 so the restriction "
                    "cone contains (0, 1, ..., 1)")
        else:
            k = None
        self.kind = kind
        self.n = n
        self.k = k
        self.code = _KIND_CODES[kind]
        if kind == "sum":
            self.params = (float(n - 1), 0.0, 0.0)
            self.concavity = "convex"
        elif kind == "bh":
            self.params = (float(n - 1), (n - 1) * (n - 2) / 4.0, 0.0)
            self.concavity = "concave"
        else:
            self.params = (float(math.comb(n - 1, k)),
                           float(math.comb(n - 1, k - 1)),
                           float(math.comb(n - 1, k - 2)) if k >= 2 else 0.0)
            self.concavity = "concave"
        self.F01 = self.F(0.0, 1.0)
        self.F11 = self.F(1.0, 1.0)
        self.a_lin = self.Fx(0.0, 1.0)
        self.Q = compute_Q(self)

    # -- full symmetric-function interface ---------------------------------

    def contains_cone(self, lam, margin: float = 0.0) -> bool:
        """Whether ``lam`` lies in the admissible cone (strictly, by ``margin``).

        sum/bh use the two-positive cone; sigma_ratio uses the Garding-type
        cone sigma_1 > 0, ..., sigma_k > 0 on which the ratio is positive
        and monotone.
        """
        arr = np.sort(_as_lambda(lam))
        if arr.size != self.n:
            return False
        if self.kind in ("sum", "bh"):
            return bool(arr[0] + arr[1] > margin)
        e = _elementary_symmetric(arr)
        return bool(np.all(e[1:self.k + 1] > margin))

    def _require(self, lam) -> np.ndarray:
        arr = _as_lambda(lam)
        if arr.size != self.n:
            raise ConeViolation(
                f"expected {self.n} curvatures, got {arr.size}")
        if not self.contains_cone(arr):
            raise ConeViolation(
                f"curvature vector {arr.tolist()} lies outside the cone of "
                f"the {self.kind} speed")
        return arr

    def gamma(self, lam) -> float:
        """Evaluate the speed at a curvature vector inside the cone."""
        arr = self._require(lam)
        if self.kind == "sum":
            return float(arr.sum())
        if self.kind == "bh":
            i, j = np.triu_indices(self.n, k=1)
            return float(1.0 / np.sum(1.0 / (arr[i] + arr[j])))
        e = _elementary_symmetric(arr)
        return float(e[self.k] / e[self.k - 1])

    def gradient(self, lam) -> np.ndarray:
        """Analytic gradient (dgamma^1, ..., dgamma^n) at ``lam``."""
        arr = self._require(lam)
        n = self.n
        if self.kind == "sum":
            return np.ones(n)
        if self.kind == "bh":
            g = self.gamma(arr)
            pair = arr[:, None] + arr[None, :]
            np.fill_diagonal(pair, np.inf)
            t = np.sum(1.0 / pair ** 2, axis=1)
            return g * g * t
        k = self.k
        e = _elementary_symmetric(arr)
        grad = np.empty(n)
        for i in range(n):
            reduced = _elementary_symmetric(np.delete(arr, i))
            dk = reduced[k - 1]
            dkm1 = reduced[k - 2] if k >= 2 else 0.0
            grad[i] = (e[k - 1] * dk - e[k] * dkm1) / e[k - 1] ** 2
        return grad

    # -- restriction algebra -------------------------------------------------

    @staticmethod
    def _num(x):
        return np.asarray(x, dtype=float) if np.ndim(x) else float(x)

    def F(self, x, y):
        """Restriction F(x, y) = gamma(x, y, ..., y)."""
        p0, p1, p2 = self.params
        return _accel.speed_F(self.code, p0, p1, p2, self._num(x), self._num(y))

    def Fx(self, x, y):
        """dF/dx, equal to dgamma^1 at (x, y, ..., y)."""
        p0, p1, p2 = self.params
        return _accel.speed_Fx(self.code, p0, p1, p2, self._num(x), self._num(y))

    def f_closed(self, y, z):
        """Closed-form partial inverse used by the jitted kernels.

        The generic numeric inverter lives in :class:`ImplicitInverse`;
        the two agree to roundoff and are cross-checked in the test suite.
        """
        p0, p1, p2 = self.params
        return _accel.speed_f(self.code, p0, p1, p2, self._num(y), self._num(z))

    @property
    def cone_factor(self) -> float:
        """c with x + c*y > 0 defining the restriction cone of (x, y, ..., y)."""
        if self.kind == "sigma_ratio":
            return (self.n - self.k) / self.k
        return 1.0

    # -- config fragment -----------------------------------------------------

    def to_config(self) -> dict:
        cfg = {"kind": self.kind, "n": self.n}
        if self.k is not None:
            cfg["k"] = self.k
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "SpeedFunction":
        return cls(cfg["kind"], cfg["n"], cfg.get("k"))

    def label(self) -> str:
        if self.kind == "sigma_ratio":
            return f"sigma_ratio(k={self.k}) n={self.n}"
        return f"{self.kind} n={self.n}"

    def __repr__(self):
        return f"SpeedFunction({self.label()})"


def evaluate_speed(speed: SpeedFunction, lam) -> float:
    """gamma(lam) for lam strictly inside the cone of ``speed``."""
    return speed.gamma(lam)


def speed_gradient(speed: SpeedFunction, lam) -> np.ndarray:
    """(dgamma^1, ..., dgamma^n)(lam); satisfies the Euler identity
    sum_i dgamma^i lam_i = gamma(lam) by 1-homogeneity."""
    return speed.gradient(lam)


def restriction_F(speed: SpeedFunction, x: float, y: float) -> float:
    """F(x, y) = gamma(x, y, ..., y); the argument must lie in the cone."""
    if y <= 0 or not speed.contains_cone(
            np.sort(np.concatenate([[x], np.full(speed.n - 1, y)]))):
        raise ConeViolation(f"({x}, {y}, ..., {y}) outside the cone")
    return float(speed.F(x, y))


def compute_Q(speed: SpeedFunction, growth_factor: float = 1e6) -> float:
    """Ellipticity ceiling Q = lim_{x->inf} F(x, 1) by ladder extrapolation.

    Evaluates F(10^j, 1), j = 0..12.  Unbounded growth (final value above
    growth_factor * F(1,1)) reports +inf; otherwise the limit is obtained
    by Richardson extrapolation of the last two ladder values, which is
    exact to machine precision for 1/x-type tails.
    """
    f11 = float(speed.F(1.0, 1.0))
    vals = [float(speed.F(10.0 ** j, 1.0)) for j in range(13)]
    if vals[-1] > growth_factor * f11:
        return math.inf
    return vals[-1] + (vals[-1] - vals[-2]) / 9.0


@dataclass
class ImplicitInverse:
    """Numeric partial inverse f with F(f(y, z), y) = z.

    Defined on the open cone U = {(y, z): F(0,1) < z/y < Q}.  Root finding
    is bracketing + bisection followed by a Newton polish; the residual
    satisfies |F(x, y) - z| <= tol * z.
    """

    speed: SpeedFunction
    tol: float = 1e-12

    def domain_cone(self) -> dict:
        return {"lower": self.speed.F01, "upper": self.speed.Q,
                "description": "F(0,1) < z/y < Q"}

    def __call__(self, y: float, z: float) -> float:
        y = float(y)
        z = float(z)
        if y <= 0.0 or z <= 0.0:
            raise DomainViolation("need y > 0 and z > 0")
        ratio = z / y
        if ratio <= self.speed.F01:
            raise DomainViolation(
                f"z/y = {ratio} <= F(0,1) = {self.speed.F01}")
        if ratio >= self.speed.Q:
            raise DomainViolation(f"z/y = {ratio} >= Q = {self.speed.Q}")

        lo = 0.0
        hi = max(y, 1.0)
        for _ in range(600):
            if self.speed.F(hi, y) >= z:
                break
            lo = hi
            hi *= 2.0
        else:  # pragma: no cover - excluded by the Q check above
            raise DomainViolation("failed to bracket the inverse")

        for _ in range(90):
            mid = 0.5 * (lo + hi)
            if self.speed.F(mid, y) < z:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * (1.0 + hi):
                break
        x = 0.5 * (lo + hi)
        for _ in range(8):
            res = self.speed.F(x, y) - z
            if abs(res) <= self.tol * z:
                break
            step = res / self.speed.Fx(x, y)
            x_new = x - step
            if not (lo <= x_new <= hi):
                x_new = 0.5 * (lo + hi)
            if res > 0:
                hi = x
            else:
                lo = x
            x = x_new
        return float(max(x, 0.0))


def invert_f(inv: ImplicitInverse, y: float, z: float) -> float:
    """The unique x >= 0 with F(x, y) = z, for (y, z) in U."""
    return inv(y, z)


def sample_cone_interior(speed: SpeedFunction, rng: np.random.Generator,
                         count: int, margin: float = 0.05) -> np.ndarray:
    """Random curvature vectors strictly inside the cone (for property tests)."""
    out = np.empty((count, speed.n))
    got = 0
    while got < count:
        lam = rng.uniform(-0.4, 3.0, size=speed.n)
        if speed.kind == "sigma_ratio":
            lam = rng.uniform(margin, 3.0, size=speed.n)
        if speed.contains_cone(lam, margin=margin):
            out[got] = np.sort(lam)
            got += 1
    return out
