"""Mean-zero finitely supported vectors and the GNS form of a CND kernel.

For a conditionally negative definite kernel psi on a point set Y,

    <v, w>_psi = -sum_{x,y} v(x) w(y) psi(x, y) + sum_x v(x) w(x)

is an inner product on mean-zero finitely supported functions. The Banach
norm is ||v||_E = ||v||_psi + ||v||_1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (DegenerateForm, InvalidConfig, NegativeSelfInner, NotMeanZero,
                     SupportOutsidePoints)
from .kernels import SpectrumReport, cnd_check, jacobi_eigh

FLOAT_SUM_TOL = 1e-12


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction, np.integer)) and not isinstance(c, bool)


@dataclass(frozen=True)
class MeanZeroVector:
    coeffs: Mapping[Hashable, float] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        clean = {k: v for k, v in self.coeffs.items() if v != 0}
        total = sum(clean.values())
        exact = all(_is_exact(c) for c in clean.values())
        if (total != 0) if exact else abs(total) > FLOAT_SUM_TOL * max(1.0, self._l1(clean)):
            raise NotMeanZero(f"coefficients sum to {total}")
        object.__setattr__(self, "coeffs", clean)

    @staticmethod
    def _l1(c) -> float:
        return float(sum(abs(v) for v in c.values()))

    @classmethod
    def dipole(cls, x, y) -> "MeanZeroVector":
        """delta_x - delta_y."""
        return cls({} if x == y else {x: 1, y: -1})

    @property
    def support(self) -> frozenset:
        return frozenset(self.coeffs)

    def l1(self):
        return sum((abs(v) for v in self.coeffs.values()), 0)

    def __add__(self, other: "MeanZeroVector") -> "MeanZeroVector":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return MeanZeroVector(out)

    def __neg__(self) -> "MeanZeroVector":
        return MeanZeroVector({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "MeanZeroVector") -> "MeanZeroVector":
        return self + (-other)

    def __rmul__(self, c) -> "MeanZeroVector":
        return MeanZeroVector({k: c * v for k, v in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, MeanZeroVector) and self.coeffs == other.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)


@dataclass(frozen=True)
class GnsForm:
    """Kernel-generic GNS form; ``psi`` is any symmetric zero-diagonal CND kernel."""

    points: tuple
    psi: Callable[[Hashable, Hashable], float] = field(compare=False)
    name: str = "psi"
    certificate: SpectrumReport | None = field(default=None, compare=False)
    certified_on: int = 0
    certified_radius: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "_point_set", frozenset(self.points))

    def __contains__(self, x) -> bool:
        return x in self._point_set

    def matrix(self, pts: Sequence) -> np.ndarray:
        return np.array([[self.psi(x, y) for y in pts] for x in pts], dtype=float)


def table_form(table: np.ndarray, points: Sequence[int] | None = None, name: str = "d_a") -> GnsForm:
    """Form over integer points backed by a dense kernel table."""
    tab = np.asarray(table)
    pts = tuple(range(tab.shape[0])) if points is None else tuple(int(p) for p in points)
    return GnsForm(pts, lambda x, y: tab[x, y].item(), name)


def certify(form: GnsForm, sample: Sequence | None = None, tol: float = 1e-9) -> GnsForm:
    """Attach a CND certificate computed on ``sample`` (default: all points)."""
    pts = list(form.points if sample is None else sample)
    rep = cnd_check(form.matrix(pts), tol)
    return replace(form, certificate=rep, certified_on=len(pts))


def _as_vector(v) -> MeanZeroVector:
    return v if isinstance(v, MeanZeroVector) else MeanZeroVector(dict(v))


def _check_support(v: MeanZeroVector, form: GnsForm) -> None:
    outside = [x for x in v.coeffs if x not in form]
    if outside:
        raise SupportOutsidePoints(f"support points {outside[:5]} are not in the form's point set")


def gns_inner(v, w, form: GnsForm):
    v, w = _as_vector(v), _as_vector(w)
    _check_support(v, form)
    _check_support(w, form)
    cross = 0
    for x, vx in v.coeffs.items():
        for y, wy in w.coeffs.items():
            cross += vx * wy * form.psi(x, y)
    diag = sum((vx * w.coeffs[x] for x, vx in v.coeffs.items() if x in w.coeffs), 0)
    return -cross + diag


@dataclass(frozen=True)
class ENormValue:
    h_norm: float
    l1_norm: float
    e_norm: float


def e_norm(v, form: GnsForm, tol: float = 1e-12) -> ENormValue:
    v = _as_vector(v)
    s = gns_inner(v, v, form)
    if s < -tol * max(1.0, float(v.l1()) ** 2):
        raise NegativeSelfInner(f"<v, v> = {float(s)} < 0: kernel is not CND on this support")
    h = math.sqrt(max(float(s), 0.0))
    l1 = float(v.l1())
    return ENormValue(h, l1, h + l1)


def gns_matrix(form: GnsForm, pts: Sequence) -> np.ndarray:
    """Matrix G with <v, w>_psi = v^T G w for vectors indexed by ``pts``."""
    return np.eye(len(pts)) - form.matrix(pts)


def quadratic_batch(g: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Row-wise v^T G v for a stack of vectors."""
    return np.einsum("ij,jk,ik->i", vs, g, vs)


def random_mean_zero(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    vs = rng.standard_normal((count, dim))
    return vs - vs.mean(axis=1, keepdims=True)


# -- L1 witness -------------------------------------------------------------

def helmert_basis(m: int) -> np.ndarray:
    """Orthonormal basis (columns) of the mean-zero subspace of R^m."""
    q = np.zeros((m, m - 1))
    for k in range(1, m):
        q[:k, k - 1] = 1.0
        q[k, k - 1] = -k
        q[:, k - 1] /= math.sqrt(k * (k + 1))
    return q


def gns_coordinates(v: MeanZeroVector, form: GnsForm) -> np.ndarray:
    """Coordinates of v in a psi-orthonormal basis of span{delta_x - delta_mean}."""
    _check_support(v, form)
    pts = sorted(v.coeffs, key=repr)
    if len(pts) < 2:
        return np.zeros(0)
    q = helmert_basis(len(pts))
    g = q.T @ gns_matrix(form, pts) @ q
    lam, u = jacobi_eigh((g + g.T) / 2)
    if lam[0] < -1e-9 * max(1.0, float(np.abs(lam).max())):
        raise NegativeSelfInner("GNS form is not positive on this support")
    vec = np.array([float(v.coeffs[x]) for x in pts])
    return np.sqrt(np.clip(lam, 0, None)) * (u.T @ (q.T @ vec))


@dataclass
class WitnessStats:
    """Mergeable running sums of |<c, g>|."""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def merge(self, other: "WitnessStats") -> "WitnessStats":
        return WitnessStats(self.count + other.count, self.total + other.total,
                            self.total_sq + other.total_sq)

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else 0.0

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return 0.0
        var = (self.total_sq - self.count * self.mean ** 2) / (self.count - 1)
        return math.sqrt(max(var, 0.0) / self.count)


def _draw(coords: np.ndarray, n: int, seed_seq: np.random.SeedSequence, block: int = 20000) -> WitnessStats:
    rng = np.random.default_rng(seed_seq)
    st = WitnessStats()
    left = n
    while left > 0:
        m = min(block, left)
        vals = np.abs(rng.standard_normal((m, coords.size)) @ coords)
        st = st.merge(WitnessStats(m, float(vals.sum()), float((vals * vals).sum())))
        left -= m
    return st


@dataclass
class L1Witness:
    estimate: float
    std_error: float
    target: float
    l1_norm: float
    samples: int
    seed: int

    @property
    def e_estimate(self) -> float:
        return self.estimate + self.l1_norm

    @property
    def e_target(self) -> float:
        return self.target + self.l1_norm

    @property
    def z_score(self) -> float:
        if self.std_error == 0:
            return 0.0 if self.estimate == self.target else math.inf
        return (self.estimate - self.target) / self.std_error

    @property
    def within_3se(self) -> bool:
        return abs(self.estimate - self.target) <= 3 * self.std_error

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "std_error": self.std_error, "target": self.target,
                "l1_norm": self.l1_norm, "e_estimate": self.e_estimate, "e_target": self.e_target,
                "samples": self.samples, "seed": self.seed, "z_score": self.z_score,
                "within_3se": self.within_3se}


def l1_witness(v, form: GnsForm, samples: int, seed: int, workers: int = 1) -> L1Witness:
    """Monte-Carlo check of the Gaussian isometry H -> L1.

    For a standard Gaussian g on psi-orthonormal coordinates, sqrt(pi/2) E|<c(v), g>|
    equals ||v||_psi; the l1 block of E embeds exactly, so it is added as is.
    """
    if samples < 1000:
        raise InvalidConfig("l1_witness needs at least 1000 samples")
    if len(form.points) < 2:
        raise DegenerateForm("form has rank 0")
    v = _as_vector(v)
    coords = gns_coordinates(v, form)
    target = float(np.linalg.norm(coords))
    l1 = float(v.l1())
    if coords.size == 0:
        return L1Witness(0.0, 0.0, 0.0, l1, samples, seed)
    children = np.random.SeedSequence(seed).spawn(workers)
    shares = [samples // workers + (i < samples % workers) for i in range(workers)]
    st = WitnessStats()
    for child, share in zip(children, shares):
        st = st.merge(_draw(coords, share, child))
    k = math.sqrt(math.pi / 2)
    return L1Witness(k * st.mean, k * st.std_error, target, l1, samples, seed)
