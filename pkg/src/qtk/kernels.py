"""Positive / conditionally negative definite certification and the explicit embedding.

The eigensolver is a cyclic Jacobi iteration with round-robin (parallel)
ordering: each round applies n/2 disjoint plane rotations at once, which
keeps the sweep O(n^3) in numpy without changing the algorithm.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import (BasepointMismatch, EmptyFactorList, NoConvergence, NonZeroDiagonal,
                     NotSymmetric, RateMismatch, RateOutOfRange)
from .separation import BallFamily, SeparationTable
from .report import Verdict

PSD_TOL = 1e-9
JACOBI_TOL = 1e-12
MAX_SWEEPS = 100
DENSE_ROTATION_MAX = 100  # below this, one dense product per round is cheaper


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _check_symmetric(a: np.ndarray) -> float:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.abs(a).max()) if a.size else 0.0
    if a.size and float(np.abs(a - a.T).max()) > 1e-12 * max(scale, 1.0):
        raise NotSymmetric("matrix is not symmetric")
    return scale


def jacobi_eigh(a, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    a = np.array(a, dtype=float)
    _check_symmetric(a)
    a = (a + a.T) / 2
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    if n > 1 and scale > 0:
        rounds = _round_robin(n)
        for sweep in range(max_sweeps + 1):
            off = float(np.linalg.norm(a - np.diag(np.diag(a))))
            if off < tol * scale:
                break
            if sweep == max_sweeps:
                raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
            late = sweep >= 3
            for p, q in rounds:
                apq = a[p, q]
                app, aqq = a[p, p], a[q, q]
                if late:
                    tiny = (np.abs(app) + 100 * np.abs(apq) == np.abs(app)) & (
                        np.abs(aqq) + 100 * np.abs(apq) == np.abs(aqq))
                    a[p[tiny], q[tiny]] = 0.0
                    a[q[tiny], p[tiny]] = 0.0
                    apq = np.where(tiny, 0.0, apq)
                active = apq != 0
                if not active.any():
                    continue
                with np.errstate(over="ignore"):    # subnormal apq: theta = inf gives t = 0
                    theta = (aqq - app) / (2 * np.where(active, apq, 1.0))
                    t = np.copysign(1.0, theta) / (np.abs(theta) + np.hypot(theta, 1.0))
                t[~active] = 0.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                if n <= DENSE_ROTATION_MAX:
                    rot = np.eye(n)
                    rot[p, p] = c
                    rot[q, q] = c
                    rot[p, q] = s
                    rot[q, p] = -s
                    a = rot.T @ a @ rot
                    v = v @ rot
                    continue
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c[:, None] * rp - s[:, None] * rq
                a[q, :] = s[:, None] * rp + c[:, None] * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = cp * c - cq * s
                a[:, q] = cp * s + cq * c
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = vp * c - vq * s
                v[:, q] = vp * s + vq * c
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@dataclass
class SpectrumReport:
    min_eigenvalue: float
    tol: float
    scale: float
    psd: bool
    witness: list | None = None

    @property
    def verdict(self) -> str:
        return "PSD" if self.psd else "not-PSD"

    def to_json(self) -> dict:
        out = {"min_eigenvalue": self.min_eigenvalue, "tol": self.tol, "scale": self.scale,
               "verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def psd_check(m, tol: float = PSD_TOL, scale: float | None = None) -> SpectrumReport:
    """PSD iff the least eigenvalue is >= -tol * scale (scale defaults to max |entry|)."""
    m = np.asarray(m, dtype=float)
    own = _check_symmetric(m)
    scale = own if scale is None else scale
    if m.shape[0] == 0:
        return SpectrumReport(0.0, tol, scale, True)
    w, v = jacobi_eigh(m)
    lo = float(w[0])
    ok = lo >= -tol * scale
    return SpectrumReport(lo, tol, scale, bool(ok), None if ok else v[:, 0].tolist())


def cnd_check(psi, tol: float = PSD_TOL) -> SpectrumReport:
    """Certify -P psi P is PSD, P the projection onto mean-zero vectors."""
    psi = np.asarray(psi, dtype=float)
    scale = _check_symmetric(psi)
    if psi.size and np.abs(np.diag(psi)).max() != 0:
        raise NonZeroDiagonal("CND kernels vanish on the diagonal")
    n = psi.shape[0]
    proj = np.eye(n) - np.full((n, n), 1.0 / max(n, 1))
    form = -proj @ psi @ proj
    return psd_check((form + form.T) / 2, tol, scale=scale)


@dataclass
class SchoenbergScan:
    results: list = field(default_factory=list)   # (t, SpectrumReport)

    @property
    def passed(self) -> bool:
        return all(r.psd for _, r in self.results)

    def to_json(self) -> list:
        return [{"t": t, "min_eigenvalue": r.min_eigenvalue, "psd": r.psd} for t, r in self.results]


def default_t_grid() -> list[float]:
    return [round(0.1 * i, 10) for i in range(1, 21)]


def schoenberg_scan(psi, t_grid: Iterable[float] | None = None, tol: float = PSD_TOL) -> SchoenbergScan:
    """psd_check of exp(-t psi) (entrywise) for each t."""
    psi = np.asarray(psi, dtype=float)
    _check_symmetric(psi)
    if psi.size and np.abs(np.diag(psi)).max() != 0:
        raise NonZeroDiagonal("CND kernels vanish on the diagonal")
    grid = default_t_grid() if t_grid is None else list(t_grid)
    return SchoenbergScan([(t, psd_check(np.exp(-t * psi), tol)) for t in grid])


def gram_power(da: np.ndarray, r) -> np.ndarray:
    """Float Gram matrix of the kernel r ** d_a."""
    return float(r) ** np.asarray(da, dtype=float)


# -- explicit Hilbert embedding ---------------------------------------------

def check_rate(r) -> Fraction:
    r = Fraction(r)
    if not 0 < r < 1:
        raise RateOutOfRange(f"rate must lie in (0, 1), got {r}")
    return r


@dataclass(frozen=True)
class EmbeddingVector:
    """xi(x) = sqrt(1 - r^2) * (sum_k r^k delta_{Omega(x,k)} + sum_{k>=D} r^k delta_{k-D}).

    ``finite_part`` maps ball keys to the exponent k, so the coefficient of
    each finite coordinate is sqrt(1 - r^2) * r^k; ``tail_offset`` is D = d(a, x).
    """

    basepoint: int
    rate: Fraction
    finite_part: dict = field(hash=False)
    tail_offset: int
    family: BallFamily = field(repr=False, compare=False, hash=False)

    def coefficient(self, key) -> tuple[Fraction, Fraction]:
        """(c, m) with the coordinate equal to m * sqrt(c); c = 1 - r^2."""
        return 1 - self.rate ** 2, self.rate ** self.finite_part[key]


def explicit_embedding(table: SeparationTable, balls: BallFamily, r, x: int) -> EmbeddingVector:
    r = check_rate(r)
    x = table.graph.check_vertex(x)
    if balls.table is not table and balls.basepoint != table.basepoint:
        raise BasepointMismatch("ball family and table use different basepoints")
    depth = int(table.dist_a[x])
    finite = {balls.omega_key(x, k): k for k in range(depth)}
    return EmbeddingVector(table.basepoint, r, finite, depth, balls)


def embedding_inner(u: EmbeddingVector, v: EmbeddingVector) -> Fraction:
    """Exact <xi(x), xi(y)>: matched ball coordinates plus the closed-form tail.

    Matched coordinates contribute (1 - r^2) r^(k+j); the tails contribute
    (1 - r^2) sum_m r^(m+Du) r^(m+Dv) = r^(Du+Dv). Everything is accumulated
    over the common denominator q^E (r = p/q) and reduced once.
    """
    if u.basepoint != v.basepoint or u.family is not v.family:
        raise BasepointMismatch("vectors come from different basepoints / ball families")
    if u.rate != v.rate:
        raise RateMismatch(f"{u.rate} != {v.rate}")
    p, q = u.rate.numerator, u.rate.denominator
    small, big = (u, v) if len(u.finite_part) <= len(v.finite_part) else (v, u)
    bf = big.finite_part
    exps = [k + bf[key] for key, k in small.finite_part.items() if key in bf]
    tail = u.tail_offset + v.tail_offset
    top = max(tail, max(exps, default=0) + 2)
    num = p ** tail * q ** (top - tail)
    if exps:
        num += (q * q - p * p) * sum(p ** e * q ** (top - e - 2) for e in exps)
    return Fraction(num, q ** top)


def tensor_inner(values: Sequence[Fraction]) -> Fraction:
    values = list(values)
    if not values:
        raise EmptyFactorList("tensor_inner needs at least one factor value")
    return prod(values, start=Fraction(1))


def gram_identity_check(table: SeparationTable, balls: BallFamily, rates: Iterable) -> Verdict:
    """<xi(x), xi(y)> == r ** d_a(x, y) exactly, all pairs, all rates."""
    n = table.graph.n
    da = table.da
    checked = 0
    for r in rates:
        r = check_rate(r)
        vecs = [explicit_embedding(table, balls, r, x) for x in range(n)]
        powers = {}
        for x in range(n):
            for y in range(x, n):
                e = int(da[x, y])
                want = powers.get(e)
                if want is None:
                    want = powers[e] = r ** e
                got = embedding_inner(vecs[x], vecs[y])
                checked += 1
                if got != want:
                    return Verdict("gram_identity", False, checked,
                                   {"a": table.basepoint, "x": x, "y": y, "rate": r,
                                    "inner": got, "expected": want})
    return Verdict("gram_identity", True, checked)
