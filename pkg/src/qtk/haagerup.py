"""Weak-Haagerup input data (phi, R, S) and its GNS form psi_R(x, y) = ||R(x) - R(y)||^2.

The decomposition phi(y^-1 x) = ||R(x) - R(y)||^2 + ||S(x) + S(y)||^2 is
consumed as data and verified, never derived.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .action import IntegerLaw, RegularAction
from .errors import DecompositionMismatch, InvalidSpec, NonConstantS
from .gns import GnsForm, certify

DECOMP_TOL = 1e-9


@dataclass
class WeakHaagerupData:
    law: object
    elements: list
    phi: dict
    R: dict = field(repr=False)
    S: dict = field(repr=False)

    @classmethod
    def from_json(cls, data: Mapping) -> "WeakHaagerupData":
        group = data.get("group", "Z")
        if group != "Z":
            raise InvalidSpec(f"unsupported group {group!r}; only 'Z' is built in")
        try:
            elements = [int(e) for e in data["elements"]]
            phi = {int(k): float(v) for k, v in data["phi"].items()}
            R = {int(k): np.asarray(v, dtype=float) for k, v in data["R"].items()}
            S = {int(k): np.asarray(v, dtype=float) for k, v in data["S"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed weak-Haagerup JSON: {exc}") from exc
        missing = [e for e in elements if e not in R or e not in S]
        if missing:
            raise InvalidSpec(f"R/S missing for elements {missing[:5]}")
        return cls(IntegerLaw(), elements, phi, R, S)

    def to_json(self) -> dict:
        return {"group": "Z", "elements": self.elements,
                "phi": {str(k): v for k, v in sorted(self.phi.items())},
                "R": {str(k): self.R[k].tolist() for k in self.elements},
                "S": {str(k): self.S[k].tolist() for k in self.elements}}

    def psi(self, x, y) -> float:
        d = self.R[x] - self.R[y]
        return float(d @ d)

    def action(self, word_cap: int | None = None) -> RegularAction:
        cap = max(self.law.length(e) for e in self.elements) if word_cap is None else word_cap
        return RegularAction(self.law, self.elements, word_cap=cap)


def integer_instance(radius: int = 8) -> WeakHaagerupData:
    """phi(n) = |n|, S = 0, R(n) = cumulative basis vectors so ||R(x) - R(y)||^2 = |x - y|."""
    elements = list(range(-radius, radius + 1))
    dim = 2 * radius
    R = {}
    for n in elements:
        v = np.zeros(dim)
        v[: n + radius] = 1.0       # e_k for -radius <= k < n
        R[n] = v
    S = {n: np.zeros(1) for n in elements}
    phi = {n: float(abs(n)) for n in range(-2 * radius, 2 * radius + 1)}
    return WeakHaagerupData(IntegerLaw(), elements, phi, R, S)


@dataclass
class HaagerupReport:
    phi_e: float
    bound_constant: float
    max_decomposition_error: float
    properness_rows: list          # (s, ||R(s)-R(e)||^2, phi(s) - phi(e))
    form: GnsForm = field(repr=False)

    @property
    def properness_ok(self) -> bool:
        return all(r >= p - DECOMP_TOL for _, r, p in self.properness_rows)

    @property
    def properness_equality(self) -> bool:
        return all(abs(r - p) <= DECOMP_TOL for _, r, p in self.properness_rows)

    def to_json(self) -> dict:
        return {"phi_e": self.phi_e, "bound_constant": self.bound_constant,
                "max_decomposition_error": self.max_decomposition_error,
                "properness_ok": self.properness_ok,
                "properness_equality": self.properness_equality,
                "cnd": self.form.certificate.to_json() if self.form.certificate else None}


def load_weak_haagerup(data: WeakHaagerupData, tol: float = DECOMP_TOL) -> HaagerupReport:
    law = data.law
    e = law.identity
    if e not in data.phi:
        raise InvalidSpec("phi must be given at the identity")
    phi_e = data.phi[e]
    for x in data.elements:
        s2 = float(data.S[x] @ data.S[x])
        if abs(4 * s2 - phi_e) > tol:
            raise NonConstantS(f"4||S({x})||^2 = {4 * s2} but phi(e) = {phi_e}")
    worst = 0.0
    for x in data.elements:
        for y in data.elements:
            g = law.multiply(law.inverse(y), x)
            if g not in data.phi:
                raise DecompositionMismatch(f"phi is not given at y^-1 x = {g}")
            s = data.S[x] + data.S[y]
            err = abs(data.phi[g] - data.psi(x, y) - float(s @ s))
            worst = max(worst, err)
            if err > tol:
                raise DecompositionMismatch(f"decomposition fails at x={x}, y={y} (error {err:.3e})")
    form = certify(GnsForm(tuple(data.elements), data.psi, "psi_R"))
    rows = [(s, data.psi(s, e), data.phi[s] - phi_e) for s in data.elements if s != e]
    return HaagerupReport(phi_e, 1 + math.sqrt(phi_e), worst, rows, form)
