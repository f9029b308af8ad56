"""The universal cover of PSL(2,R) acting on the real line, and Euler classes.

A lifted element (g, w) denotes the homeomorphism F = C_g + w of R, where
C_g is the canonical lift of g's action on RP^1 = R/Z normalized by
C_g(0) in [0, 1).  Storage is exact: a matrix plus an integer.
"""

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .psl2core import (
    IDENTITY,
    ProjMatrix,
    act,
    act_array,
    classify,
    compose,
    fixed_points,
    max_entry_distance,
)

DEFECT_TOL = 1e-8
INTEGER_TOL = 1e-6


class DefectTooLarge(ValueError):
    pass


class NonIntegral(ValueError):
    pass


def canonical_eval(g, x):
    """C_g(x) for real x (scalar or array)."""
    f0 = act(g, 0.0)
    if np.ndim(x) == 0:
        k = math.floor(x)
        s = x - k
        delta = (act(g, s) - f0) % 1.0
        if delta > 0.5 and s < 1e-12:
            delta -= 1.0
        elif delta < 0.5 and s > 1.0 - 1e-12:
            delta += 1.0
        return k + f0 + delta
    x = np.asarray(x, dtype=float)
    k = np.floor(x)
    s = x - k
    delta = np.mod(act_array(g, s) - f0, 1.0)
    delta = np.where((delta > 0.5) & (s < 1e-12), delta - 1.0, delta)
    delta = np.where((delta < 0.5) & (s > 1.0 - 1e-12), delta + 1.0, delta)
    return k + f0 + delta


@dataclass(frozen=True)
class LiftedElement:
    g: ProjMatrix
    w: int = 0

    def __call__(self, x):
        return canonical_eval(self.g, x) + self.w

    def __matmul__(self, other):
        return lift_compose(self, other)

    def inverse(self):
        return lift_inverse(self)


def canonical_lift(g):
    return LiftedElement(g, 0)


def deck(n):
    """The central element x -> x + n."""
    return LiftedElement(IDENTITY, int(n))


def cocycle(x, y):
    """sigma(x, y) in {0, 1}: C_x o C_y = C_{xy} + sigma."""
    xy = compose(x, y)
    return int(round(canonical_eval(x, canonical_eval(y, 0.0)) - act(xy, 0.0)))


def lift_compose(x, y):
    return LiftedElement(compose(x.g, y.g), x.w + y.w + cocycle(x.g, y.g))


def lift_inverse(x):
    gi = x.g.inverse()
    # C_g o C_{g^-1} is a lift of the identity, hence a translation by m
    m = int(round(canonical_eval(x.g, canonical_eval(gi, 0.0))))
    return LiftedElement(gi, -x.w - m)


def lift_commutator(x, y):
    return lift_compose(lift_compose(x, y), lift_compose(lift_inverse(x), lift_inverse(y)))


def lift_power(x, n):
    if n < 0:
        x, n = lift_inverse(x), -n
    out = deck(0)
    for _ in range(n):
        out = lift_compose(out, x)
    return out


def _canonical_translation(g):
    kind = classify(g)
    if kind.kind == "elliptic":
        # displacement of C_g never meets an integer, so it stays in (0, 1)
        return kind.angle / math.pi
    if kind.kind == "identity":
        p = 0.0
    else:
        p = fixed_points(g)[0]
    return float(round(canonical_eval(g, p) - p))


def translation_number(x):
    """lim F^n(0)/n, in closed form from the conjugacy type."""
    return x.w + _canonical_translation(x.g)


@numba.njit(cache=True)
def _orbit_average(ents, f0s, n):
    out = np.empty(ents.shape[0])
    for i in range(ents.shape[0]):
        a, b, c, d = ents[i, 0], ents[i, 1], ents[i, 2], ents[i, 3]
        f0 = f0s[i]
        t = 0.0
        total = 0.0
        for _ in range(n):
            ct = math.cos(math.pi * t)
            st = math.sin(math.pi * t)
            nt = (math.atan2(c * ct + d * st, a * ct + b * st) / math.pi) % 1.0
            if nt >= 1.0:
                nt = 0.0
            total += f0 + ((nt - f0) % 1.0) - t
            t = nt
        out[i] = total / n
    return out


def translation_numbers_iterative(xs, n=10 ** 6):
    """Birkhoff averages of (F(t) - t) along the orbit of 0, one per element.

    Uses point evaluation only; |F^n(0)/n - tau| < 1/n.
    """
    xs = list(xs)
    ents = np.array([x.g.entries() for x in xs], dtype=float).reshape(len(xs), 4)
    f0s = np.array([act(x.g, 0.0) for x in xs])
    avg = _orbit_average(ents, f0s, int(n))
    return [x.w + float(v) for x, v in zip(xs, avg)]


def translation_number_iterative(x, n=10 ** 6):
    return translation_numbers_iterative([x], n)[0]


# -------------------------------------------------------------- surface reps


@dataclass
class SurfaceRep:
    """Generators (a_1, b_1, ..., a_g, b_g) of a genus-g surface group rep."""

    genus: int
    gens: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.gens) != 2 * self.genus:
            raise ValueError(f"expected {2 * self.genus} generators, got {len(self.gens)}")

    @property
    def pairs(self):
        return [(self.gens[2 * i], self.gens[2 * i + 1]) for i in range(self.genus)]

    @classmethod
    def trivial(cls, genus):
        return cls(genus, [IDENTITY] * (2 * genus))


def relator(rep):
    out = IDENTITY
    for a, b in rep.pairs:
        out = compose(out, compose(compose(a, b), compose(a.inverse(), b.inverse())))
    return out


def relator_defect(rep):
    return max_entry_distance(relator(rep), IDENTITY)


def lifted_relator(rep, offsets=None):
    lifts = [LiftedElement(g, 0 if offsets is None else int(offsets[i])) for i, g in enumerate(rep.gens)]
    out = deck(0)
    for i in range(rep.genus):
        out = lift_compose(out, lift_commutator(lifts[2 * i], lifts[2 * i + 1]))
    return out


def euler_class(rep, offsets=None):
    """Signed Euler class: the central element reached by the lifted relator."""
    defect = relator_defect(rep)
    if defect > DEFECT_TOL:
        raise DefectTooLarge(f"relator defect {defect:.3e} exceeds {DEFECT_TOL}")
    tau = translation_number(lifted_relator(rep, offsets))
    n = round(tau)
    if abs(tau - n) > INTEGER_TOL:
        raise NonIntegral(f"lifted relator translates by {tau!r}")
    return int(n)
