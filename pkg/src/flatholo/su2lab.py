"""SU(2) as unit quaternions: the binary icosahedral group and solvers for
products of conjugates and commutators.

Conjugation of g by c is c g c^-1.  Rotations are parameterized by a vector
v in R^3 through q = exp(v) = (cos|v|, sin|v| v/|v|), so |v| is half the
rotation angle of the corresponding element of SO(3).
"""

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

QUANT = 1e-9
MAX_CLOSURE = 200


class ClosureOverflow(RuntimeError):
    pass


class NotAMember(ValueError):
    pass


class NoConvergence(RuntimeError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class UnitQuaternion:
    w: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        n = math.sqrt(self.w ** 2 + self.x ** 2 + self.y ** 2 + self.z ** 2)
        if n == 0:
            raise ValueError("zero quaternion")
        if abs(n - 1.0) > 1e-12:
            for name in "wxyz":
                object.__setattr__(self, name, getattr(self, name) / n)

    @classmethod
    def from_array(cls, a):
        return cls(*(float(v) for v in a))

    def as_array(self):
        return np.array([self.w, self.x, self.y, self.z])

    def __mul__(self, other):
        return UnitQuaternion.from_array(qmul(self.as_array(), other.as_array()))

    def __neg__(self):
        return UnitQuaternion(-self.w, -self.x, -self.y, -self.z)

    def inverse(self):
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def conj_by(self, c):
        return c * self * c.inverse()

    def distance(self, other):
        return float(np.max(np.abs(self.as_array() - other.as_array())))

    def half_angle(self):
        """Angle in [0, pi] with w = cos(angle)."""
        return math.acos(max(-1.0, min(1.0, self.w)))

    def is_central(self, tol=1e-12):
        return abs(abs(self.w) - 1.0) <= tol

    def key(self):
        return tuple(int(round(c / QUANT)) for c in (self.w, self.x, self.y, self.z))


ONE = UnitQuaternion(1.0)
QI = UnitQuaternion(0.0, 1.0)
QJ = UnitQuaternion(0.0, 0.0, 1.0)
QK = UnitQuaternion(0.0, 0.0, 0.0, 1.0)


def qmul(p, q):
    """Hamilton product of quaternion arrays (last axis of length 4)."""
    pw, px, py, pz = np.moveaxis(np.asarray(p), -1, 0)
    qw, qx, qy, qz = np.moveaxis(np.asarray(q), -1, 0)
    return np.stack([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ], axis=-1)


def qinv(q):
    return np.asarray(q) * np.array([1.0, -1.0, -1.0, -1.0])


def qexp(v):
    v = np.asarray(v, dtype=float)
    t = np.linalg.norm(v, axis=-1, keepdims=True)
    sinc = np.where(t > 1e-12, np.sin(t) / np.where(t > 1e-12, t, 1.0), 1.0 - t ** 2 / 6)
    return np.concatenate([np.cos(t), sinc * v], axis=-1)


def qlog(q):
    q = np.asarray(q, dtype=float)
    v = q[..., 1:]
    s = np.linalg.norm(v, axis=-1, keepdims=True)
    t = np.arctan2(s, q[..., :1])
    scale = np.where(s > 1e-15, t / np.where(s > 1e-15, s, 1.0), 1.0)
    out = scale * v
    # -1 has no preferred axis: take log(-1) = pi * i
    minus = (s[..., 0] <= 1e-15) & (q[..., 0] < 0)
    return np.where(minus[..., None], np.array([math.pi, 0.0, 0.0]), out)


def rotation(axis, angle):
    """Element of SU(2) covering the SO(3) rotation by angle about axis."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return UnitQuaternion.from_array(qexp(0.5 * angle * axis))


def random_unit(rng):
    return UnitQuaternion.from_array(rng.normal(size=4))


# --------------------------------------------------------------- finite groups


@dataclass
class FiniteSubgroup:
    elements: list
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {e.key(): i for i, e in enumerate(self.elements)}
        self._table = None
        self._inv = None

    def __len__(self):
        return len(self.elements)

    def __contains__(self, q):
        return q.key() in self.index

    def index_of(self, q):
        try:
            return self.index[q.key()]
        except KeyError:
            raise NotAMember(f"{q} is not in the group") from None

    @property
    def table(self):
        """Cayley table: table[i, j] = index of elements[i] * elements[j]."""
        if self._table is None:
            arr = np.array([e.as_array() for e in self.elements])
            prods = qmul(arr[:, None, :], arr[None, :, :])
            n = len(self)
            tab = np.empty((n, n), dtype=np.int64)
            for i in range(n):
                for j in range(n):
                    tab[i, j] = self.index[UnitQuaternion.from_array(prods[i, j]).key()]
            self._table = tab
            self._inv = np.argmax(tab == self.identity_index, axis=1)
        return self._table

    @property
    def identity_index(self):
        return self.index[ONE.key()]

    def inverse_index(self, i):
        self.table
        return int(self._inv[i])

    def closure(self, gens):
        """Indices of the subgroup generated by the given element indices."""
        tab = self.table
        seen = {self.identity_index}
        todo = deque(seen)
        gens = list(set(gens))
        while todo:
            i = todo.popleft()
            for g in gens:
                j = int(tab[i, g])
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        return seen

    def center(self):
        tab = self.table
        return [i for i in range(len(self)) if np.array_equal(tab[i, :], tab[:, i])]

    def order(self, i):
        tab = self.table
        k, j = 1, i
        while j != self.identity_index:
            j = int(tab[j, i])
            k += 1
        return k

    def min_separation(self):
        arr = np.array([e.as_array() for e in self.elements])
        d = np.max(np.abs(arr[:, None, :] - arr[None, :, :]), axis=-1)
        np.fill_diagonal(d, np.inf)
        return float(d.min()) if len(self) > 1 else math.inf

    def to_json(self):
        return json.dumps({"order": len(self), "elements": [e.as_array().tolist() for e in self.elements]})


def generate(gens, limit=MAX_CLOSURE):
    """Closure of a finite set of unit quaternions under multiplication."""
    elems = [ONE]
    index = {ONE.key(): 0}
    todo = deque([ONE])
    while todo:
        q = todo.popleft()
        for g in gens:
            p = q * g
            k = p.key()
            if k not in index:
                index[k] = len(elems)
                elems.append(p)
                todo.append(p)
                if len(elems) > limit:
                    raise ClosureOverflow(f"closure exceeds {limit} elements")
    G = FiniteSubgroup(elems, index)
    if G.min_separation() < 1e3 * QUANT:
        raise ClosureOverflow("elements too close for quantized hashing")
    return G


PHI = (1 + math.sqrt(5)) / 2
ICOSIAN_GENERATORS = (
    UnitQuaternion(0.5, 0.5, 0.5, 0.5),
    UnitQuaternion(PHI / 2, 0.5 / PHI, 0.5, 0.0),
)


def bi_generate():
    """The binary icosahedral group, 120 elements of SU(2)."""
    return generate(ICOSIAN_GENERATORS)


def cyclic_group(n):
    return generate([rotation([0, 0, 1], 4 * math.pi / n)])


def is_perfect(G):
    tab = G.table
    n = len(G)
    comms = set()
    for i in range(n):
        ii = G.inverse_index(i)
        for j in range(n):
            comms.add(int(tab[tab[tab[i, j], ii], G.inverse_index(j)]))
    return len(G.closure(comms)) == n


def normally_generates(g, G):
    i = G.index_of(g)
    tab = G.table
    gens = set()
    for c in range(len(G)):
        ci = G.inverse_index(c)
        for e in (i, G.inverse_index(i)):
            gens.add(int(tab[tab[c, e], ci]))
    return len(G.closure(gens)) == len(G)


# ---------------------------------------------------------------- solvers


def _conj_product(vs, g, exps):
    """prod_i exp(v_i) g^{e_i} exp(v_i)^-1 for parameter rows vs."""
    out = np.array([1.0, 0.0, 0.0, 0.0])
    cs = qexp(vs)
    for c, e in zip(cs, exps):
        ge = g if e > 0 else qinv(g)
        out = qmul(out, qmul(qmul(c, ge), qinv(c)))
    return out


def _check_noncentral(g):
    if g.is_central(1e-9):
        raise ValueError("g must be non-central")


@dataclass
class ConjProduct:
    conjugators: list
    exponents: list
    residual: float

    def product(self, g):
        out = ONE
        for c, e in zip(self.conjugators, self.exponents):
            out = out * (g if e > 0 else g.inverse()).conj_by(c)
        return out

    def to_dict(self):
        return {"conjugators": [c.as_array().tolist() for c in self.conjugators],
                "exponents": list(self.exponents), "residual": self.residual}


def conj_product_solve(target, g, maxlen=64, tol=1e-6, seed=0, restarts=8):
    """Conjugators c_i with prod c_i g c_i^-1 = target (all exponents +1).

    g^-1 is conjugate to g in SU(2), so positive exponents suffice.  N starts
    at the least count whose half-angles can add up to the target's.
    """
    _check_noncentral(g)
    if target.distance(ONE) <= tol:
        # g g^-1 with equal conjugators
        return ConjProduct([ONE, ONE], [1, -1], 0.0)
    power = ONE
    for k in range(1, min(maxlen, 4) + 1):
        power = power * g
        if target.distance(power) <= tol:
            return ConjProduct([ONE] * k, [1] * k, target.distance(power))
    rng = np.random.default_rng(seed)
    ga, ta = g.as_array(), target.as_array()
    n0 = max(1, math.ceil(target.half_angle() / g.half_angle() - 1e-12))
    best = (math.inf, None, None)
    for n in range(n0, maxlen + 1):
        exps = [1] * n
        for _ in range(restarts):
            x0 = rng.normal(scale=1.0, size=3 * n)
            res = least_squares(lambda x: _conj_product(x.reshape(n, 3), ga, exps) - ta, x0,
                                xtol=1e-15, ftol=1e-15, gtol=1e-15)
            r = float(np.max(np.abs(res.fun)))
            if r < best[0]:
                best = (r, res.x.reshape(n, 3), exps)
            if r <= tol:
                cs = [UnitQuaternion.from_array(c) for c in qexp(best[1])]
                return ConjProduct(cs, exps, r)
    raise NoConvergence(f"no product of <= {maxlen} conjugates within {tol}", best[0])


def _commutator_arr(u, v):
    a, b = qexp(u), qexp(v)
    return qmul(qmul(a, b), qmul(qinv(a), qinv(b)))


def quaternion_root(q, m):
    """r with r^m = q, along the one-parameter subgroup through q."""
    if m == 1:
        return q
    return UnitQuaternion.from_array(qexp(qlog(q.as_array()) / m))


def commutator_decomp_su2(f, m=1, tol=1e-8, seed=0, restarts=20):
    """Pairs (a_i, b_i) with [a_m, b_m] ... [a_1, b_1] = f.

    f is split into m equal roots along its one-parameter subgroup and each
    root is solved as a single commutator by least squares.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if f.distance(ONE) <= tol:
        return [(ONE, ONE)] * m
    r = quaternion_root(f, m).as_array()
    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(restarts):
        x0 = rng.normal(size=6)
        res = least_squares(lambda x: _commutator_arr(x[:3], x[3:]) - r, x0,
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        best = min(best, float(np.max(np.abs(res.fun))))
        if best <= tol / (2 * m):
            a = UnitQuaternion.from_array(qexp(res.x[:3]))
            b = UnitQuaternion.from_array(qexp(res.x[3:]))
            return [(a, b)] * m
    raise NoConvergence(f"commutator solve stalled at residual {best:.3e}", best)


def commutator_product(pairs):
    """[a_m, b_m] ... [a_1, b_1] for pairs listed as (a_1, b_1), ..., (a_m, b_m)."""
    out = ONE
    for a, b in pairs:
        out = a * b * a.inverse() * b.inverse() * out
    return out


@dataclass
class ProbeResult:
    target: tuple
    hit: bool
    residual: float
    conjugators: list = field(default_factory=list)
    exponents: list = field(default_factory=list)
    attempts: int = 0
    message: str = ""

    def to_dict(self):
        return {
            "target": [t.as_array().tolist() for t in self.target],
            "hit": self.hit, "residual": self.residual, "attempts": self.attempts,
            "conjugators": [[c.as_array().tolist(), d.as_array().tolist()] for c, d in self.conjugators],
            "exponents": list(self.exponents), "message": self.message,
        }


@dataclass
class ProbeReport:
    results: list

    @property
    def hits(self):
        return sum(r.hit for r in self.results)

    def to_json(self):
        return json.dumps({"hits": self.hits, "results": [r.to_dict() for r in self.results]})


def _exponent_patterns(n):
    pats = [[1] * n]
    if n > 1:
        pats.append([1 if i % 2 == 0 else -1 for i in range(n)])
    return pats


def _probe_one(x, y, g, budget, tol, maxlen, rng):
    ga = g.as_array()
    xa, ya = x.as_array(), y.as_array()
    if x.distance(ONE) <= tol and y.distance(ONE) <= tol:
        return ProbeResult((x, y), True, 0.0)
    if x.distance(g) <= tol and y.distance(g) <= tol:
        return ProbeResult((x, y), True, max(x.distance(g), y.distance(g)), [(ONE, ONE)], [1])
    attempts, best = 0, math.inf
    # each conjugate adds at most the half-angle of g to either factor
    n = max(1, math.ceil(max(x.half_angle(), y.half_angle()) / g.half_angle() - 1e-12))
    while attempts < budget:
        for exps in _exponent_patterns(n):
            for _ in range(4):
                if attempts >= budget:
                    break
                attempts += 1

                def resid(p):
                    c = p[:3 * n].reshape(n, 3)
                    d = p[3 * n:].reshape(n, 3)
                    return np.concatenate([_conj_product(c, ga, exps) - xa, _conj_product(d, ga, exps) - ya])

                res = least_squares(resid, rng.normal(size=6 * n), xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                    max_nfev=400)
                r = float(np.max(np.abs(res.fun)))
                best = min(best, r)
                if r <= tol:
                    cs = qexp(res.x[:3 * n].reshape(n, 3))
                    ds = qexp(res.x[3 * n:].reshape(n, 3))
                    pairs = [(UnitQuaternion.from_array(c), UnitQuaternion.from_array(d)) for c, d in zip(cs, ds)]
                    return ProbeResult((x, y), True, r, pairs, list(exps), attempts)
        n = min(n + 1, maxlen)
    return ProbeResult((x, y), False, best, attempts=attempts, message=f"budget {budget} exhausted")


def diagonal_closure_probe(targets, g, budget=200, tol=1e-4, maxlen=8, seed=0, strict=False):
    """Approximate pairs (x, y) in SU(2) x SU(2) by products of conjugates of
    the diagonal element (g, g), with independent conjugators per factor."""
    _check_noncentral(g)
    rng = np.random.default_rng(seed)
    results = []
    for x, y in targets:
        r = _probe_one(x, y, g, budget, tol, maxlen, rng)
        if strict and not r.hit:
            raise NoConvergence(r.message, r.residual)
        results.append(r)
    return ProbeReport(results)
