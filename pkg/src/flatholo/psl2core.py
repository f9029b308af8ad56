"""Arithmetic in SL(2,R) / PSL(2,R) and its action on the boundary circle RP^1.

Points of RP^1 are parameterized by t in [0, 1): t is the line through the
origin at angle pi*t.  The rotation matrix R(alpha) therefore acts by
t -> t + alpha/pi (mod 1), and a full turn of RP^1 is a matrix angle of pi.

Lie algebra basis: E = diag(1, -1) and F = [[0, 1], [1, 0]] are boosts,
H = [E, F] = [[0, 2], [-2, 0]] generates rotations, so exp(s*H) = R(-2s).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

DET_TOL = 1e-12
RENORM_DRIFT = 1e-14
SIGN_TOL = 1e-12
CLASSIFY_TOL = 1e-10


@dataclass(frozen=True)
class SL2Matrix:
    """A real 2x2 matrix with determinant 1 (renormalized on construction)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0:
            raise ValueError(f"matrix has non-positive determinant {det!r}")
        if abs(det - 1.0) > RENORM_DRIFT:
            s = math.sqrt(det)
            object.__setattr__(self, "a", self.a / s)
            object.__setattr__(self, "b", self.b / s)
            object.__setattr__(self, "c", self.c / s)
            object.__setattr__(self, "d", self.d / s)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def trace(self):
        return self.a + self.d

    def __matmul__(self, other):
        return SL2Matrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self):
        return SL2Matrix(self.d, -self.b, -self.c, self.a)

    def __neg__(self):
        return SL2Matrix(-self.a, -self.b, -self.c, -self.d)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def to_array(self):
        return np.array([[self.a, self.b], [self.c, self.d]])


def _canonical_sign(m):
    for v in m.entries():
        if abs(v) > SIGN_TOL:
            return m if v > 0 else -m
    raise ValueError("zero matrix cannot be canonicalized")


@dataclass(frozen=True)
class ProjMatrix:
    """An element of PSL(2,R): a sign-canonicalized SL2Matrix.

    The first entry of (a, b, c, d) larger than 1e-12 in magnitude is
    positive, so M and -M give bit-identical ProjMatrix values.
    """

    m: SL2Matrix

    def __post_init__(self):
        object.__setattr__(self, "m", _canonical_sign(self.m))

    @classmethod
    def of(cls, a, b, c, d):
        return cls(SL2Matrix(float(a), float(b), float(c), float(d)))

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        return cls.of(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    a = property(lambda self: self.m.a)
    b = property(lambda self: self.m.b)
    c = property(lambda self: self.m.c)
    d = property(lambda self: self.m.d)

    @property
    def trace(self):
        return self.m.trace

    def entries(self):
        return self.m.entries()

    def to_array(self):
        return self.m.to_array()

    def __matmul__(self, other):
        return compose(self, other)

    def inverse(self):
        return ProjMatrix(self.m.inverse())

    def __pow__(self, n):
        return power(self, n)

    def __repr__(self):
        return "ProjMatrix(%r, %r, %r, %r)" % self.entries()


IDENTITY = ProjMatrix.of(1.0, 0.0, 0.0, 1.0)


def compose(x, y):
    return ProjMatrix(x.m @ y.m)


def inverse(x):
    return x.inverse()


def power(x, n):
    """x**n by repeated squaring; negative n uses the inverse."""
    if n < 0:
        x, n = x.inverse(), -n
    result = IDENTITY
    while n:
        if n & 1:
            result = compose(result, x)
        x = compose(x, x)
        n >>= 1
    return result


def commutator(x, y):
    """x y x^-1 y^-1."""
    return compose(compose(x, y), compose(x.inverse(), y.inverse()))


def rotation(alpha):
    """R(alpha) = [[cos, -sin], [sin, cos]]; acts on RP^1 by t -> t + alpha/pi."""
    c, s = math.cos(alpha), math.sin(alpha)
    return ProjMatrix.of(c, -s, s, c)


def diagonal(lam):
    return ProjMatrix.of(lam, 0.0, 0.0, 1.0 / lam)


def max_entry_distance(x, y):
    """Entrywise max-norm distance between canonical representatives."""
    return max(abs(u - v) for u, v in zip(x.entries(), y.entries()))


# ---------------------------------------------------------------- Lie algebra

E_MAT = np.array([[1.0, 0.0], [0.0, -1.0]])
F_MAT = np.array([[0.0, 1.0], [1.0, 0.0]])


def bracket(x, y):
    return x @ y - y @ x


H_MAT = bracket(E_MAT, F_MAT)


@dataclass(frozen=True)
class LieVec:
    """h*H + e*E + f*F in sl(2,R)."""

    h: float = 0.0
    e: float = 0.0
    f: float = 0.0

    def matrix(self):
        return self.h * H_MAT + self.e * E_MAT + self.f * F_MAT

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        # m = [[e, 2h + f], [f - 2h, -e]]
        return cls(h=(m[0, 1] - m[1, 0]) / 4.0, e=(m[0, 0] - m[1, 1]) / 2.0, f=(m[0, 1] + m[1, 0]) / 2.0)

    def as_tuple(self):
        return (self.h, self.e, self.f)

    def norm(self):
        return math.sqrt(self.h ** 2 + self.e ** 2 + self.f ** 2)

    def __add__(self, other):
        return LieVec(self.h + other.h, self.e + other.e, self.f + other.f)

    def __sub__(self, other):
        return LieVec(self.h - other.h, self.e - other.e, self.f - other.f)

    def __neg__(self):
        return LieVec(-self.h, -self.e, -self.f)

    def __mul__(self, s):
        return LieVec(s * self.h, s * self.e, s * self.f)

    __rmul__ = __mul__


E = LieVec(e=1.0)
F = LieVec(f=1.0)
H = LieVec(h=1.0)


def exp_sl2(v):
    """Closed-form exponential of a traceless 2x2 matrix.

    exp(X) = cosh(rho) I + sinh(rho)/rho X with rho^2 = -det X; the
    circular branch is used when det X > 0.
    """
    X = v.matrix() if isinstance(v, LieVec) else np.asarray(v, dtype=float)
    rho2 = X[0, 0] ** 2 + X[0, 1] * X[1, 0]  # -det X for traceless X
    if abs(rho2) < 1e-8:
        c = 1.0 + rho2 / 2.0 + rho2 * rho2 / 24.0
        s = 1.0 + rho2 / 6.0 + rho2 * rho2 / 120.0
    elif rho2 > 0:
        rho = math.sqrt(rho2)
        c, s = math.cosh(rho), math.sinh(rho) / rho
    else:
        w = math.sqrt(-rho2)
        c, s = math.cos(w), math.sin(w) / w
    return ProjMatrix.of(c + s * X[0, 0], s * X[0, 1], s * X[1, 0], c + s * X[1, 1])


# ------------------------------------------------------------- classification


@dataclass(frozen=True)
class Classification:
    """Conjugacy type.  For elliptic elements ``angle`` lies in (0, pi) and the
    element is conjugate to R(angle), i.e. rotates RP^1 by angle/pi turns."""

    kind: str
    angle: float = 0.0
    length: float = 0.0

    @property
    def turns(self):
        return self.angle / math.pi


def _elliptic_turns(m):
    a, b, c, d = m.entries()
    disc = (a - d) ** 2 + 4.0 * b * c
    s = math.copysign(math.sqrt(max(-disc, 0.0)) / 2.0, c)
    phi = math.atan2(s, (a + d) / 2.0)
    r = (phi / math.pi) % 1.0
    return r


def classify(x, tol=CLASSIFY_TOL):
    t = abs(x.trace)
    if t < 2.0 - tol:
        return Classification("elliptic", angle=math.pi * _elliptic_turns(x))
    if t > 2.0 + tol:
        return Classification("hyperbolic", length=2.0 * math.acosh(t / 2.0))
    if max_entry_distance(x, IDENTITY) <= tol:
        return Classification("identity")
    return Classification("parabolic")


def rotation_turns(x):
    """Signed RP^1 rotation, in turns in (-1/2, 1/2], of an elliptic element."""
    r = _elliptic_turns(x)
    return r - 1.0 if r > 0.5 else r


def fixed_points(x):
    """Fixed points on RP^1 (as t in [0,1)) of a non-elliptic element."""
    a, b, c, d = x.entries()
    # eigenvectors of the matrix: (b, lam - a) or (lam - d, c)
    tr = a + d
    sq = math.sqrt(max(tr * tr - 4.0, 0.0))
    pts = []
    for lam in ((tr + sq) / 2.0, (tr - sq) / 2.0):
        v1 = (b, lam - a)
        v2 = (lam - d, c)
        vx, vy = v1 if abs(v1[0]) + abs(v1[1]) >= abs(v2[0]) + abs(v2[1]) else v2
        if abs(vx) + abs(vy) == 0.0:
            vx, vy = 1.0, 0.0  # scalar matrix: every point fixed
        pts.append(_angle_to_t(math.atan2(vy, vx)))
    return pts


def elliptic_center(x):
    """Fixed point in the upper half plane of an elliptic element."""
    a, b, c, d = x.entries()
    tr = a + d
    s = math.sqrt(4.0 - tr * tr)
    z = complex(a - d, s) / (2.0 * c)
    if z.imag < 0:
        z = complex(a - d, -s) / (2.0 * c)
    return z


def moving_to_i(z):
    """gamma in PSL(2,R) with gamma(z) = i for z in the upper half plane."""
    y = z.imag
    r = math.sqrt(y)
    return ProjMatrix.of(1.0 / r, -z.real / r, 0.0, r)


# -------------------------------------------------------------- circle action


def _angle_to_t(theta):
    t = (theta / math.pi) % 1.0
    return 0.0 if t >= 1.0 else t


def act(x, t):
    """Image of the line at angle pi*t under x, as a point of [0, 1)."""
    ct, st = math.cos(math.pi * t), math.sin(math.pi * t)
    a, b, c, d = x.entries()
    return _angle_to_t(math.atan2(c * ct + d * st, a * ct + b * st))


def act_array(x, ts):
    ts = np.asarray(ts, dtype=float)
    ct, st = np.cos(np.pi * ts), np.sin(np.pi * ts)
    a, b, c, d = x.entries()
    out = np.mod(np.arctan2(c * ct + d * st, a * ct + b * st) / np.pi, 1.0)
    out[out >= 1.0] = 0.0
    return out


def lift_displacement(x, ts):
    """F(t) - t for the canonical lift F of x (F(0) in [0,1)), t in [0,1)."""
    ts = np.asarray(ts, dtype=float)
    f0 = act(x, 0.0)
    delta = np.mod(act_array(x, ts) - f0, 1.0)
    return f0 + delta - ts


def dist_to_rotations(x, n=2048):
    """Sup-norm distance (in turns of RP^1) from x to the rotation subgroup.

    min over beta of sup over t of the circle distance between x(t) and
    t + beta.  The displacement of a lift is sampled on an n-point grid, its
    extremes are refined locally, and a golden-section pass over beta
    minimizes the sup.  With displacement range [lo, hi] the exact answer is
    (hi - lo)/2, which the golden pass reproduces.
    """
    ts = np.arange(n) / n
    disp = lift_displacement(x, ts)
    h = 1.0 / n

    def refine(i, sign):
        lo, hi = ts[i] - h, ts[i] + h
        res = minimize_scalar(lambda t: -sign * _disp_periodic(x, t), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-13})
        return max(sign * disp[i], -res.fun) * sign

    hi = refine(int(np.argmax(disp)), 1.0)
    lo = refine(int(np.argmin(disp)), -1.0)
    samples = np.concatenate([disp, [hi, lo]])
    if hi - lo < 1e-15:
        return max(hi - lo, 0.0) / 2.0

    def sup_dist(beta):
        u = samples - beta
        return float(np.max(np.abs(u - np.round(u))))

    mid = 0.5 * (hi + lo)
    res = minimize_scalar(sup_dist, bracket=(mid - 0.25 * (hi - lo), mid + 0.25 * (hi - lo)),
                          method="golden", options={"xtol": 1e-12})
    return min(float(res.fun), sup_dist(mid))


def _disp_periodic(x, t):
    """Lift displacement at any real t, continuous across t = 0."""
    k = math.floor(t)
    f0 = act(x, 0.0)
    s = t - k
    delta = (act(x, s) - f0) % 1.0
    if s < 1e-12 and delta > 0.5:
        delta -= 1.0
    return f0 + delta - s
