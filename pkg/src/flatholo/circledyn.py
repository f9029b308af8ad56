"""Piecewise-linear homeomorphisms of the circle R/Z and of [0, 1].

Group products follow composition order: ``f @ g`` is f o g, and the
commutator [a, b] is a b a^-1 b^-1.  Circle maps are stored as a lift F on
[0, 1] with F(1) = F(0) + 1 and F(0) in [-1/2, 1/2); both kinds keep their
breakpoints at x = 0 and x = 1.  Differences of PL maps are PL, so sup
distances are evaluated exactly on merged breakpoints.
"""

import json
import math

import numpy as np

SNAP = 1e-14
COLLINEAR_TOL = 1e-15


class PreconditionViolation(ValueError):
    pass


class DisplacementTooLarge(ValueError):
    pass


class NetTooDense(ValueError):
    pass


def _circ(d):
    return np.abs(d - np.round(d))


def _dedupe(xs):
    xs = np.sort(np.asarray(xs, dtype=float))
    keep = np.concatenate([[True], np.diff(xs) > SNAP])
    return xs[keep]


def _simplify(xs, ys):
    """Drop interior nodes lying on the segment through their neighbours,
    and nodes that rounding has left within SNAP of their predecessor."""
    keep = [0]
    for i in range(1, len(xs)):
        if xs[i] - xs[keep[-1]] > SNAP and ys[i] - ys[keep[-1]] > SNAP:
            keep.append(i)
        elif i == len(xs) - 1:
            keep[-1] = i
    xs, ys = xs[keep], ys[keep]
    keep = [0]
    for i in range(1, len(xs) - 1):
        j = keep[-1]
        x0, y0, x1, y1 = xs[j], ys[j], xs[i + 1], ys[i + 1]
        interp = y0 + (y1 - y0) * (xs[i] - x0) / (x1 - x0)
        if abs(interp - ys[i]) > COLLINEAR_TOL:
            keep.append(i)
    keep.append(len(xs) - 1)
    return xs[keep], ys[keep]


class _PLHomeo:
    kind = None

    def __init__(self, xs, ys):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        if np.any(np.diff(self.xs) <= 0) or np.any(np.diff(self.ys) <= 0):
            raise ValueError("breakpoints must be strictly increasing in x and y")

    def __len__(self):
        return len(self.xs)

    def __matmul__(self, other):
        return self.compose(other)

    def slopes(self):
        return np.diff(self.ys) / np.diff(self.xs)

    def bilipschitz(self):
        s = self.slopes()
        return float(max(s.max(), 1.0 / s.min()))

    def commutator(self, other):
        return self @ other @ self.inverse() @ other.inverse()

    def conjugate(self, by):
        """by o self o by^-1 (exponential notation x^y)."""
        return by @ self @ by.inverse()

    def sup_distance(self, other):
        self._check_kind(other)
        pts = _dedupe(np.concatenate([self.xs, other.xs]))
        return float(np.max(_circ(self(pts) - other(pts))))

    def displacement(self):
        return float(np.max(_circ(self.ys - self.xs)))

    def is_identity(self, tol=1e-12):
        return self.displacement() <= tol

    def _check_kind(self, other):
        if type(self) is not type(other):
            raise TypeError(f"cannot combine {self.kind} and {other.kind} homeomorphisms")

    def to_json(self):
        return json.dumps({"kind": self.kind, "breaks": [[float(x), float(y)] for x, y in self.breaks]})

    @staticmethod
    def from_json(text):
        data = json.loads(text)
        cls = {"circle": PLCircleHomeo, "interval": PLIntervalHomeo}[data["kind"]]
        return cls.from_breaks(data["breaks"])

    def __repr__(self):
        return f"{type(self).__name__}({len(self.xs)} breakpoints)"


class PLIntervalHomeo(_PLHomeo):
    """PL homeomorphism of [0, 1] fixing both endpoints."""

    kind = "interval"

    def __init__(self, xs, ys):
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        if xs[0] != 0 or xs[-1] != 1 or ys[0] != 0 or ys[-1] != 1:
            raise ValueError("interval homeomorphisms must fix 0 and 1")
        super().__init__(xs, ys)

    @classmethod
    def identity(cls):
        return cls([0.0, 1.0], [0.0, 1.0])

    @classmethod
    def from_breaks(cls, breaks):
        pts = sorted((float(x), float(y)) for x, y in breaks)
        if pts[0] != (0.0, 0.0):
            pts.insert(0, (0.0, 0.0))
        if pts[-1] != (1.0, 1.0):
            pts.append((1.0, 1.0))
        xs, ys = zip(*pts)
        return cls(xs, ys)

    @property
    def breaks(self):
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)

    def inverse(self):
        return PLIntervalHomeo(self.ys, self.xs)

    def compose(self, other):
        self._check_kind(other)
        pts = np.concatenate([other.xs, other.inverse()(self.xs)])
        xs = _dedupe(np.clip(pts, 0.0, 1.0))
        xs[0], xs[-1] = 0.0, 1.0
        ys = self(other(xs))
        ys[0], ys[-1] = 0.0, 1.0
        return PLIntervalHomeo(*_simplify(xs, ys))


def _periodic_interp(x, xs, ys):
    """Evaluate the lift with nodes (xs, ys) over one period [xs[0], xs[0] + 1]."""
    x = np.asarray(x, dtype=float)
    n = np.floor(x - xs[0])
    return np.interp(x - n, xs, ys) + n


class PLCircleHomeo(_PLHomeo):
    """Degree-one PL homeomorphism of R/Z, stored through a lift."""

    kind = "circle"

    def __init__(self, xs, ys):
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        if xs[0] != 0 or xs[-1] != 1 or abs(ys[-1] - ys[0] - 1) > 1e-12:
            raise ValueError("lift nodes must span [0, 1] with F(1) = F(0) + 1")
        super().__init__(xs, ys)

    @classmethod
    def identity(cls):
        return cls([0.0, 1.0], [0.0, 1.0])

    @classmethod
    def rotation(cls, r):
        r = r - math.floor(r + 0.5)
        return cls([0.0, 1.0], [r, r + 1.0])

    @classmethod
    def from_lift(cls, xs, ys):
        """Build from lift nodes covering one period [xs[0], xs[0] + 1]."""
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        if abs(xs[-1] - xs[0] - 1) > 1e-12 or abs(ys[-1] - ys[0] - 1) > 1e-12:
            raise ValueError("lift nodes must cover exactly one period")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("lift nodes must be strictly increasing")
        ys = ys.copy()
        ys[-1] = ys[0] + 1.0
        bx = np.mod(xs[:-1], 1.0)
        bx[bx > 1.0 - SNAP] = 0.0
        bx = _dedupe(np.concatenate([bx, [0.0]]))
        by = _periodic_interp(bx, xs, ys)
        shift = math.floor(by[0] + 0.5)
        by = by - shift
        nx = np.concatenate([bx, [1.0]])
        ny = np.concatenate([by, [by[0] + 1.0]])
        return cls(*_simplify(nx, ny))

    @classmethod
    def from_breaks(cls, breaks):
        """From (x, y) pairs in [0,1)^2 with y cyclically increasing."""
        pts = sorted((float(x) % 1.0, float(y) % 1.0) for x, y in breaks)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        for i in range(1, len(ys)):
            while ys[i] <= ys[i - 1]:
                ys[i] += 1.0
        if ys[-1] >= ys[0] + 1.0:
            raise ValueError("breakpoint values wind more than once")
        return cls.from_lift(xs + [xs[0] + 1.0], ys + [ys[0] + 1.0])

    @property
    def breaks(self):
        return [(float(x), float(y) % 1.0) for x, y in zip(self.xs[:-1], self.ys[:-1])]

    def __call__(self, x):
        return _periodic_interp(x, self.xs, self.ys)

    def lift_inverse_eval(self, y):
        return _periodic_interp(y, self.ys, self.xs)

    def inverse(self):
        return PLCircleHomeo.from_lift(self.ys, self.xs)

    def compose(self, other):
        self._check_kind(other)
        pulled = np.mod(other.lift_inverse_eval(self.xs[:-1]), 1.0)
        pulled[pulled > 1.0 - SNAP] = 0.0
        xs = _dedupe(np.concatenate([other.xs[:-1], pulled, [0.0]]))
        ys = self(other(xs))
        shift = math.floor(ys[0] + 0.5)
        ys = ys - shift
        xs = np.concatenate([xs, [1.0]])
        ys = np.concatenate([ys, [ys[0] + 1.0]])
        return PLCircleHomeo(*_simplify(xs, ys))


def pl_compose(f, g):
    return f @ g


def pl_inverse(f):
    return f.inverse()


def pl_commutator(f, g):
    return f.commutator(g)


def word_product(factors, identity=None):
    out = identity if identity is not None else type(factors[0]).identity()
    for f in factors:
        out = out @ f
    return out


# ------------------------------------------------------------------ supports


def _segment_excursions(x0, x1, d0, d1, tol):
    """Sub-intervals of [x0, x1] where the circle distance of the linear
    function d (d0 -> d1) from the integers exceeds tol."""
    lo, hi = min(d0, d1), max(d0, d1)
    closed = []  # where circ(d) <= tol
    for n in range(math.floor(lo - tol), math.ceil(hi + tol) + 1):
        a, b = n - tol, n + tol
        if b < lo or a > hi:
            continue
        if d1 == d0:
            closed.append((x0, x1))
            continue
        ta = (a - d0) / (d1 - d0)
        tb = (b - d0) / (d1 - d0)
        ta, tb = sorted((ta, tb))
        ta, tb = max(ta, 0.0), min(tb, 1.0)
        if ta <= tb:
            closed.append((x0 + ta * (x1 - x0), x0 + tb * (x1 - x0)))
    closed.sort()
    out, cur = [], x0
    for a, b in closed:
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < x1:
        out.append((cur, x1))
    return out


def support(f, tol=1e-12):
    """Closure of {x : |f(x) - x| > tol} as a minimal union of intervals.

    For circle maps an arc crossing 0 is returned as (lo, hi) with hi > 1.
    """
    d = f.ys - f.xs
    pieces = []
    for i in range(len(f.xs) - 1):
        pieces += _segment_excursions(f.xs[i], f.xs[i + 1], d[i], d[i + 1], tol)
    merged = []
    for a, b in pieces:
        if merged and a <= merged[-1][1] + SNAP:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    if isinstance(f, PLCircleHomeo) and len(merged) > 1:
        if merged[0][0] <= SNAP and merged[-1][1] >= 1.0 - SNAP:
            first = merged.pop(0)
            last = merged.pop()
            merged.append((last[0], 1.0 + first[1]))
    if isinstance(f, PLCircleHomeo) and len(merged) == 1 and merged[0] == (0.0, 1.0):
        merged = [(0.0, 1.0)]
    return merged


def _shifts(arcs, circle):
    if not circle:
        return list(arcs)
    return [(a + k, b + k) for a, b in arcs for k in (-1, 0, 1)]


def arcs_overlap(A, B, circle=True, tol=SNAP):
    """True if two unions of arcs share a segment of positive length."""
    for a0, a1 in A:
        for b0, b1 in _shifts(B, circle):
            if min(a1, b1) - max(a0, b0) > tol:
                return True
    return False


def arcs_contain(outer, inner, circle=True, tol=1e-12):
    """True if every arc of ``inner`` lies inside some arc of ``outer``."""
    for a0, a1 in inner:
        if not any(b0 - tol <= a0 and a1 <= b1 + tol for b0, b1 in _shifts(outer, circle)):
            return False
    return True


def image_of_arc(f, arc):
    lo, hi = arc
    if isinstance(f, PLCircleHomeo):
        a = float(f(lo))
        b = float(f(hi))
        k = math.floor(a)
        return (a - k, b - k)
    return (float(f(lo)), float(f(hi)))


# --------------------------------------------------------- four-conjugate word


def eq5_word(a, b, h, V=None):
    """Four conjugates of h^{+-1} whose ordered product is [a, b].

    With c = h^-1 a h, the factors are h, c h^-1 c^-1, (cb) h (cb)^-1 and
    b h^-1 b^-1; the product telescopes to [a, b] once c and b commute,
    which holds when their supports are disjoint.
    """
    a._check_kind(b)
    a._check_kind(h)
    circle = isinstance(a, PLCircleHomeo)
    if V is not None:
        if not arcs_contain([V], support(a) + support(b), circle):
            raise PreconditionViolation("supports of a and b are not inside V")
        if arcs_overlap([V], [image_of_arc(h, V)], circle):
            raise PreconditionViolation("h does not displace V off itself")
    c = h.inverse() @ a @ h
    if arcs_overlap(support(c), support(b), circle):
        raise PreconditionViolation("h^-1 a h and b have overlapping supports")
    hi = h.inverse()
    return [h, hi.conjugate(c), h.conjugate(c @ b), hi.conjugate(b)]


def conjugate_word(a, b, h, g):
    """(conjugator, exponent) pairs with prod conj h^exp conj^-1 = [a, b].

    a and b live in U; the compression g carries U into V, h displaces V.
    """
    a_, b_ = a.conjugate(g), b.conjugate(g)
    eq5_word(a_, b_, h)  # precondition check
    gi = g.inverse()
    c_ = h.inverse() @ a_ @ h
    return [(gi, 1), (gi @ c_, -1), (gi @ c_ @ b_, 1), (gi @ b_, -1)]


def conjugator_norms(a, b, h, g):
    """Sup displacements of the four conjugators in conjugate_word."""
    return [conj.displacement() for conj, _ in conjugate_word(a, b, h, g)]


def evaluate_conjugate_word(word, h):
    hi = h.inverse()
    return word_product([(h if e > 0 else hi).conjugate(c) for c, e in word])


# -------------------------------------------------------------- fragmentation


def _cyclic_cover(cover):
    arcs = sorted((float(s) % 1.0, float(s) % 1.0 + (float(e) - float(s))) for s, e in cover)
    if len(arcs) < 2:
        raise ValueError("a cover of the circle needs at least two arcs")
    for s, e in arcs:
        if not 0 < e - s < 1:
            raise ValueError(f"arc ({s}, {e}) must have length in (0, 1)")
    return arcs


def fragment(f, cover):
    """Factor f = f_r o ... o f_1 with support(f_k) inside the k-th arc.

    Arcs are sorted by start and must form a cyclic chain: each overlaps the
    next, and consecutive overlaps are disjoint.  G_k agrees with f from the
    last overlap up to a point p_k just inside the overlap O_k of arcs k and
    k+1, jumps linearly to the identity at the right end of O_k, and is the
    identity until the last overlap, where it climbs back to f.  Then
    f_k = G_k o G_{k-1}^-1 moves only points of [f(p_{k-1}), end of arc k].
    Needs every overlap wider than twice the displacement of f.  Returned
    factors follow the sorted arc order.
    """
    arcs = _cyclic_cover(cover)
    r = len(arcs)
    m = f.displacement()
    margin = m + 1e-12
    overlaps = []
    for k in range(r):
        s_next = arcs[(k + 1) % r][0] + (1.0 if k == r - 1 else 0.0)
        e_k = arcs[k][1]
        if e_k <= s_next:
            raise ValueError(f"arcs {k} and {(k + 1) % r} do not overlap")
        overlaps.append((s_next, e_k))
    for lo, hi in overlaps:
        if hi - lo <= 2 * margin:
            raise DisplacementTooLarge(f"displacement {m:.3g} too large for overlap of width {hi - lo:.3g}")
    trans = [(lo + margin, hi) for lo, hi in overlaps[:-1]]
    p_r = overlaps[-1][0]
    s = overlaps[-1][1] - margin - 1.0
    chain = [s] + [v for pq in trans for v in pq] + [p_r, s + 1.0]
    if np.any(np.diff(chain) <= 0):
        raise ValueError("consecutive overlaps of the cover must be disjoint and ordered")

    Fs = float(f(s))
    inner = f.xs[:-1]
    inner = np.concatenate([inner + k for k in (-1.0, 0.0, 1.0)])
    G = [type(f).identity()]
    for p_k, q_k in trans:
        mid = inner[(inner > s) & (inner < p_k)]
        xs = np.concatenate([[s], mid, [p_k, q_k, p_r, s + 1.0]])
        ys = np.concatenate([[Fs], f(mid), [float(f(p_k)), q_k, p_r, Fs + 1.0]])
        G.append(PLCircleHomeo.from_lift(xs, ys))
    G.append(f)
    return [G[k + 1] @ G[k].inverse() for k in range(r)]


# ------------------------------------------------------------- net displacer


def net_displacer(net, delta):
    """PL h supported in the 2*delta-balls around the net points, pushing
    each delta-ball entirely past itself."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    pts = sorted(float(p) % 1.0 for p in net)
    if not pts:
        return PLCircleHomeo.identity()
    gaps = np.diff(pts + [pts[0] + 1.0])
    if np.any(gaps < 4 * delta - 1e-15):
        raise NetTooDense(f"net points closer than 4*delta = {4 * delta}")
    x0 = pts[0] - 2 * delta
    xs, ys = [], []
    for p in pts:
        xs += [p - 2 * delta, p - delta, p + delta, p + 2 * delta]
        ys += [p - 2 * delta, p + 1.25 * delta, p + 1.75 * delta, p + 2 * delta]
    xs.append(x0 + 1.0)
    ys.append(x0 + 1.0)
    xs, ys = np.array(xs), np.array(ys)
    keep = np.concatenate([[True], np.diff(xs) > SNAP])
    return PLCircleHomeo.from_lift(xs[keep], ys[keep])


# ------------------------------------------------ universal cover on [0, 1]


def kappa(x):
    """Orientation-preserving homeomorphism R -> (0, 1)."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (1.0 + x / (1.0 + np.abs(x)))


def kappa_inv(t):
    u = 2.0 * np.asarray(t, dtype=float) - 1.0
    return u / (1.0 - np.abs(u))


class IntervalAction:
    """t -> kappa(F(kappa^-1(t))) on (0, 1), endpoints fixed."""

    def __init__(self, lifted):
        self.lifted = lifted

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.array(t, dtype=float, copy=True)
        inner = (t > 0.0) & (t < 1.0)
        if np.any(inner):
            out[inner] = kappa(self.lifted(kappa_inv(t[inner])))
        return out if out.ndim else float(out)

    def to_pl(self, n=4096):
        xs = np.linspace(0.0, 1.0, n + 1)
        ys = self(xs)
        ys[0], ys[-1] = 0.0, 1.0
        return PLIntervalHomeo(xs, ys)


def tilde_interval_action(x):
    return IntervalAction(x)


def implant(f, arc):
    """Rescale an interval homeomorphism onto a circle arc; identity elsewhere."""
    start, end = float(arc[0]), float(arc[1])
    length = end - start
    if not 0 < length <= 1:
        raise ValueError("arc length must lie in (0, 1]")
    xs = start + length * f.xs
    ys = start + length * f.ys
    if length < 1:
        xs = np.append(xs, start + 1.0)
        ys = np.append(ys, start + 1.0)
    return PLCircleHomeo.from_lift(xs, ys)


# ------------------------------------------------------------------- samplers


def bump(lo, hi, shift=0.5, kind="circle"):
    """PL map supported on [lo, hi] moving the midpoint by shift*(hi-lo)/2."""
    if not lo < hi:
        raise ValueError("empty bump interval")
    if not -1 < shift < 1:
        raise ValueError("shift must lie in (-1, 1)")
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xs = [lo, mid, hi]
    ys = [lo, mid + shift * half, hi]
    if kind == "interval":
        pts = [(0.0, 0.0)] + list(zip(xs, ys)) + [(1.0, 1.0)]
        pts = [p for i, p in enumerate(pts) if i == 0 or p[0] > pts[i - 1][0]]
        return PLIntervalHomeo.from_breaks(pts)
    return PLCircleHomeo.from_lift(xs + [lo + 1.0], ys + [lo + 1.0])


def random_supported(rng, lo, hi, n=4, kind="circle", max_slope=4.0):
    """Random PL map supported on [lo, hi] with n interior breakpoints and
    slopes in [1/max_slope, max_slope]."""
    dx = rng.dirichlet(np.ones(n + 1)) * (hi - lo)
    half = 0.5 * math.log(max_slope)
    dy = dx * np.exp(rng.uniform(-half, half, n + 1))
    dy *= (hi - lo) / dy.sum()
    xs = lo + np.concatenate([[0.0], np.cumsum(dx)])
    ys = lo + np.concatenate([[0.0], np.cumsum(dy)])
    xs[-1] = ys[-1] = hi
    if kind == "interval":
        pts = [(0.0, 0.0)] + [(x, y) for x, y in zip(xs, ys)] + [(1.0, 1.0)]
        return PLIntervalHomeo.from_breaks(sorted(set(pts)))
    return PLCircleHomeo.from_lift(np.append(xs, lo + 1.0), np.append(ys, lo + 1.0))


def random_near_identity(rng, disp, n=8):
    """Random circle homeo with sup displacement at most disp."""
    xs = np.sort(rng.uniform(0.0, 1.0, n))
    d = rng.uniform(-disp, disp, n)
    while True:
        lx, ly = np.append(xs, xs[0] + 1.0), np.append(xs + d, xs[0] + d[0] + 1.0)
        if np.all(np.diff(lx) > 0) and np.all(np.diff(ly) > 0):
            return PLCircleHomeo.from_lift(lx, ly)
        d *= 0.5
