"""Surface-group representations with generators close to rotations.

Each builder returns a genus-g representation into PSL(2,R) whose Euler
class is a prescribed integer chi and whose generators all lie within eps
(sup norm on RP^1, in turns) of the rotation subgroup.  The commutator of
two small boosts exp(eps E), exp(eps F) is elliptic and rotates RP^1 by
theta(eps) ~ c0 eps^2 turns, so about |chi|/theta(eps) pairs are needed.
The three builders differ in how they close up the relator exactly.
"""

import math
import cmath
from dataclasses import dataclass, field

import numpy as np

from . import config as _config
from .psl2core import (
    IDENTITY,
    E,
    F,
    LieVec,
    ProjMatrix,
    classify,
    commutator,
    compose,
    dist_to_rotations,
    elliptic_center,
    exp_sl2,
    max_entry_distance,
    moving_to_i,
    rotation,
    rotation_turns,
)
from .ucover import SurfaceRep, euler_class, relator_defect

MAX_EPS = 0.2
ANGLE_EPS_RANGE = 0.5


class NotElliptic(ArithmeticError):
    pass


class EpsTooLarge(ValueError):
    pass


class TargetOutOfRange(ValueError):
    pass


class NoConvergence(ArithmeticError):
    def __init__(self, msg, history=()):
        super().__init__(msg)
        self.history = list(history)


def boost_commutator(eps, swap=False):
    a, b = exp_sl2(eps * E), exp_sl2(eps * F)
    return commutator(b, a) if swap else commutator(a, b)


def commutator_angle(eps):
    """Rotation, in RP^1 turns, of [exp(eps E), exp(eps F)]."""
    if not 0 < eps <= ANGLE_EPS_RANGE:
        raise ValueError(f"eps={eps!r} outside (0, {ANGLE_EPS_RANGE}]")
    c = boost_commutator(eps)
    # trace is 2 - 4 eps^4 + ..., resolved exactly enough down to eps ~ 3e-4
    kind = classify(c, tol=0.0).kind
    if kind != "elliptic":
        raise NotElliptic(f"commutator at eps={eps!r} is {kind}")
    return abs(rotation_turns(c))


# the (E, F) commutator turns RP^1 in this direction
_EF_SIGN = -1 if rotation_turns(boost_commutator(0.1)) < 0 else 1


def eps_for_angle(theta, hi=ANGLE_EPS_RANGE, tol=1e-12):
    """Bisect for eps in (0, hi] with commutator_angle(eps) = theta."""
    if theta <= 0:
        return 0.0
    if theta > commutator_angle(hi):
        raise TargetOutOfRange(f"angle {theta!r} exceeds theta({hi})")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if commutator_angle(mid) < theta:
            lo = mid
        else:
            hi = mid
    best = min((lo, hi), key=lambda e: abs(commutator_angle(e) - theta) if e > 0 else math.inf)
    if abs(commutator_angle(best) - theta) > tol:
        raise NoConvergence(f"bisection stalled at eps={best!r}")
    return best


def oriented_pair(eps, sign):
    """(exp(eps X), exp(eps Y)) whose commutator turns RP^1 in direction sign."""
    a, b = exp_sl2(eps * E), exp_sl2(eps * F)
    return (a, b) if sign == _EF_SIGN else (b, a)


def genus_bound(chi, eps, c0=None, K=None):
    """ceil(|chi| / (c0 eps^2 (1 - K eps))): the quadratic genus law."""
    if chi == 0:
        return 0
    if not eps > 0:
        raise ValueError("eps must be positive")
    c0 = _config.DEFAULT_C0 if c0 is None else c0
    K = _config.DEFAULT_K if K is None else K
    shrink = 1.0 - K * eps
    if shrink <= 0:
        raise ValueError(f"eps={eps!r} outside the validity range 1/K={1 / K:.3g}")
    return math.ceil(abs(chi) / (c0 * eps * eps * shrink))


# ------------------------------------------------------------------ reports


@dataclass
class BuildReport:
    rep: SurfaceRep
    chi: int
    eps: float
    epsilon_used: float
    genus: int
    defect: float
    euler: int
    max_dist_to_rotations: float
    method: int
    theta_per_commutator: float
    extras: dict = field(default_factory=dict)

    def summary(self):
        out = {
            "chi": self.chi,
            "eps": self.eps,
            "method": self.method,
            "genus": self.genus,
            "epsilon_used": self.epsilon_used,
            "defect": self.defect,
            "euler": self.euler,
            "max_dist_to_rotations": self.max_dist_to_rotations,
            "theta_per_commutator": self.theta_per_commutator,
        }
        out.update(self.extras)
        return out

    def to_dict(self, include_generators=True):
        out = self.summary()
        if include_generators:
            out["generators"] = [list(g.entries()) for g in self.rep.gens]
        return out


def _max_dist(gens, grid=2048):
    cache = {}
    for g in gens:
        if g not in cache:
            cache[g] = dist_to_rotations(g, grid)
    return max(cache.values(), default=0.0)


def _finish(rep, chi, eps, eps_used, method, theta, grid, **extras):
    defect = relator_defect(rep)
    euler = euler_class(rep) if rep.genus else 0
    return BuildReport(
        rep=rep,
        chi=chi,
        eps=eps,
        epsilon_used=eps_used,
        genus=rep.genus,
        defect=defect,
        euler=euler,
        max_dist_to_rotations=_max_dist(rep.gens, grid),
        method=method,
        theta_per_commutator=theta,
        extras=extras,
    )


def _trivial_report(method, eps):
    return BuildReport(SurfaceRep(0, []), 0, eps, 0.0, 0, 0.0, 0, 0.0, method, 0.0)


def _check_eps(eps):
    if not 0 < eps:
        raise ValueError("eps must be positive")
    if eps > MAX_EPS:
        raise EpsTooLarge(f"eps={eps!r} exceeds {MAX_EPS}")


def _chain_power(c, n):
    out = IDENTITY
    for _ in range(n):
        out = compose(out, c)
    return out


# ----------------------------------------------------------------- method 1


def build_method1(chi, eps, grid=2048, max_retries=20):
    """Conjugate the boost pair so its commutator is an exact rotation.

    With g = ceil(|chi| / theta(eps)) and eps' bisected so that
    theta(eps') = |chi|/g, the commutator rotates by exactly 1/g of |chi|
    turns and g identical pairs close up the relator.
    """
    _check_eps(eps)
    if chi == 0:
        return _trivial_report(1, eps)
    sign = 1 if chi > 0 else -1
    budget = eps
    for attempt in range(max_retries + 1):
        g = math.ceil(abs(chi) / commutator_angle(budget))
        target = abs(chi) / g
        eps_used = eps_for_angle(target, hi=budget)
        a, b = oriented_pair(eps_used, sign)
        c = commutator(a, b)
        gamma = moving_to_i(elliptic_center(c))
        gi = gamma.inverse()
        a, b = compose(gamma, compose(a, gi)), compose(gamma, compose(b, gi))
        if max(dist_to_rotations(a, grid), dist_to_rotations(b, grid)) <= eps:
            break
        budget *= 0.9
    else:
        raise NoConvergence(f"conjugated generators leave the eps-ball after {max_retries} retries")
    rep = SurfaceRep(g, [a, b] * g)
    theta_used = commutator_angle(eps_used)
    return _finish(rep, chi, eps, eps_used, 1, theta_used, grid,
                   retries=attempt, conjugator_offset=max_entry_distance(gamma, IDENTITY))


# --------------------------------------------------------- Newton solver


def _exp_arr(v):
    h, e, f = v
    # [[e, 2h + f], [f - 2h, -e]]
    x00, x01, x10 = e, 2 * h + f, f - 2 * h
    rho2 = x00 * x00 + x01 * x10
    if abs(rho2) < 1e-8:
        c = 1 + rho2 / 2 + rho2 * rho2 / 24
        s = 1 + rho2 / 6 + rho2 * rho2 / 120
    elif rho2 > 0:
        r = math.sqrt(rho2)
        c, s = math.cosh(r), math.sinh(r) / r
    else:
        r = math.sqrt(-rho2)
        c, s = math.cos(r), math.sin(r) / r
    return np.array([[c + s * x00, s * x01], [s * x10, c - s * x00]])


def _inv2(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def _comm_arr(x):
    A, B = _exp_arr(x[:3]), _exp_arr(x[3:])
    return A @ B @ _inv2(A) @ _inv2(B)


@dataclass
class CommutatorSolution:
    a: ProjMatrix
    b: ProjMatrix
    xi: LieVec
    eta: LieVec
    residual: float
    history: list

    def __iter__(self):
        return iter((self.a, self.b))


def solve_commutator(target, bound, seed=None, max_iter=100, tol=1e-10, ridge=1e-8):
    """Find a = exp(xi), b = exp(eta) with [a, b] = target, |xi|, |eta| <= bound.

    Damped Gauss-Newton on the six Lie-algebra coordinates, with a ridge
    term picking the minimal-norm update.  The default seed is the boost
    pair whose commutator has the target's rotation angle.
    """
    gap = max_entry_distance(target, IDENTITY)
    if gap <= tol:
        z = LieVec()
        return CommutatorSolution(IDENTITY, IDENTITY, z, z, gap, [])
    kind = classify(target, tol=0.0)
    if kind.kind != "elliptic":
        raise TargetOutOfRange(f"target is {kind.kind}")
    turns = rotation_turns(target)
    limit = commutator_angle(min(bound, ANGLE_EPS_RANGE))
    if abs(turns) > limit * (1 + 1e-12):
        raise TargetOutOfRange(f"target rotates {abs(turns):.3e} turns, above theta(bound)={limit:.3e}")
    if seed is None:
        s = eps_for_angle(abs(turns), hi=min(bound, ANGLE_EPS_RANGE))
        first, second = (E, F) if (turns < 0) == (_EF_SIGN < 0) else (F, E)
        seed = (s * first, s * second)
    x = np.array(seed[0].as_tuple() + seed[1].as_tuple(), dtype=float)

    T = target.to_array()
    if np.trace(T) < 0:
        T = -T

    def residual(x):
        return (_comm_arr(x) - T).ravel()

    def jacobian(x, h=1e-7):
        J = np.empty((4, 6))
        for j in range(6):
            dx = np.zeros(6)
            dx[j] = h
            J[:, j] = (residual(x + dx) - residual(x - dx)) / (2 * h)
        return J

    r = residual(x)
    history = [float(np.max(np.abs(r)))]
    for _ in range(max_iter):
        if history[-1] <= 1e-15:
            break
        J = jacobian(x)
        step = -np.linalg.solve(J.T @ J + ridge * np.eye(6), J.T @ r)
        t = 1.0
        for _ in range(40):
            r_new = residual(x + t * step)
            if np.max(np.abs(r_new)) < history[-1]:
                break
            t *= 0.5
        else:
            break
        x = x + t * step
        r = r_new
        history.append(float(np.max(np.abs(r))))
        if len(history) > 3 and history[-1] > 0.5 * history[-2] and history[-1] < tol * 1e-3:
            break
    xi, eta = LieVec(*x[:3]), LieVec(*x[3:])
    a, b = exp_sl2(xi), exp_sl2(eta)
    res = max_entry_distance(commutator(a, b), target)
    if res > tol:
        raise NoConvergence(f"residual {res:.3e} after {len(history) - 1} iterations", history)
    if max(xi.norm(), eta.norm()) > bound * (1 + 1e-9):
        raise NoConvergence(f"solution norm {max(xi.norm(), eta.norm()):.3e} exceeds bound {bound}", history)
    return CommutatorSolution(a, b, xi, eta, res, history)


def _elliptic_root(q, k):
    """The k-th root of an elliptic q along its one-parameter subgroup, taking
    the representative rotation angle of smallest magnitude."""
    gamma = moving_to_i(elliptic_center(q))
    r = compose(gamma, compose(q, gamma.inverse()))
    phi = math.pi * rotation_turns(r)
    return compose(gamma.inverse(), compose(rotation(phi / k), gamma))


# ----------------------------------------------------------------- method 2


def build_method2(chi, eps, grid=2048):
    """Let the boost commutator's powers run, then patch the discrepancy.

    p = round(|chi| / theta(eps)) identical boost pairs leave a residual
    rotation along the commutator's elliptic subgroup; it is split into
    k equal roots, each written as a single commutator of small elements.
    """
    _check_eps(eps)
    if chi == 0:
        return _trivial_report(2, eps)
    sign = 1 if chi > 0 else -1
    theta = commutator_angle(eps)
    p = round(abs(chi) / theta)
    a, b = oriented_pair(eps, sign)
    c = commutator(a, b)
    q_total = _chain_power(c, p).inverse()
    if classify(q_total).kind == "identity":
        k = 0
    else:
        k = math.ceil(abs(rotation_turns(q_total)) / theta)
    gens = [a, b] * p
    patch_norms = []
    if k:
        root = _elliptic_root(q_total, k)
        sol = solve_commutator(root, eps)
        gens += [sol.a, sol.b] * k
        patch_norms = [sol.xi.norm(), sol.eta.norm()]
    rep = SurfaceRep(p + k, gens)
    return _finish(rep, chi, eps, eps, 2, theta, grid, main_pairs=p, patch_pairs=k,
                   patch_norm=max(patch_norms, default=0.0))


# ----------------------------------------------------------------- method 3


def build_method3(chi, eps, grid=2048):
    """Keep g - 1 provisional boost pairs and solve for the last pair exactly."""
    _check_eps(eps)
    if chi == 0:
        return _trivial_report(3, eps)
    sign = 1 if chi > 0 else -1
    theta = commutator_angle(eps)
    g = math.ceil(abs(chi) / theta)
    a, b = oriented_pair(eps, sign)
    partial = _chain_power(commutator(a, b), g - 1)
    sol = solve_commutator(partial.inverse(), eps)
    seed_xi, seed_eta = (eps * E, eps * F) if sign == _EF_SIGN else (eps * F, eps * E)
    perturbation = math.sqrt((sol.xi - seed_xi).norm() ** 2 + (sol.eta - seed_eta).norm() ** 2)
    rep = SurfaceRep(g, [a, b] * (g - 1) + [sol.a, sol.b])
    return _finish(rep, chi, eps, eps, 3, theta, grid, last_pair_perturbation=perturbation,
                   last_pair_norm=max(sol.xi.norm(), sol.eta.norm()))


BUILDERS = {1: build_method1, 2: build_method2, 3: build_method3}


def build(chi, eps, method, grid=2048):
    try:
        builder = BUILDERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    return builder(chi, eps, grid=grid)


# ------------------------------------------------------------ octagon oracle


def _disk_to_origin(p):
    return np.array([[1, -p], [-np.conj(p), 1]], dtype=complex)


def _mobius(m, z):
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def _normalize_segment(p1, p2):
    # disk isometry taking p1 to 0 and p2 onto the positive real axis
    m = _disk_to_origin(p1)
    half = cmath.exp(-0.5j * cmath.phase(_mobius(m, p2)))
    return np.array([[half, 0], [0, 1 / half]]) @ m


def _segment_map(p1, p2, q1, q2):
    return np.linalg.inv(_normalize_segment(q1, q2)) @ _normalize_segment(p1, p2)


_CAYLEY = np.array([[1, -1j], [1, 1j]])


def _disk_to_sl2(m):
    w = np.linalg.inv(_CAYLEY) @ m @ _CAYLEY
    w = w / np.sqrt(np.linalg.det(w))
    if np.max(np.abs(w.imag)) > np.max(np.abs(w.real)):
        w = w * 1j
    return ProjMatrix.from_array(w.real)


def fuchsian_octagon():
    """Genus-2 Fuchsian representation from the regular octagon with
    interior angles pi/4, sides labelled a b a^-1 b^-1 c d c^-1 d^-1."""
    cosh_r = (1 / math.tan(math.pi / 8)) ** 2
    r = math.tanh(math.acosh(cosh_r) / 2)
    v = [r * cmath.exp(1j * (math.pi / 8 + k * math.pi / 4)) for k in range(8)]

    def pairing(src, dst):
        # side k runs from v[k] to v[k+1]; map side src onto side dst reversed
        return _disk_to_sl2(_segment_map(v[src], v[(src + 1) % 8], v[(dst + 1) % 8], v[dst]))

    A, B, C, D = pairing(2, 0), pairing(3, 1), pairing(6, 4), pairing(7, 5)
    return SurfaceRep(2, [A, B.inverse(), C, D.inverse()])


# -------------------------------------------------------------------- sweep

SWEEP_COLUMNS = ("chi", "eps", "method", "genus", "bound", "defect", "euler", "max_dist", "theta", "status")


def sweep(chi_list, eps_list, methods, seed=0, grid=2048, c0=None, K=None):
    """One row per (chi, eps, method), ordered by that key; failures become rows.

    The builders are deterministic, so ``seed`` only tags the run.
    """
    rows = []
    for chi in sorted(set(chi_list)):
        for eps in sorted(set(eps_list)):
            for method in sorted(set(methods)):
                row = dict.fromkeys(SWEEP_COLUMNS, "")
                row.update(chi=chi, eps=eps, method=method)
                try:
                    row["bound"] = genus_bound(chi, eps, c0, K)
                    rep = build(chi, eps, method, grid=grid)
                    row.update(genus=rep.genus, defect=rep.defect, euler=rep.euler,
                               max_dist=rep.max_dist_to_rotations, theta=rep.theta_per_commutator,
                               status="ok")
                except Exception as exc:  # noqa: BLE001 - failures are reported as rows
                    row["status"] = f"error: {type(exc).__name__}: {exc}"
                rows.append(row)
    return rows
