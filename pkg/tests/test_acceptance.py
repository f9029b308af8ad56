"""One test per acceptance criterion, each reporting a PASS/FAIL line."""

import io
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from flatholo import circledyn as cd
from flatholo import cli, su2lab
from flatholo.mwbuild import build, commutator_angle, fuchsian_octagon, genus_bound
from flatholo.psl2core import LieVec, ProjMatrix, exp_sl2, rotation
from flatholo.ucover import (
    LiftedElement, SurfaceRep, cocycle, euler_class, lift_compose, relator_defect,
    translation_number, translation_numbers_iterative,
)


def report(label, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def random_proj(rng):
    m = rng.normal(size=(2, 2))
    if np.linalg.det(m) < 0:
        m[:, 0] *= -1
    return ProjMatrix.from_array(m / math.sqrt(np.linalg.det(m)))


def random_lift(rng):
    return LiftedElement(random_proj(rng), int(rng.integers(-3, 4)))


# ----------------------------------------------------------------- 1


def test_c01_quadratic_commutator_law():
    t0 = time.perf_counter()
    eps = np.array([0.2, 0.1, 0.05, 0.025, 0.0125])
    theta = [commutator_angle(e) for e in eps]
    slope = float(np.polyfit(np.log(eps), np.log(theta), 1)[0])
    dt = time.perf_counter() - t0
    ok = abs(slope - 2.0) <= 0.05 and dt < 1.0
    assert report("1 quadratic commutator law", ok, f"slope {slope:.4f}, {dt:.3f} s")


# ----------------------------------------------------------------- 2, 4

CASES = [(chi, eps, m) for chi in (1, 2) for eps in (0.2, 0.1, 0.05) for m in (1, 2, 3)]


@pytest.fixture(scope="module")
def builds():
    t0 = time.perf_counter()
    out = {case: build(*case) for case in CASES}
    return out, time.perf_counter() - t0


def test_c02_construction(builds):
    reps, dt = builds
    bad = []
    for (chi, eps, m), rep in reps.items():
        if not (rep.defect <= 1e-8 and rep.euler == chi and euler_class(rep.rep) == chi
                and rep.max_dist_to_rotations <= eps + 1e-4 and rep.genus <= genus_bound(chi, eps)):
            bad.append((chi, eps, m))
        if m == 1 and abs(rep.genus * commutator_angle(rep.epsilon_used) - abs(chi)) > 1e-9:
            bad.append((chi, eps, m, "theta"))
    ok = not bad and dt < 60
    worst = max(r.defect for r in reps.values())
    assert report("2 construction (18 builds)", ok, f"max defect {worst:.1e}, {dt:.2f} s, failures {bad}")


def test_c04_milnor_wood(builds):
    reps, _ = builds
    mw = all(abs(r.euler) <= 2 * r.genus - 2 for r in reps.values() if r.genus >= 2)
    fn7 = all(abs(chi) <= 4 * r.genus * eps + 1e-9 for (chi, eps, m), r in reps.items() if m == 1)
    assert report("4 Milnor-Wood and linear estimate", mw and fn7)


# ----------------------------------------------------------------- 3


def test_c03_genus_scaling():
    ratios = []
    for eps in (0.1, 0.05):
        ratios.append(build(1, eps / 2, 1).genus / build(1, eps, 1).genus)
    ok = all(abs(r - 4) <= 1.0 for r in ratios)
    assert report("3 genus scaling", ok, "ratios " + ", ".join(f"{r:.3f}" for r in ratios))


# ----------------------------------------------------------------- 5


def test_c05_euler_oracle():
    octa = fuchsian_octagon()
    ok_oct = relator_defect(octa) <= 1e-8 and abs(euler_class(octa)) == 2
    ok_triv = euler_class(SurfaceRep.trivial(2)) == 0
    rot = SurfaceRep(3, [rotation(a) for a in (0.1, 0.5, 1.1, 2.0, 2.9, 0.3)])
    ok_rot = euler_class(rot) == 0
    rng = np.random.default_rng(5)
    built = build(1, 0.2, 3).rep
    invariant = True
    for _ in range(100):
        for rep in (octa, built):
            offs = rng.integers(-5, 6, size=len(rep.gens))
            invariant &= euler_class(rep, offs) == euler_class(rep)
    ok = ok_oct and ok_triv and ok_rot and invariant
    assert report("5 Euler-class oracle", ok, f"octagon euler {euler_class(octa)}")


# ----------------------------------------------------------------- 6


@pytest.fixture(scope="module")
def qm_defects():
    rng = np.random.default_rng(6)
    out = []
    for _ in range(10_000):
        x, y = random_lift(rng), random_lift(rng)
        out.append(translation_number(lift_compose(x, y)) - translation_number(x) - translation_number(y))
    return np.abs(np.array(out))


def test_c06a_cocycle():
    rng = np.random.default_rng(60)
    vals = set()
    for _ in range(100_000):
        vals.add(cocycle(random_proj(rng), random_proj(rng)))
    assert report("6a cocycle in {0,1} (1e5 pairs)", vals <= {0, 1}, f"values {sorted(vals)}")


@pytest.mark.xfail(strict=True, reason="the sharp defect of the translation number is 1 and is attained; see ledger")
def test_c06b_quasimorphism_strict(qm_defects):
    worst = float(qm_defects.max())
    hits = int(np.sum(qm_defects >= 1))
    ok = report("6b quasimorphism defect < 1 (1e4 pairs)", worst < 1,
                f"max defect {worst}, attained in {hits} pairs; sharp bound <= 1 holds: {worst <= 1}")
    assert ok


def test_c06b_quasimorphism_sharp(qm_defects):
    assert float(qm_defects.max()) <= 1.0


def test_c06c_closed_form_vs_orbit_average():
    rng = np.random.default_rng(61)
    xs = [random_lift(rng) for _ in range(100)]
    it = translation_numbers_iterative(xs, 10 ** 6)
    err = max(abs(a - translation_number(x)) for a, x in zip(it, xs))
    assert report("6c closed form vs orbit average (100 elements)", err <= 1e-5, f"max diff {err:.2e}")


# ----------------------------------------------------------------- 7


def test_c07_eq5_identity_suite():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    errs, ratios = [], []
    for _ in range(50):
        lo, L = rng.uniform(0, 1), rng.uniform(0.005, 0.02)
        a = cd.random_supported(rng, lo, lo + L)
        b = cd.random_supported(rng, lo, lo + L)
        h = cd.net_displacer([lo + L / 2], L / 2)
        prod = cd.word_product(cd.eq5_word(a, b, h, V=(lo, lo + L)))
        errs.append(prod.sup_distance(cd.pl_commutator(a, b)))
        eps = max(L, h.displacement())
        ratios.append(max(cd.conjugator_norms(a, b, h, cd.PLCircleHomeo.identity())) / eps)
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-12 and max(ratios) <= 8 and dt < 5
    assert report("7 four-factor identity (50 instances)", ok,
                  f"max error {max(errs):.1e}, max norm/eps {max(ratios):.2f}, {dt:.2f} s")


# ----------------------------------------------------------------- 8


def test_c08_fragmentation():
    rng = np.random.default_rng(8)
    cover = [(0.0, 0.4), (0.25, 0.65), (0.5, 0.9), (0.75, 1.15)]
    err, inside = 0.0, True
    for _ in range(50):
        f = cd.random_near_identity(rng, 0.05)
        fs = cd.fragment(f, cover)
        prod = cd.PLCircleHomeo.identity()
        for fk in fs:
            prod = fk @ prod
        err = max(err, prod.sup_distance(f))
        inside &= all(cd.arcs_contain([arc], cd.support(fk)) for arc, fk in zip(cover, fs))
    assert report("8 fragmentation (50 instances)", err <= 1e-12 and inside, f"max error {err:.1e}")


# ----------------------------------------------------------------- 9


def test_c09_binary_icosahedral():
    t0 = time.perf_counter()
    G = su2lab.bi_generate()
    cen = G.center()
    ok = (len(G) == 120 and su2lab.is_perfect(G)
          and sorted(G.elements[i].w for i in cen) == [-1.0, 1.0]
          and sum(su2lab.normally_generates(G.elements[i], G) for i in range(120) if i not in cen) == 118)
    dt = time.perf_counter() - t0
    assert report("9 binary icosahedral suite", ok and dt < 5, f"{dt:.2f} s")


# ----------------------------------------------------------------- 10


def test_c10_su2_solvers():
    rng = np.random.default_rng(10)
    g = su2lab.rotation(rng.normal(size=3), 2 * math.pi / 5)
    cp = []
    for i in range(20):
        t = su2lab.random_unit(rng)
        sol = su2lab.conj_product_solve(t, g, maxlen=64, tol=1e-6, seed=i)
        cp.append((sol.product(g).distance(t), len(sol.conjugators)))
    cd_res = []
    for i in range(20):
        f = su2lab.random_unit(rng)
        pairs = su2lab.commutator_decomp_su2(f, 1 + i % 3, seed=i)
        cd_res.append(su2lab.commutator_product(pairs).distance(f))
    targets = [(su2lab.rotation([0, 0, 1], math.pi / 3), su2lab.ONE),
               (su2lab.QI, su2lab.ONE),
               (su2lab.random_unit(rng), su2lab.random_unit(rng))]
    probe = su2lab.diagonal_closure_probe(targets, g, budget=200, tol=1e-4)
    ok = (all(r <= 1e-6 and n <= 64 for r, n in cp) and max(cd_res) <= 1e-8 and probe.hits == 3)
    assert report("10 SU(2) solvers", ok,
                  f"conj max {max(r for r, _ in cp):.1e}, comm max {max(cd_res):.1e}, probe hits {probe.hits}/3")


# ----------------------------------------------------------------- 11


def test_c11_interval_action():
    rng = np.random.default_rng(11)
    t = np.concatenate([[0.0, 1.0], rng.uniform(0, 1, 64)])
    hom = 0.0
    for _ in range(1000):
        x, y = random_lift(rng), random_lift(rng)
        lhs = cd.tilde_interval_action(lift_compose(x, y))(t)
        rhs = cd.tilde_interval_action(x)(cd.tilde_interval_action(y)(t))
        hom = max(hom, float(np.max(np.abs(lhs - rhs))))
    samples = np.linspace(0, 1, 1026)[1:-1]
    faithful = 0
    ends = True
    for _ in range(100):
        x = LiftedElement(exp_sl2(LieVec(*rng.normal(size=3))), int(rng.integers(-2, 3)))
        act = cd.tilde_interval_action(x)
        ends &= act(0.0) == 0.0 and act(1.0) == 1.0
        faithful += bool(np.max(np.abs(act(samples) - samples)) > 1e-12)
    ok = hom <= 1e-9 and ends and faithful == 100
    assert report("11 interval action", ok, f"hom error {hom:.1e}, faithful {faithful}/100")


# ----------------------------------------------------------------- 12


def test_c12_cli_determinism(tmp_path):
    args = ["sweep", "--chi", "1", "2", "--eps", "0.2", "0.1", "--methods", "1", "2", "3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(args + ["--out", str(a)], out=io.StringIO()) == 0
    assert cli.main(args + ["--out", str(b)], out=io.StringIO()) == 0
    ok = a.read_bytes() == b.read_bytes()
    assert report("12 CLI determinism", ok, f"{len(a.read_bytes())} bytes")
