"""Acceptance suite: ten end-to-end checks the package must satisfy.

Run `pytest tests/test_acceptance.py -v` to get one pass/fail line per
criterion.  Every test prints the observed quantities next to the tolerance
it asserts, so a failing run shows how far off the build is.  Timed criteria
assert their wall-clock budget too.
"""

import itertools
import math
import time

import numpy as np

from opmlab import bergman as brg, geometry as geo, measure as msr, opm, szego


def test_criterion_01_circle_point_mass_growth():
    # Exterior point z0 = 2 on the unit circle: the optimal value is |z0|^(2n)
    # and the discretized harmonic measure of z0 attains it.
    t0 = time.perf_counter()
    g = geo.unit_circle()
    grid = msr.discretize_boundary(g, 512)
    pois = msr.balayage_point_mass(g, 2.0, 512)
    worst_solver = worst_pois = 0.0
    for n in range(1, 11):
        target = 4.0**n
        sol = opm.solve_opm(grid, 2.0, n)
        worst_solver = max(worst_solver, abs(sol.objective - target) / target)
        val = brg.bergman_function(pois, n, 2.0).bergman
        worst_pois = max(worst_pois, abs(val - target) / target)
    dt = time.perf_counter() - t0
    print(
        f"criterion 01: solver rel err {worst_solver:.3e} (tol 1e-3), "
        f"harmonic-measure rel err {worst_pois:.3e} (tol 1e-8), {dt:.2f}s (budget 5s)"
    )
    assert worst_solver <= 1e-3
    assert worst_pois <= 1e-8
    assert dt < 5.0


def test_criterion_02_arclength_closed_form():
    # Normalized arclength on the circle: B_n(mu, z) = (|z|^(2n+2)-1)/(|z|^2-1).
    mu = msr.uniform_measure(msr.discretize_boundary(geo.unit_circle(), 128))
    worst = 0.0
    for n in range(1, 21):
        target = (4.0 ** (n + 1) - 1.0) / 3.0
        val = brg.bergman_function(mu, n, 2.0).bergman
        worst = max(worst, abs(val - target) / target)
    print(f"criterion 02: arclength rel err {worst:.3e} (tol 1e-8), degrees 1..20")
    assert worst <= 1e-8


def test_criterion_03_circle_moment_convergence():
    # Optimal measures approach the balayage of the point mass: the first five
    # moments tighten by at least 3x between degrees 5 and 20.
    t0 = time.perf_counter()
    g = geo.unit_circle()
    grid = msr.discretize_boundary(g, 512)
    bal = msr.balayage_point_mass(g, 2.0, 512)
    disc = {}
    for n in (5, 20):
        sol = opm.solve_opm(grid, 2.0, n, gap_tol=1e-8)
        disc[n] = msr.moment_discrepancy(sol.measure, bal, 5)
    dt = time.perf_counter() - t0
    print(
        f"criterion 03: disc(5) {disc[5]:.3e}, disc(20) {disc[20]:.3e} (tol 0.02), "
        f"ratio {disc[5] / disc[20]:.1f} (>= 3), {dt:.2f}s (budget 30s)"
    )
    assert disc[20] < 0.02
    assert disc[20] * 3.0 <= disc[5]
    assert dt < 30.0


def test_criterion_04_ellipse_convergence_study():
    # ellipse(2,1), z0 = 3, degrees 4..32 step 4: certified optima at every
    # degree, moment discrepancy at least halves from n=8 to n=32, and the
    # normalized objective climbs monotonically to its limit <= 1.
    t0 = time.perf_counter()
    rows = opm.convergence_study(
        geo.ellipse(2.0, 1.0), 3.0, list(range(4, 33, 4)), 660, gap_tol=1e-7
    )
    dt = time.perf_counter() - t0
    by_n = {r.n: r for r in rows}
    worst_gap = max(r.gap for r in rows)
    assert all(r.status == "converged" for r in rows)
    tail = [r.tilde_bergman for r in rows if r.n >= 12]
    drop = min(b - a for a, b in zip(tail, tail[1:]))
    print(
        f"criterion 04: worst gap {worst_gap:.3e} (tol 1e-6), "
        f"disc(8)/disc(32) {by_n[8].moment_discrepancy / by_n[32].moment_discrepancy:.3g} (>= 2), "
        f"tilde_B step min {drop:.3e} (>= -1e-6), final {rows[-1].tilde_bergman!r} (<= 1+1e-9), "
        f"{dt:.1f}s (budget 180s)"
    )
    assert worst_gap <= 1e-6
    assert by_n[32].moment_discrepancy * 2.0 <= by_n[8].moment_discrepancy
    assert drop >= -1e-6
    assert rows[-1].tilde_bergman <= 1.0 + 1e-9
    assert dt < 180.0


def test_criterion_05_segment_growth_limits():
    # [-1,1]: the extremal growth ratio M_n / |Phi(z0)|^n tends to 1/2 for
    # real z0 and to sqrt(a^2+1)/(a+sqrt(a^2+1)) on the imaginary axis, and
    # B_n at a real point matches the Chebyshev value T_n(z0)^2.
    g = geo.interval()
    grid = msr.discretize_boundary(g, 2000)
    observed = {}
    for z0, limit in ((2.0 + 0.0j, 0.5), (1.0j, math.sqrt(2.0) / (1.0 + math.sqrt(2.0)))):
        sol = opm.solve_opm(grid, z0, 30, gap_tol=1e-8)
        ratio = math.sqrt(sol.objective) / abs(geo.exterior_map(g, z0)) ** 30
        observed[z0] = (ratio, limit)
        assert abs(ratio - limit) <= 0.02
    worst_cheb = 0.0
    for n in range(2, 16):
        sol = opm.solve_opm(grid, 2.0, n, gap_tol=1e-8)
        target = float(np.cosh(n * np.arccosh(2.0))) ** 2
        worst_cheb = max(worst_cheb, abs(sol.objective - target) / target)
    pairs = ", ".join(f"z0={z}: {r:.6f} vs {lim:.6f}" for z, (r, lim) in observed.items())
    print(f"criterion 05: {pairs} (tol 0.02); Chebyshev rel err {worst_cheb:.3e} (tol 1e-3)")
    assert worst_cheb <= 1e-3


def test_criterion_06_density_optimality_sweep():
    # 200 random circle densities: none beats the Poisson density at w0 = 0.5,
    # whose own value is exactly 1.
    t0 = time.perf_counter()
    report = szego.verify_circle_optimality(0.5, 200, seed=0)
    dt = time.perf_counter() - t0
    print(
        f"criterion 06: max lambda {report.max_lambda:.6f} < poisson {report.poisson_lambda!r} "
        f"(= 1 +- 1e-8), {len(report.violations)} violations, {dt:.2f}s (budget 10s)"
    )
    assert report.violations == []
    assert abs(report.poisson_lambda - 1.0) <= 1e-8
    assert report.max_lambda < report.poisson_lambda
    assert dt < 10.0


def test_criterion_07_reflection_identity():
    # |z|^(2n) lambda_n(mu, z) = lambda_n(mu, 1/conj(z)) for measures on the
    # circle: 50 random measures, random degree <= 15, random z.
    worst = 0.0
    for i in range(50):
        rng = np.random.default_rng(4100 + i)
        nodes = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=80))
        w = rng.exponential(1.0, size=80)
        mu = msr.DiscreteMeasure(nodes, w / w.sum())
        n = int(rng.integers(1, 16))
        z = rng.uniform(0.3, 2.5) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        fac = brg.factorize(mu, n)
        lhs = abs(z) ** (2 * n) / brg.bergman_value(fac, z)
        rhs = 1.0 / brg.bergman_value(fac, 1.0 / np.conj(z))
        worst = max(worst, abs(lhs - rhs) / rhs)
    print(f"criterion 07: reflection identity rel err {worst:.3e} (tol 1e-8), 50 trials")
    assert worst <= 1e-8


def test_criterion_08_growth_transport():
    # Normalized growth on the curve equals lambda_inf of the transported
    # density at the reflected point: circle against the closed form 0.75,
    # ellipse lhs vs rhs within 5%.
    g = geo.unit_circle()
    mu = msr.uniform_measure(msr.discretize_boundary(g, 2048))
    lhs_c, rhs_c = szego.transport_check(g, mu, 2.0, 30)
    g2 = geo.ellipse(2.0, 1.0)
    t = 2.0 * np.pi * np.arange(2048) / 2048
    mu2 = msr.measure_from_boundary_density(g2, np.abs(geo.psi_prime(g2, np.exp(1j * t))))
    lhs_e, rhs_e = szego.transport_check(g2, mu2, 3.0, 40)
    rel_e = abs(lhs_e - rhs_e) / rhs_e
    print(
        f"criterion 08: circle lhs {lhs_c:.6f} rhs {rhs_c:.6f} vs 0.75 (tol 0.02); "
        f"ellipse rel diff {rel_e:.3e} (tol 0.05)"
    )
    assert abs(lhs_c - 0.75) <= 0.02
    assert abs(rhs_c - 0.75) <= 0.02
    assert rel_e <= 0.05


def test_criterion_09_tilde_monotonicity():
    # Circle: the normalized objective is monotone in the degree for every
    # measure (asserted).  Segment: the same comparison is recorded but not
    # asserted; a deterministic witness shows it genuinely failing there.
    g = geo.unit_circle()
    worst_circle = -np.inf
    for i in range(50):
        rng = np.random.default_rng(4200 + i)
        nodes = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=64))
        w = rng.exponential(1.0, size=64)
        mu = msr.DiscreteMeasure(nodes, w / w.sum())
        N = int(rng.integers(2, 21))
        z = rng.uniform(1.2, 3.0) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        worst_circle = max(worst_circle, brg.tilde_monotonicity_defect(g, mu, N, 1, z))

    seg = geo.interval()
    seg_defects = []
    for i in range(50):
        if i == 0:
            nodes = np.cos(np.pi * (2 * np.arange(32) + 1) / 64.0)
            mu = msr.uniform_measure(nodes)
            N, z = 2, 2.0 + 0.0j
        else:
            rng = np.random.default_rng(4300 + i)
            nodes = np.cos(rng.uniform(0.0, np.pi, size=32))
            w = rng.exponential(1.0, size=32)
            mu = msr.DiscreteMeasure(nodes, w / w.sum())
            N = int(rng.integers(2, 13))
            z = rng.uniform(1.5, 3.0) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        fac = brg.factorize(mu, N)
        growth = abs(geo.exterior_map(seg, z)) ** 2
        seg_defects.append(
            brg.bergman_value(fac, z, degree=N - 1) / brg.bergman_value(fac, z) * growth - 1.0
        )
    print(
        f"criterion 09: circle max defect {worst_circle:.3e} (tol 1e-10); "
        f"segment recorded, not asserted: witness {seg_defects[0]:+.3f}, "
        f"max {max(seg_defects):+.3f} over 50 measures"
    )
    assert worst_circle <= 1e-10
    assert all(np.isfinite(seg_defects))


def _weight_grid(k: int, steps: int) -> np.ndarray:
    """Integer compositions of `steps` into k parts, one row each."""
    count = math.comb(steps + k - 1, k - 1)
    cuts = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(steps + k - 1), k - 1)),
        dtype=np.int64,
        count=count * (k - 1),
    ).reshape(count, k - 1)
    padded = np.concatenate(
        [np.full((count, 1), -1), cuts, np.full((count, 1), steps + k - 1)], axis=1
    )
    return np.diff(padded, axis=1) - 1


def _oracle_degree_one(nodes: np.ndarray, z0: complex, counts: np.ndarray, steps: int) -> float:
    """Exhaustive min of B_1 over weight vectors with entries in multiples of 1/steps.

    Closed form for the 2x2 moment system: with a = sum(w), b = sum(w x),
    d = sum(w |x|^2), B_1 = (d - 2 Re(conj(b) z0) + a |z0|^2) / (a d - |b|^2).
    """
    best = np.inf
    absx2 = np.abs(nodes) ** 2
    for lo in range(0, len(counts), 1_000_000):
        W = counts[lo : lo + 1_000_000] / steps
        a = W.sum(axis=1)
        b = W @ nodes.real + 1j * (W @ nodes.imag)
        d = W @ absx2
        det = a * d - np.abs(b) ** 2
        num = d - 2.0 * (np.conj(b) * z0).real + a * abs(z0) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(det > 1e-15, num / det, np.inf)
        best = min(best, float(vals.min()))
    return best


def test_criterion_10_oracle_equivalence():
    # Degree 1 on 5-node grids: the solver matches an exhaustive simplex-grid
    # search at weight resolution 0.01 on 10 seeded instances.
    steps = 100
    counts = _weight_grid(5, steps)
    worst = 0.0
    for trial in range(10):
        rng = np.random.default_rng(1000 + trial)
        nodes = np.exp(2j * np.pi * np.sort(rng.uniform(0.0, 1.0, size=5)))
        z0 = (1.5 + rng.uniform(0.0, 1.5)) * np.exp(2j * np.pi * rng.uniform())
        oracle = _oracle_degree_one(nodes, z0, counts, steps)
        sol = opm.solve_opm(nodes, z0, 1, gap_tol=1e-9)
        worst = max(worst, abs(sol.objective - oracle) / oracle)
    print(
        f"criterion 10: worst rel gap to exhaustive search {worst:.3e} (tol 0.02), "
        f"10 instances x {len(counts)} grid points"
    )
    assert worst <= 0.02
