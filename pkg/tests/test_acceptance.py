"""Acceptance gate: every stock-scenario criterion at its stated tolerance.

Run with -s to see one PASS/FAIL line per criterion. The convergence
ensembles are heavy (minutes on a few cores); everything else is fast.
"""

from itertools import combinations, product

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from crnpc import (
    Feedback,
    Learner,
    Polyhedron,
    ScenarioConfig,
    analytic_center,
    bounding_box,
    center_of_gravity,
    chebyshev_center,
    d_max,
    hit_and_run,
    interference_thresholds,
    lp_solve,
    run_ensemble,
    run_indexed,
)
from crnpc.cli import main
from crnpc.control import capacity, exploit_waterfill
from crnpc.polytope import BoundingBox
from crnpc.pu_link import AcmProtocol
from crnpc.scenario import FadingConfig

N_TOPOLOGIES = 50          # criterion 2 and 4/5 ensemble size
N_TOPOLOGIES_DIM = 24      # criterion 3 ensemble size
STATIC_FLOPS = 110
DIM_FLOPS = 190
BOOTSTRAP = 4000
CONFIDENCE = 0.80


def report(criterion: int, passed: bool, detail: str):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"criterion {criterion}: {detail}"


def per_run_crossings(result) -> np.ndarray:
    """Debounced flops-to-1% of each run (NaN when a run never crossed)."""
    return np.array([np.nan if v is None else float(v)
                     for v in result.flops_to_1pct])


def bootstrap_confidence(cross_a, cross_b, rng) -> float:
    """Paired bootstrap over topologies: confidence that mean(A) < mean(B)."""
    n = cross_a.size
    idx = rng.integers(0, n, size=(BOOTSTRAP, n))
    return float(np.mean(cross_a[idx].mean(axis=1) < cross_b[idx].mean(axis=1)))


# ---------------------------------------------------------------------------
# Heavy shared ensembles


@pytest.fixture(scope="session")
def static_ensembles():
    cfg = ScenarioConfig(n_su=5, seed=20240811)
    out = {}
    for learner in (Learner.ACCPM, Learner.CGCPM):
        for feedback in (Feedback.BINARY, Feedback.MCC):
            res = run_ensemble(cfg, learner, feedback, N_TOPOLOGIES,
                               flops=STATIC_FLOPS)
            out[(learner, feedback)] = res
    return out


@pytest.fixture(scope="session")
def dimension_ensembles():
    out = {}
    for n_su, flops in ((5, STATIC_FLOPS), (10, DIM_FLOPS)):
        cfg = ScenarioConfig(n_su=n_su, seed=20240812)
        for learner in (Learner.ACCPM, Learner.CGCPM):
            out[(n_su, learner)] = run_ensemble(
                cfg, learner, Feedback.MCC, N_TOPOLOGIES_DIM, flops=flops)
    return out


@pytest.fixture(scope="session")
def fading_ensembles():
    cfg = ScenarioConfig(n_su=5, seed=20240813,
                         fading=FadingConfig(t_c=250, n_blocks=3))
    return {
        learner: run_ensemble(cfg, learner, Feedback.MCC, N_TOPOLOGIES)
        for learner in (Learner.ACCPM, Learner.CGCPM)
    }


# ---------------------------------------------------------------------------


def test_01_threshold_algebra():
    i_th = interference_thresholds(AcmProtocol.default(), -83.0, -103.0)
    value = float(i_th[4])
    ok = abs(value - (-96.97)) <= 0.1
    report(1, ok, f"I_th(16QAM 1/2) = {value:.4f} dBm vs -96.97 +/- 0.1")


def test_02_static_convergence_ordering(static_ensembles):
    crossings = {key: per_run_crossings(res) for key, res in static_ensembles.items()}
    labels = {key: f"{key[0].value}/{key[1].value}" for key in crossings}
    means = {key: float(np.mean(v)) for key, v in crossings.items()}
    in_band = all(np.isfinite(m) and 30.0 <= m <= 100.0 for m in means.values())

    rng = np.random.default_rng(7)
    pairs = [
        ((Learner.CGCPM, Feedback.MCC), (Learner.ACCPM, Feedback.MCC)),
        ((Learner.ACCPM, Feedback.MCC), (Learner.ACCPM, Feedback.BINARY)),
        ((Learner.CGCPM, Feedback.BINARY), (Learner.ACCPM, Feedback.BINARY)),
    ]
    confs = {
        (a, b): bootstrap_confidence(crossings[a], crossings[b], rng)
        for a, b in pairs
    }
    ordered = all(conf >= CONFIDENCE for conf in confs.values())
    detail = ", ".join(f"{labels[k]}={means[k]:.1f}" for k in crossings)
    detail += " | " + ", ".join(
        f"P({labels[a]}<{labels[b]})={conf:.2f}" for (a, b), conf in confs.items())
    report(2, in_band and ordered, detail)


def test_03_dimension_scaling_gain(dimension_ensembles):
    means = {
        key: float(np.mean(per_run_crossings(res)))
        for key, res in dimension_ensembles.items()
    }
    ok = all(np.isfinite(m) for m in means.values())
    if ok:
        gap5 = means[(5, Learner.ACCPM)] - means[(5, Learner.CGCPM)]
        gap10 = means[(10, Learner.ACCPM)] - means[(10, Learner.CGCPM)]
        ok = means[(10, Learner.CGCPM)] < means[(10, Learner.ACCPM)] and gap10 > gap5
        detail = (f"N=5: cgcpm {means[(5, Learner.CGCPM)]:.1f} vs accpm "
                  f"{means[(5, Learner.ACCPM)]:.1f} (gap {gap5:.1f}); "
                  f"N=10: cgcpm {means[(10, Learner.CGCPM)]:.1f} vs accpm "
                  f"{means[(10, Learner.ACCPM)]:.1f} (gap {gap10:.1f})")
    else:
        detail = f"some runs never crossed 1%: {means}"
    report(3, ok, detail)


def test_04_fading_reconvergence(fading_ensembles):
    t_c, t_w = 250, 50
    ok = True
    details = []
    for learner, res in fading_ensembles.items():
        mean = res.rel_error.mean(axis=0)
        for change in (t_c, 2 * t_c):
            block = mean[change:change + t_c]
            above = int(np.sum(block > 0.5))
            recovered = np.nonzero(block < 0.10)[0]
            rec_at = int(recovered[0]) + 1 if recovered.size else None
            details.append(f"{learner.value}@{change}: >50% for {above} flops, "
                           f"<10% at +{rec_at}")
            if above > t_w + 20 or rec_at is None:
                ok = False
    report(4, ok, "; ".join(details))


def test_05_fading_learner_comparison(fading_ensembles):
    acc = fading_ensembles[Learner.ACCPM]
    cg = fading_ensembles[Learner.CGCPM]
    i_acc = float(np.mean(acc.mean_i_pu_dbm))
    i_cg = float(np.mean(cg.mean_i_pu_dbm))
    c_acc = float(np.mean(acc.mean_capacity))
    c_cg = float(np.mean(cg.mean_capacity))
    ok = i_cg <= i_acc and c_cg >= c_acc
    report(5, ok, f"I_PU: cgcpm {i_cg:.2f} vs accpm {i_acc:.2f} dBm; "
                  f"capacity: cgcpm {c_cg:.3f} vs accpm {c_acc:.3f} bit/s/Hz")


def test_06_grunbaum_property():
    rng = np.random.default_rng(606)
    ok_count = 0
    trials = 100
    for _ in range(trials):
        anchor = rng.uniform(-0.5, 0.5, size=2)
        rows, rhs = [], []
        for _ in range(6):
            a = rng.standard_normal(2)
            a /= np.linalg.norm(a)
            rows.append(a)
            rhs.append(float(a @ anchor + rng.uniform(0.2, 1.5)))
        eye = np.eye(2)
        rows.extend([eye[0], eye[1], -eye[0], -eye[1]])
        rhs.extend([2.0, 2.0, 2.0, 2.0])
        poly = Polyhedron(np.array(rows), np.array(rhs))
        start, _ = chebyshev_center(poly)
        samples = hit_and_run(poly, 4000, 200, start, rng)
        cg = samples.mean(axis=0)
        direction = rng.standard_normal(2)
        direction /= np.linalg.norm(direction)
        kept = float(np.mean(samples @ direction <= float(direction @ cg)))
        if 0.3 <= kept <= 0.7:
            ok_count += 1
    report(6, ok_count >= 95, f"{ok_count}/100 central cuts kept 30-70% of volume")


def test_07_oracle_suites():
    rng = np.random.default_rng(707)
    failures = []

    # LP vs brute-force vertex enumeration, 2-D and 3-D
    def vertices(poly):
        out = []
        for rows in combinations(range(poly.n_halfspaces), poly.dimension):
            a, b = poly.a[list(rows)], poly.b[list(rows)]
            if abs(np.linalg.det(a)) < 1e-12:
                continue
            v = np.linalg.solve(a, b)
            if np.all(poly.a @ v <= poly.b + 1e-9):
                out.append(v)
        return np.asarray(out)

    for n in (2, 3):
        for _ in range(10):
            anchor = rng.uniform(-0.5, 0.5, size=n)
            rows = []
            rhs = []
            for _ in range(5):
                a = rng.standard_normal(n)
                a /= np.linalg.norm(a)
                rows.append(a)
                rhs.append(float(a @ anchor + rng.uniform(0.3, 1.2)))
            eye = np.eye(n)
            rows.extend(list(eye) + list(-eye))
            rhs.extend([2.0] * (2 * n))
            poly = Polyhedron(np.array(rows), np.array(rhs))
            c = rng.standard_normal(n)
            verts = vertices(poly)
            for sense, pick in (("max", np.max), ("min", np.min)):
                got, _ = lp_solve(c, sense, poly)
                want = float(pick(verts @ c))
                if abs(got - want) > 1e-7:
                    failures.append(f"LP {sense} off by {abs(got - want):.2e}")

    # analytic center vs 1-D numerical barrier minimization
    poly1 = Polyhedron(np.array([[-4.0], [2.0], [-1.0]]), np.array([-1.0, 1.0, 0.0]))
    oracle = minimize_scalar(
        lambda x: -np.log(4 * x - 1) - np.log(1 - 2 * x) - np.log(x),
        bounds=(0.25 + 1e-9, 0.5 - 1e-9), method="bounded",
        options={"xatol": 1e-12}).x
    ac = analytic_center(poly1)[0]
    if abs(ac - oracle) > 1e-3:
        failures.append(f"AC 1-D off by {abs(ac - oracle):.2e}")

    # waterfilling vs 200^2 grid search
    for _ in range(4):
        g = rng.uniform(0.2, 1.5, size=2)
        h = rng.uniform(0.5, 3.0, size=2)
        noise = rng.uniform(0.5, 2.0, size=2)
        p_max = rng.uniform(0.5, 3.0, size=2)
        p = exploit_waterfill(g, h, noise, p_max)
        got = capacity(p, h, noise)
        best = -np.inf
        for p1 in np.linspace(0.0, p_max[0], 200):
            residual = (1.0 - g[0] * p1) / g[1]
            for p2 in (min(max(residual, 0.0), p_max[1]), p_max[1]):
                if g[0] * p1 + g[1] * p2 <= 1.0 + 1e-9:
                    best = max(best, capacity([p1, p2], h, noise))
        if got < best - 1e-6:
            failures.append(f"waterfill {best - got:.2e} below grid best")

    # Hit-and-Run moments on the unit square, 3 sigma
    square = Polyhedron.from_box([0.0, 0.0], [1.0, 1.0])
    samples = hit_and_run(square, 20000, 200, [0.5, 0.5], rng)
    sigma = np.sqrt(1.0 / 12.0) / np.sqrt(20000 / 8.0)   # conservative n_eff
    if np.any(np.abs(samples.mean(axis=0) - 0.5) > 3 * sigma):
        failures.append(f"HR square means {samples.mean(axis=0)}")

    # O(N) d_max vs explicit 2^N enumeration
    for n in range(1, 11):
        lo = rng.uniform(-2.0, 0.0, size=n)
        hi = lo + rng.uniform(0.1, 3.0, size=n)
        center = rng.uniform(-2.5, 2.5, size=n)
        box = BoundingBox(lo=lo, hi=hi)
        brute = max(float(np.linalg.norm(center - np.asarray(v)))
                    for v in product(*zip(lo, hi)))
        if abs(d_max(center, box) - brute) > 1e-12 * max(1.0, brute):
            failures.append(f"d_max mismatch at N={n}")

    report(7, not failures, "all oracle suites agree" if not failures
           else "; ".join(failures))


def test_08_feedback_consistency_fuzz():
    # debug_validate raises on the first stored inequality the true gains
    # violate; zero violations expected across random configs.
    rng = np.random.default_rng(808)
    checked = 0
    failures = []
    configs = [
        dict(n_su=3, seed=101, sensing_p_correct=1.0),
        dict(n_su=5, seed=202, su_link_dist_m=(150.0, 700.0)),
        dict(n_su=4, seed=303, interference_margin=(3.0, 15.0)),
        dict(n_su=2, seed=404, pu_clear_sinr_db=17.0),
    ]
    for kw in configs:
        cfg = ScenarioConfig(**kw)
        learner = Learner.CGCPM if kw["seed"] == 404 else Learner.ACCPM
        feedback = Feedback.MCC if rng.uniform() < 0.7 else Feedback.BINARY
        try:
            run_indexed(cfg, learner, feedback, 1000, 0, debug_validate=True)
            checked += 1000
        except Exception as exc:   # noqa: BLE001 - any violation is a failure
            failures.append(f"{kw}: {exc}")
    report(8, not failures,
           f"{checked} flops fuzzed, zero violations" if not failures
           else "; ".join(failures))


def test_09_bisection_envelope():
    cfg = ScenarioConfig(n_su=1, seed=909, hr_samples=4000, hr_burn_in=200)
    worst = 0.0
    for index in range(3):
        tr = run_indexed(cfg, Learner.CGCPM, Feedback.BINARY, 20, index)
        ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(index,))
        topo_ss, _ = ss.spawn(2)
        from crnpc.scenario import generate_topology
        topo = generate_topology(cfg, np.random.default_rng(topo_ss))
        g_true = float(topo.g_normalized(cfg.i_th_ref_mw)[0])
        envelope = cfg.resolved_prior_g_ub() / g_true * 0.5 ** np.arange(1, 21)
        worst = max(worst, float(np.max(tr.rel_error / envelope)))
    report(9, worst <= 2.0,
           f"worst error/envelope ratio {worst:.3f} over 3 runs, 20 flops each")


def test_10_determinism(tmp_path):
    cfg_text = "n_su = 2\nseed = 4242\nhr_samples = 400\nhr_burn_in = 80\nflops = 6\n"
    cfg_file = tmp_path / "det.cfg"
    cfg_file.write_text(cfg_text)
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg_file), "--out", str(a_dir)]) == 0
    assert main(["run", "--config", str(cfg_file), "--out", str(b_dir)]) == 0
    same_run = (a_dir / "trace.csv").read_bytes() == (b_dir / "trace.csv").read_bytes()

    rep = ["replicate", "fig3", "--set", "n_topologies=3", "--set", "flops=5",
           "--set", "n_su=2", "--set", "hr_samples=300", "--set", "hr_burn_in=60"]
    c_dir, d_dir = tmp_path / "c", tmp_path / "d"
    assert main(rep + ["--out", str(c_dir), "--jobs", "1"]) == 0
    assert main(rep + ["--out", str(d_dir), "--jobs", "2"]) == 0
    same_ens = all(
        (c_dir / name).read_bytes() == (d_dir / name).read_bytes()
        for name in ("fig3_accpm_binary.csv", "fig3_accpm_mcc.csv",
                     "fig3_cgcpm_binary.csv", "fig3_cgcpm_mcc.csv"))
    report(10, same_run and same_ens,
           f"rerun identical: {same_run}; serial vs parallel ensemble identical: {same_ens}")
