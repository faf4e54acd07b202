"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test reports one ``PASS``/``FAIL`` line; the lines are collected into
the pytest terminal summary.  Run directly with ``python3 tests/test_acceptance.py``
for just the lines.
"""
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor


from trirec.spectral import predicted_bound_count
from trirec.verify import (
    BOUND_SETS,
    H_ENVELOPE_POINTS,
    SUITES,
    gram_configs,
    zeros_configs,
)


def timed(name):
    t0 = time.perf_counter()
    res = SUITES[name]()
    return res, time.perf_counter() - t0


def verdict(report, number, ok, text):
    report(f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}")
    assert ok, text


def test_criterion_1_jacobi_reduction(report):
    res, dt = timed("jacobi-reduction")
    cases = sum(1 for line in res.lines[:-1] if line.startswith(("PASS", "FAIL")))
    ok = res.passed and res.worst <= 1e-12 and cases >= 27 and dt < 5
    verdict(report, 1, ok, f"jacobi reduction cases={cases} max_rel_dev={res.worst:.3e} "
            f"(tol 1e-12) time={dt:.2f}s (limit 5s)")


def test_criterion_2_degree(report):
    res, dt = timed("degree")
    cases = len(res.lines) - 1
    ok = res.passed and res.worst <= 1e-9 and dt < 5
    verdict(report, 2, ok, f"degree property cases={cases} max_rel_err={res.worst:.3e} "
            f"(tol 1e-9) time={dt:.2f}s (limit 5s)")


def test_criterion_3_zeros(report):
    families = {label.split()[0] for label, _ in zeros_configs()}
    res, dt = timed("zeros-oracle")
    ok = res.passed and res.worst <= 1e-10 and {"H", "Q", "g", "G"} <= families and dt < 30
    verdict(report, 3, ok, f"zeros vs bisection families={sorted(families)} max_dev={res.worst:.3e} "
            f"(tol 1e-10) time={dt:.2f}s (limit 30s)")


def test_criterion_4_orthogonality(report):
    n_cfg = len(gram_configs())
    res, dt = timed("orthogonality")
    ok = res.passed and res.worst <= 1e-10 and n_cfg >= 20 and dt < 60
    verdict(report, 4, ok, f"gram off-diagonal configs={n_cfg} N=200 max={res.worst:.3e} "
            f"(tol 1e-10) time={dt:.2f}s (limit 60s)")


def test_criterion_5_bound_count(report):
    floors = sorted({predicted_bound_count(a * a, mu, nu) for mu, nu, a, _ in BOUND_SETS})
    res, dt = timed("bound-count")
    ok = res.passed and len(BOUND_SETS) >= 10 and floors == list(range(7)) and dt < 180
    verdict(report, 5, ok, f"bound count sets={len(BOUND_SETS)} x {{g, G}} floors={floors} "
            f"{res.lines[-1].split(' ', 1)[1]} time={dt:.1f}s (limit 180s)")


def test_criterion_6_asymptotics(report):
    res, dt = timed("asymptotics")
    fits = [line for line in res.lines if line.startswith(("PASS H", "FAIL H"))]
    good = sum(line.startswith("PASS") for line in fits)
    ok = res.passed and len(H_ENVELOPE_POINTS) >= 5 and dt < 30
    verdict(report, 6, ok, f"H envelope fits within rel rms 0.05: {good}/{len(fits)} "
            f"time={dt:.2f}s (limit 30s)")


def test_criterion_7_bound_states(report):
    res, dt = timed("bound-states")
    ok = res.passed and res.worst <= 1e-6 and dt < 120
    verdict(report, 7, ok, f"{res.lines[-1].split(' ', 1)[1]} time={dt:.1f}s (limit 120s)")


def test_criterion_8_deformation(report):
    res, dt = timed("deformation")
    ok = res.passed and res.worst <= 1e-14 and dt < 1
    verdict(report, 8, ok, f"lambda=0 bit-identical and deformed jacobi max_rel={res.worst:.3e} "
            f"(tol 1e-14) time={dt:.3f}s (limit 1s)")


def _cli_verify_all():
    r = subprocess.run([sys.executable, "-m", "trirec", "verify", "all"], capture_output=True,
                       timeout=1200)
    return r.stdout, r.stderr


def test_criterion_9_determinism(report):
    with ThreadPoolExecutor(2) as pool:
        a, b = list(pool.map(lambda _: _cli_verify_all(), range(2)))
    names = [line[2:] for line in a[0].decode().splitlines() if line.startswith("# ")]
    ok = a == b and sorted(names) == sorted(SUITES) and len(a[0]) > 0
    verdict(report, 9, ok, f"two CLI runs of verify over {len(names)} suites byte-identical={a == b}")


if __name__ == "__main__":
    lines = []
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion")):
        try:
            fn(lines.append)
        except AssertionError:
            pass
    print("\n".join(lines))
    sys.exit(0 if all(line.startswith("PASS") for line in lines) else 1)
