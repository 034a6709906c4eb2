import random

from stabsim import generate
from stabsim.protocol import SsmeProtocol
from stabsim.verify import (
    bounds_checks,
    clock_checks,
    closure_checks,
    graph_checks,
    guard_checks,
    indistinguishability_checks,
    sample_initial_config,
    scheduler_ensemble_check,
    transient_checks,
)


def _assert_all_pass(results):
    for res in results:
        assert res.ok, str(res)


def test_clock_suite():
    _assert_all_pass(clock_checks())


def test_guard_suite():
    _assert_all_pass(guard_checks())


def test_graph_suite():
    graphs = [generate(s) for s in ("ring:5", "path:4", "grid:2x3", "complete:4")]
    _assert_all_pass(graph_checks(graphs))


def test_closure_suite_exhaustive_path2():
    _assert_all_pass(closure_checks(generate("path:2"), exhaustive=True))


def test_closure_suite_sampled_ring5():
    _assert_all_pass(closure_checks(generate("ring:5"), samples=300, seed=2))


def test_transient_suite_small():
    for spec in ("ring:4", "path:5"):
        _assert_all_pass(transient_checks(generate(spec), samples=800, seed=1))


def test_indistinguishability_suite_small():
    _assert_all_pass(
        indistinguishability_checks(generate("ring:6"), pairs=150, seed=4)
    )


def test_bounds_suite_path2_exhaustive():
    _assert_all_pass(bounds_checks(generate("path:2"), exhaustive=True))


def test_scheduler_ensemble_small():
    res = scheduler_ensemble_check(
        generate("path:3"), inits=60, seeds=(0, 1), seed=5
    )
    assert res.ok, str(res)


def test_initial_sampler_stays_in_domain():
    g = generate("ring:6")
    p = SsmeProtocol.for_graph(g)
    rng = random.Random(0)
    planted = 0
    for _ in range(500):
        cfg = sample_initial_config(p, rng)
        assert all(-p.alpha <= c < p.ring for c in cfg)
        if any(cfg[v] == p.thresholds[v] for v in range(g.n)):
            planted += 1
    assert planted > 30  # threshold planting keeps early-privilege cases common
