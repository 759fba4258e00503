"""Check harness plumbing plus a few cheap real check runs.

The full battery at publication-grade sample counts lives in
test_acceptance.py; here the contexts are trimmed for speed.
"""

import json

import pytest

from pinlab.disorder_mc import McConfig
from pinlab.model import build_law, gaussian_disorder, zero_disorder
from pinlab.theorems import (
    CHECK_DESCRIPTIONS,
    CHECK_IDS,
    CheckContext,
    default_context,
    full_report,
    run_check,
)

LAW = build_law(1.0, None, 256)


def _small_ctx(disorder=None, **kw):
    cfg = McConfig(LAW, disorder or gaussian_disorder(1.0), (2.0, 3.0),
                   (32, 64, 128), samples=24, master_seed=9, window=32)
    base = dict(mc=cfg, h=3.0, h_grid=(2.0, 2.5, 3.0), fit_range=(4, 24),
                clt_n_values=(32, 64), clt_seeds=2,
                excursion_n_values=(32, 64, 128), hl_seeds=2, hl_n_max=128,
                oracle_instances=20, exact_samples=2, centering_samples=100)
    base.update(kw)
    return CheckContext(**base)


def test_check_registry():
    assert CHECK_IDS == tuple(f"C{i}" for i in range(1, 14))
    assert set(CHECK_DESCRIPTIONS) == set(CHECK_IDS)


def test_unknown_check_rejected():
    with pytest.raises(ValueError):
        run_check("C99", _small_ctx())


def test_default_context_shape():
    ctx = default_context()
    assert not ctx.is_pure
    assert ctx.h == 3.0
    assert max(ctx.excursion_n_values) <= ctx.mc.law.n_max


def test_report_is_json_ready():
    rep = run_check("C9", _small_ctx())
    d = rep.to_dict()
    text = json.dumps(d)  # must not raise on numpy payloads
    back = json.loads(text)
    assert back["check_id"] == "C9"
    assert back["passed"] is True
    assert back["metrics"]["violations"] == 0


def test_exact_structural_checks_pass():
    ctx = _small_ctx()
    for cid in ("C9", "C10"):
        rep = run_check(cid, ctx)
        assert rep.passed is True, (cid, rep.metrics)


def test_pure_centering_checks_skip():
    ctx = _small_ctx(disorder=zero_disorder())
    c4 = run_check("C4", ctx)
    assert c4.passed is None
    assert "pure" in c4.skip_reason
    c12 = run_check("C12", ctx)
    assert c12.passed is None


def test_checks_are_deterministic():
    ctx = _small_ctx()
    a = run_check("C8", ctx)
    b = run_check("C8", ctx)
    assert a.metrics == b.metrics
    assert a.passed == b.passed


def test_full_report_subset_order_and_payload():
    ctx = _small_ctx()
    reps = full_report(ctx, checks=("C10", "C9"))
    # selection is a set; execution always follows catalog order
    assert [r.check_id for r in reps] == ["C9", "C10"]
    with pytest.raises(ValueError):
        full_report(ctx, checks=("C9", "C99"))
    for r in reps:
        assert r.description == CHECK_DESCRIPTIONS[r.check_id]
        assert isinstance(r.parameters, dict) and isinstance(r.metrics, dict)


def test_excursion_grid_guard():
    ctx = _small_ctx(excursion_n_values=(128, 256, 512))  # law caps at 256
    with pytest.raises(ValueError):
        run_check("C6", ctx)
