import math
from pathlib import Path

import pytest

import jjlab

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def test_maps_and_kernel():
    k = jjlab.esjj_to_integro(1.2, 0.8, 1.0)
    assert k.params.positive()
    assert abs(k.params.beta * 0.8 - 1.0) < 1e-15
    p = k.params
    assert abs(jjlab.eval_K(0.3, 0.5, p)) <= jjlab.K_bound(0.3, 0.5, p) + 1e-8


def test_psge_regime_is_refused():
    p = jjlab.psge_to_integro(1.0, 0.1).params
    with pytest.raises(jjlab.RegimeError):
        jjlab.eval_K(0.1, 0.1, p)


def test_profile_endpoints():
    assert jjlab.asymptotic_profile(1.0, 0.0, 1.0, 1.0, 0.0) == pytest.approx(1.0)
    assert jjlab.asymptotic_profile(1.0, 0.0, 1.0, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_green_is_finite():
    g = jjlab.eval_G(0.3, 0.5, 1.0, "ESJJ", 1.0, 1.0, 0.1, 0.5)
    assert math.isfinite(g)


def test_benchmark_solvers_agree():
    runs = jjlab.solve((FIXTURES / "benchmark_esjj.cfg").read_text())
    assert set(runs) == {"fd", "green", "picard"}
    for a, b in zip(runs["fd"]["u"], runs["green"]["u"]):
        assert max(abs(x - y) for x, y in zip(a, b)) < 1e-3


def test_config_errors_name_the_line():
    with pytest.raises(jjlab.ConfigError, match="line 4"):
        jjlab.normalize_config((FIXTURES / "bad_unknown_key.cfg").read_text())


def test_run_writes_artifacts(tmp_path):
    paths = jjlab.run((FIXTURES / "kink_sge.cfg").read_text(), tmp_path)
    assert {Path(p).name for p in paths} >= {"solution.csv", "diagnostics.csv"}
    assert all(Path(p).exists() for p in paths)


def test_divergence_maps_to_runtime_error(tmp_path):
    with pytest.raises(RuntimeError):
        jjlab.run((FIXTURES / "diverging_picard.cfg").read_text(), tmp_path)
    assert not any(tmp_path.iterdir())
