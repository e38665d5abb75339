import numpy as np
import pytest

from tfv import ad, catalog, spaces, theorems
from tfv.errors import ConfigError, CriticalPointError, PreconditionError


def test_curvature_identity_hyperbolic():
    for id in ("hyp_torqued", "uhs_en"):
        e = catalog.entry(id)
        rep = theorems.curvature_identity_check(e.space, e.field, e.sample(100, 42))
        assert rep.passed and rep.max_residual < 1e-7
        assert rep.note == theorems.GLOBAL_NOTE


def test_curvature_identity_negative_control():
    e = catalog.entry("euclid_position")
    with pytest.raises(PreconditionError):
        theorems.curvature_identity_check(e.space, e.field, e.sample(10, 0))
    rep = theorems.curvature_identity_check(e.space, e.field, e.sample(30, 0), expect_negative=True)
    assert rep.passed is False and rep.expected_negative
    assert rep.as_check()["expected_negative"] is True
    assert len(rep.witnesses) == 3


def test_torqued_obstruction():
    e = catalog.entry("hyp_torqued")
    out = theorems.torqued_obstruction_check(e.space, e, e.sample(100, 42))
    assert out["gradient"].passed and out["gradient"].max_residual < 1e-6
    assert out["closed"].passed and out["closed"].max_residual < 1e-9
    assert out["formula_agreement"] < 1e-7


def test_twisted_obstruction_is_report_only():
    e = catalog.entry("twisted_torqued")
    out = theorems.torqued_obstruction_check(e.space, e, e.sample(30, 1))
    assert out["gradient"].passed is None and out["closed"].passed is None
    assert "report only" in out["gradient"].note


def test_obstruction_requires_the_class():
    e = catalog.entry("uhs_en")
    with pytest.raises(PreconditionError):
        theorems.torqued_obstruction_check(e.space, e, e.sample(10, 0))


@pytest.mark.parametrize("id", ["uhs_en", "hyp_antitorqued"])
def test_antitorqued_obstruction(id):
    e = catalog.entry(id)
    out = theorems.antitorqued_obstruction_check(e.space, e, e.sample(100, 42))
    assert out["gradient"].passed and out["closed"].passed
    assert out["gradient"].max_residual < 1e-10 and out["closed"].max_residual < 1e-10


def test_closedness_of_nu_for_uhs_en():
    # nu = flat(V) = -(1/x_3) dx_3 = -d log x_3
    sp = spaces.uhs(3)
    nu = lambda x: ad.asarray([0.0, 0.0, -1.0 / x[2]])
    assert theorems.closedness_residual(sp, nu, [0.4, -0.2, 2.5]) == 0.0


def test_flow_euclidean_straight_line():
    sp = spaces.euclidean(3)
    tr = theorems.gradient_flow_check(sp, catalog.scalar("x1", sp), [0.0, 0.0, 0.0], t_max=2.0, step=1e-2)
    assert tr.linearity_error < 1e-12
    assert np.allclose(tr.points[-1], [2.0, 0.0, 0.0])


def test_flow_uhs_closed_form():
    # T = grad x_3 / |grad x_3|^2 = d_3, so x_3(t) = 1 + t
    sp = spaces.uhs(3)
    tr = theorems.gradient_flow_check(sp, catalog.scalar("x3", sp), [0.0, 0.0, 1.0], t_max=1.0, step=1e-2)
    assert tr.linearity_error < 1e-8
    assert np.allclose(tr.points[:, 2], 1.0 + tr.times, atol=1e-12)


def test_flow_hyperboloid_and_fourth_order():
    sp = spaces.hyperboloid(3)
    f = catalog.scalar("f_torqued", sp)
    tr = theorems.gradient_flow_check(sp, f, [1.0, 1.0, 1.0], 0.5, 1e-3)
    assert tr.linearity_error < 1e-6 and not tr.truncated
    errs = [theorems.gradient_flow_check(sp, f, [1.0, 1.0, 1.0], 0.5, h).linearity_error for h in (0.1, 0.05)]
    assert 8 <= errs[0] / errs[1] <= 32


def test_flow_truncates_at_chart_boundary():
    sp = spaces.uhs(2)
    f = lambda x: -x[1]  # flows toward x_2 = 0
    tr = theorems.gradient_flow_check(sp, f, [0.0, 0.5], t_max=5.0, step=0.01)
    assert tr.truncated and tr.times[-1] < 5.0
    assert np.all(tr.points[:, 1] > 0)


def test_flow_critical_point():
    sp = spaces.euclidean(2)
    with pytest.raises(CriticalPointError):
        theorems.gradient_flow_check(sp, lambda x: x[0] * x[0], [0.0, 1.0], 0.1, 0.01)


def test_flow_csv_format():
    sp = spaces.euclidean(2)
    tr = theorems.gradient_flow_check(sp, lambda x: x[0], [0.0, 0.0], 0.02, 0.01)
    lines = tr.csv().splitlines()
    assert lines[0] == "t,x1,x2,f"
    assert len(lines) == 4
    assert [float(v) for v in lines[-1].split(",")] == pytest.approx([0.02, 0.02, 0.0, 0.02])


def test_scalar_config_error_in_flow():
    with pytest.raises(ConfigError):
        catalog.scalar("x5", spaces.uhs(3))
