import math
import pathlib

import pytest

import lcms

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_expressions():
    e = lcms.parse("u^2/(2*t)")
    assert not e.is_zero()
    assert e.eval({"u": 2.0, "t": 1.0}) == pytest.approx(2.0)
    assert (e.diff("u") - lcms.parse("u/t")).is_zero()
    with pytest.raises(lcms.ParseError):
        lcms.parse("1 +")


def test_conformal_mechanics():
    f = lcms.ChartFamily.default(1, 1)
    h = lcms.Hamiltonian(f, "1/2*p_t_u^2")
    theta = lcms.LeeForm(f, ["1/2"])
    traj = lcms.integrate_mechanics(h, theta, [0.0], [1.0], 0.0, 1.0, 1e-3)
    assert len(traj["t"]) == 1001
    assert traj["p"][0][-1] == pytest.approx(math.exp(0.5), abs=1e-8)
    sigma, p = lcms.mechanics_closed_form(0.5, 0.0, 1.0, 1.0)
    assert traj["sigma"][0][-1] == pytest.approx(sigma, abs=1e-8)
    assert lcms.connection_residual_is_zero(h, theta)


def test_scalar_field_and_hj():
    plane = lcms.ChartFamily(["x", "y"], ["u"])
    h = lcms.Hamiltonian(plane)
    theta = lcms.LeeForm(plane, ["3/2", "0"])
    r = lcms.lchdw_residual(plane, h, theta, ["exp(3/2*x)"], [["3/2*exp(3/2*x)"], ["0"]])
    assert set(r.values()) == {"0"}

    f = lcms.ChartFamily.default(1, 1)
    hm = lcms.Hamiltonian(f, "1/2*p_t_u^2")
    th = lcms.LeeForm(f, ["1/2"])
    assert lcms.hj_residual(f, hm, th, [["exp(1/2*t)"]]) == {"r[u]": "0"}
    good = lcms.roundtrip_verify(f, hm, th, [["exp(1/2*t)"]], [[0.0], [1.0]])
    assert good["hj_holds"] and good["roundtrip_holds"] and good["consistent"]
    bad = lcms.roundtrip_verify(f, hm, th, [["exp(1/2*t) + 1/10*u"]], [[0.0], [1.0]])
    assert not bad["hj_holds"] and not bad["roundtrip_holds"] and bad["consistent"]


def test_lee_form_must_be_closed():
    plane = lcms.ChartFamily(["x", "y"], ["u"])
    with pytest.raises(lcms.ValidationError):
        lcms.LeeForm(plane, ["y", "0"])


def test_identity_suite():
    results = lcms.run_identity_suite(seed=3, cases=5)
    assert results and all(r["pass"] for r in results)


def test_scenarios(tmp_path):
    report = lcms.run_scenario(CONFIGS / "mechanics_conformal.ini", out=tmp_path)
    assert report["pass"] and report["exit_code"] == 0
    assert (tmp_path / "trajectory.csv").exists()
    assert lcms.run_scenario(CONFIGS / "hj_perturbed.ini")["exit_code"] == 1
    assert lcms.run_scenario(CONFIGS / "bad_expression.ini")["exit_code"] == 2
    text = "[scenario]\nkind = identity-suite\n[identity]\ncases = 2\n"
    assert lcms.run_scenario_text(text, seed=5)["pass"]
