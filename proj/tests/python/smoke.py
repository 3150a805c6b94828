"""End-to-end exercise of the python bindings against known closed forms."""

import math
import tempfile

import thermoscheme as ts


def main():
    s = ts.build_preset("doubling-plain")
    assert s.alphabet == 30
    assert s.max_tau == 30
    assert 1 <= s.tau_of(0) <= s.max_tau
    lo, hi = s.element_interval(0)
    assert 0.0 <= lo < hi <= 1.0

    rep = ts.verify_scheme(s)
    assert rep["h1_pass"] and rep["h2_pass"]
    assert abs(rep["lambda1"] - 2.0) < 1e-6
    assert rep["distortion_max"] == 0.0

    root = ts.pressure_root(s)
    assert abs(root["value"]) < 1e-6

    eq = ts.equilibrium(s)
    assert abs(eq.Q - 2.0) < 1e-6
    ak = ts.abramov_kac(eq, s)
    assert ak["entropy_available"]
    assert abs(ak["h_f"] - math.log(2.0)) < 1e-12
    assert ak["kac_residual"] < 1e-9

    lam = ts.lyapunov(s, eq, orbit_len=200, n_orbits=20, seed=7)
    assert abs(lam["value"] - math.log(2.0)) < 1e-9
    assert lam["bracket_pass"]

    refined = ts.build_preset("doubling-refined")
    lift = ts.liftability(refined)
    assert lift["verdict"] == "not-liftable"

    try:
        ts.equilibrium(refined, tag="constant", c=-2.0)
    except ts.SchemeError as e:
        assert "(P3)" in str(e)
    else:
        raise AssertionError("equilibrium accepted a potential it should refuse")

    t0, t1, degenerate = ts.t_bounds(2.0, 8.0, 1.0)
    assert (t0, t1, degenerate) == (-0.5, 1.5, False)

    assert abs(ts.alpha(2.0) - 0.5) < 1e-12
    assert ts.critical_entry_time(1.999) >= 2

    with tempfile.TemporaryDirectory() as tmp:
        code, out, err = ts.run_cli(
            ["thermo", "liftability", "--preset", "doubling-refined", "--out", tmp]
        )
        assert code == 0, err
        assert "not-liftable" in out
        code, out, err = ts.run_cli(
            ["thermo", "equilibrium", "--preset", "doubling-refined",
             "--potential", "constant", "--c", "-2", "--out", tmp]
        )
        assert code == 3
        assert "(P3)" in err

    print("python smoke: ok")


if __name__ == "__main__":
    main()
