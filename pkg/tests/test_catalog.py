import numpy as np
import pytest

from conftest import run_entry
from lagtherm import catalog
from lagtherm.diagnostics import audit
from lagtherm.errors import ParseError

NAMES = catalog.names()


def test_catalog_entries():
    assert len(NAMES) == 12 and len(set(NAMES)) == 12
    assert catalog.names("rlc") == ["rlc_series", "rlc_network"]
    assert catalog.names("piston") == ["chem_piston", "two_piston"]


@pytest.mark.parametrize("name", NAMES)
def test_entry_builds_admissible_state(name):
    built = catalog.build(name)
    built.system.check(built.y0)
    y = np.asarray(built.y0, dtype=float)
    assert len(built.system.labels) == y.size
    d = built.system.diagnostics(0.0, y)
    assert {"E", "P_W_ext", "P_H_ext", "I_internal", "S_total"} <= set(d)
    assert all(np.isfinite(v) for v in d.values())
    assert np.all(np.isfinite(built.system.rhs(0.0, y)))


@pytest.mark.parametrize("name", NAMES)
def test_isolated_variant_has_no_exterior_power(name):
    built = catalog.build(name, {"isolated": True})
    d = built.system.diagnostics(0.0, np.asarray(built.y0, dtype=float))
    assert d["P_W_ext"] == 0.0 and d["P_H_ext"] == 0.0


def test_unknown_keys_raise():
    with pytest.raises(ParseError, match="unknown"):
        catalog.build("one_cylinder", {"mass_kg": 1.0})
    with pytest.raises(ParseError, match="unknown"):
        catalog.build("one_cylinder", None, {"y": 1.0})
    with pytest.raises(ParseError):
        catalog.get("four_cylinder")


def test_wrong_types_raise():
    with pytest.raises(ParseError):
        catalog.build("one_cylinder", {"isolated": "yes"})
    with pytest.raises(ParseError):
        catalog.build("rlc_network", {"kappa": [0.1, 0.2]})


def test_listing_schema():
    rows = catalog.listing()
    assert [r["name"] for r in rows] == NAMES
    for r in rows:
        assert {"name", "kind", "summary", "reproduces", "params", "initial", "integrator"} <= set(r)
        assert r["kind"] in ("ode", "continuum")
        for schema in list(r["params"].values()) + list(r["initial"].values()):
            assert {"default", "type"} <= set(schema)


def test_gradient_targets_have_samplers():
    targets = catalog.gradient_targets()
    assert len(targets) >= 7
    assert all(callable(getattr(t, "sampler", None)) for t in targets.values())


def test_reversible_flag_switches_off_dissipation():
    from lagtherm.diagnostics import reversibility_check

    for name in ("one_cylinder", "mass_spring", "rlc_series", "two_piston"):
        assert reversibility_check(catalog.build(name, {"reversible": True}).model)
        assert not reversibility_check(catalog.build(name).model)


@pytest.mark.parametrize("name", NAMES)
def test_default_run_passes_audits(name):
    hold = 1.0 if name == "two_piston" else None
    _, tr = run_entry(name, stop_hold=hold)
    rep = audit(tr, ("energy", "second_law", "mass"))
    assert rep.passed, rep.failures
