import numpy as np
import pytest

from recsizer import bess
from recsizer.core import BESSSpec, DomainError

SPEC = BESSSpec()


def test_soc_step_values():
    assert bess.soc_step(2.0, 1.0, 0.0, 1.0, SPEC) == pytest.approx(2.9)
    assert bess.soc_step(2.9, 0.0, 0.9, 1.0, SPEC) == pytest.approx(1.9)
    assert bess.soc_step(3.3, 0.0, 0.0, 1.0, SPEC) == 3.3


def test_soc_step_negative_power():
    with pytest.raises(DomainError):
        bess.soc_step(1.0, -0.1, 0.0, 1.0, SPEC)


def test_soc_step_inverse():
    s = bess.soc_step(2.0, 0.7, 0.2, 0.5, SPEC)
    assert bess.soc_step_inverse(s, 0.7, 0.2, 0.5, SPEC) == pytest.approx(2.0, abs=1e-15)


def test_fleet_bounds():
    assert bess.fleet_bounds(0, SPEC) == bess.BESSFleetBounds(0, 0, 0, 0)
    assert bess.fleet_bounds(1, SPEC) == bess.BESSFleetBounds(0.5, 4.5, 1.25, 1.25)
    assert bess.fleet_bounds(16, SPEC) == bess.BESSFleetBounds(8.0, 72.0, 20.0, 20.0)
    with pytest.raises(bess.CapacityExceeded):
        bess.fleet_bounds(SPEC.max_units + 1, SPEC)


def test_bess_costs():
    assert bess.bess_costs(0, SPEC) == bess.BESSFleetCosts(0.0, 0.0, 12)
    c = bess.bess_costs(1, SPEC)
    assert (c.capex_eur, c.omca_eur_per_year, c.replacement_year) == (1250.0, 125.0, 12)
    assert bess.bess_costs(6, SPEC).capex_eur == 7500.0


def _consistent(n=6):
    pc = np.array([1.0, 0.5, 0.0, 0.0, 0.0, 0.0])[:n]
    pd = np.array([0.0, 0.0, 0.3, 0.5, 0.0, 0.0])[:n]
    net = (SPEC.eta_c * pc - pd / SPEC.eta_d)
    # close the day: compensate with a final discharge
    pd[-1] = net.sum() * SPEC.eta_d
    net = SPEC.eta_c * pc - pd / SPEC.eta_d
    soc = 2.0 + np.cumsum(net)
    return soc, pc, pd


def test_validate_ok_and_zero():
    z = np.zeros(5)
    assert bess.validate_dispatch(z, z, z, 0, SPEC) == []
    soc, pc, pd = _consistent()
    assert bess.validate_dispatch(soc, pc, pd, 1, SPEC) == []


def test_validate_flags_simultaneity():
    soc, pc, pd = _consistent()
    pc2, pd2 = pc.copy(), pd.copy()
    pc2[4] = pd2[4] = 1.0
    bad = bess.validate_dispatch(soc, pc2, pd2, 1, SPEC)
    assert any(v.constraint == "simultaneity" and v.step == 4 for v in bad)


def test_validate_flags_recursion_drift():
    soc, pc, pd = _consistent()
    soc = soc.copy()
    soc[2] += 1e-3
    bad = bess.validate_dispatch(soc, pc, pd, 1, SPEC, tol=1e-6)
    assert {v.constraint for v in bad} == {"soc_recursion"}
    assert max(v.residual for v in bad) == pytest.approx(1e-3)


def test_validate_flags_bounds():
    z = np.zeros(3)
    bad = bess.validate_dispatch(np.full(3, 9.0), z, z, 1, SPEC)
    assert {v.constraint for v in bad} == {"soc_max"}
    bad = bess.validate_dispatch(np.full(3, 2.0), np.full(3, 2.0), z, 1, SPEC)
    assert "charge_max" in {v.constraint for v in bad}
