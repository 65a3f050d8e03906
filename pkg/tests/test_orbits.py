"""Orbit catalog, sampling, stacking guesses, and file round trips."""

import numpy as np
import pytest

from tribody import dynamics as dyn
from tribody import orbits

SYS = dyn.earth_moon()


def test_catalog_contents():
    cat = orbits.catalog()
    assert [o.label for o in cat] == ["l2-southern-halo", "nrho"]
    halo, nrho = cat
    assert halo.period == 3.3325377871055926
    assert nrho.period == 1.8077163954358124
    assert halo.jacobi == 3.1141257613953099
    assert nrho.jacobi == 3.0032754028672501
    assert halo.state[0] == 1.1692032436399828
    assert nrho.state[2] == -2.1213093403317357e-1


def test_catalog_jacobi_consistent_with_dynamics():
    for orb in orbits.catalog():
        assert dyn.jacobi_constant(SYS, orb.state) == pytest.approx(
            orb.jacobi, abs=1e-12
        )


def test_by_label_unknown():
    with pytest.raises(KeyError):
        orbits.by_label("l1-northern-halo")


def test_sample_orbit_endpoints():
    orb = orbits.by_label("nrho")
    np.testing.assert_array_equal(orbits.sample_orbit(orb, 0.0), orb.state)
    full = orbits.sample_orbit(orb, 1.0)
    assert np.abs(full - orb.state).max() < 1e-9


def test_sample_orbit_composition():
    orb = orbits.by_label("l2-southern-halo")
    half = orbits.sample_orbit(orb, 0.5)
    # continue half a period from the midpoint state: back to the start
    from tribody.propagator import PropagatorOptions, propagate

    rest = propagate(
        lambda t, s: dyn.cr3bp_rhs(SYS, s),
        half,
        (0.0, 0.5 * orb.period),
        PropagatorOptions(rel_tol=1e-12, abs_tol=1e-12),
    )
    assert np.abs(rest.eval(0.5 * orb.period) - orb.state).max() < 1e-8


def test_orbit_file_round_trip(tmp_path):
    orb = orbits.by_label("l2-southern-halo")
    path = tmp_path / "halo.yaml"
    orbits.write_orbit_file(path, orb)
    back = orbits.read_orbit_file(path)
    # decimal strings preserved bit for bit
    assert back.raw == orb.raw
    np.testing.assert_array_equal(back.state, orb.state)
    assert back.period == orb.period and back.jacobi == orb.jacobi
    # second round trip is a fixed point
    path2 = tmp_path / "halo2.yaml"
    orbits.write_orbit_file(path2, back)
    assert path2.read_text() == path.read_text()


def test_orbit_file_missing_keys(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("label: foo\nx: 1.0\n")
    with pytest.raises(ValueError):
        orbits.read_orbit_file(path)


def test_stacking_guess_structure():
    halo = orbits.by_label("l2-southern-halo")
    nrho = orbits.by_label("nrho")
    guess = orbits.stacking_guess(halo, nrho, n_periods_each=1.0)

    # covers exactly one period of each orbit
    assert guess.nu_grid[0] == 0.0
    assert guess.nu_grid[-1] == pytest.approx(halo.period + nrho.period, rel=1e-12)

    # the initial-orbit side of the patch is the full-period sample
    patch = guess.discontinuity_location
    before = guess.state_grid[patch - 1]
    assert np.abs(before - orbits.sample_orbit(halo, 1.0)).max() < 1e-9
    # the terminal-orbit side starts one period before its defining state
    after = guess.state_grid[patch]
    assert np.abs(after - nrho.state).max() < 1e-9

    # ballistic on each side: Jacobi constant along the initial arc
    jvals = [dyn.jacobi_constant(SYS, s) for s in guess.state_grid[:patch]]
    assert np.abs(np.array(jvals) - 3.1141257613953099).max() < 1e-9
    jvals_f = [dyn.jacobi_constant(SYS, s) for s in guess.state_grid[patch:]]
    assert np.abs(np.array(jvals_f) - 3.0032754028672501).max() < 1e-9

    # throttle guesses respect bounds, directions are unit
    d1, d2 = guess.control_grid[:, 3], guess.control_grid[:, 4]
    assert ((0 <= d1) & (d1 <= 1)).all() and ((0 <= d2) & (d2 <= 1)).all()
    norms = np.linalg.norm(guess.control_grid[:, :3], axis=1)
    np.testing.assert_allclose(norms, 1.0, rtol=1e-9)


def test_stacking_guess_single_discontinuity():
    halo = orbits.by_label("l2-southern-halo")
    nrho = orbits.by_label("nrho")
    guess = orbits.stacking_guess(halo, nrho)
    jumps = np.linalg.norm(np.diff(guess.state_grid[:, :3], axis=0), axis=1)
    patch = guess.discontinuity_location
    # the only large position jump sits at the patch
    assert jumps[patch - 1] == jumps.max()
    others = np.delete(jumps, patch - 1)
    assert others.max() < 0.2 * jumps[patch - 1]


def test_stacking_guess_validates_revs():
    halo = orbits.by_label("l2-southern-halo")
    nrho = orbits.by_label("nrho")
    with pytest.raises(ValueError):
        orbits.stacking_guess(halo, nrho, n_periods_each=0.0)
