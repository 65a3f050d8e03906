"""Forward-mode dual arithmetic against central finite differences."""

import numpy as np
import pytest

from tribody import ad


def _fd_grad(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def _dual_inputs(x):
    return [ad.seed(xi, i, len(x)) for i, xi in enumerate(x)]


@pytest.mark.parametrize("trial", range(8))
def test_scalar_composition_matches_fd(trial):
    rng = np.random.default_rng(100 + trial)
    x = rng.uniform(0.3, 1.7, size=4)

    def f(v):
        a, b, c, d = v
        return (
            np.sin(a * b) / (c + d**2)
            + np.sqrt(a + 2.0) * np.cos(d)
            - b / a
            + np.arctan2(b, c) * d
        )

    a, b, c, d = _dual_inputs(x)
    out = (
        ad.sin(a * b) / (c + d**2)
        + ad.sqrt(a + 2.0) * ad.cos(d)
        - b / a
        + ad.arctan2(b, c) * d
    )
    assert out.val == pytest.approx(f(x), rel=1e-14)
    np.testing.assert_allclose(out.der, _fd_grad(f, x), rtol=1e-7, atol=1e-9)


def test_vectorized_lanes():
    # one lane per input, n points at once
    rng = np.random.default_rng(7)
    xs = rng.uniform(0.5, 2.0, size=(50, 2))
    a = ad.Dual(xs[:, 0], np.tile([1.0, 0.0], (50, 1)))
    b = ad.Dual(xs[:, 1], np.tile([0.0, 1.0], (50, 1)))
    out = a * b + ad.sin(a) / b
    expect_val = xs[:, 0] * xs[:, 1] + np.sin(xs[:, 0]) / xs[:, 1]
    np.testing.assert_allclose(out.val, expect_val, rtol=1e-14)
    d_da = xs[:, 1] + np.cos(xs[:, 0]) / xs[:, 1]
    d_db = xs[:, 0] - np.sin(xs[:, 0]) / xs[:, 1] ** 2
    np.testing.assert_allclose(out.der[:, 0], d_da, rtol=1e-12)
    np.testing.assert_allclose(out.der[:, 1], d_db, rtol=1e-12)


def test_constants_broadcast():
    a = ad.seed(2.0, 0, 3)
    out = 3.0 * a - 1.0 + a / 2.0
    assert out.val == pytest.approx(6.0)
    np.testing.assert_allclose(out.der, [3.5, 0.0, 0.0])
    # right-division by a dual
    inv = 1.0 / a
    assert inv.val == pytest.approx(0.5)
    assert inv.der[0] == pytest.approx(-0.25)


def test_pow_and_neg():
    a = ad.seed(1.5, 0, 1)
    out = -(a**3)
    assert out.val == pytest.approx(-3.375)
    assert out.der[0] == pytest.approx(-3 * 1.5**2)
    with pytest.raises(TypeError):
        a**a


def test_value_passthrough():
    assert ad.value(4.0) == 4.0
    assert ad.value(ad.seed(4.0, 0, 2)) == 4.0
    assert ad.sin(0.5) == np.sin(0.5)  # plain floats stay plain


def test_array_scalar_mix():
    vec = ad.Dual(np.arange(1.0, 4.0), np.eye(3))
    s = ad.seed(2.0, 0, 3)  # shares lane 0 with vec[0]
    out = vec * s
    np.testing.assert_allclose(out.val, [2.0, 4.0, 6.0])
    # d(out_1)/d(lane_1) = s = 2, d(out_1)/d(lane_0) = 0 + vec_1 = 2
    assert out.der[1, 1] == pytest.approx(2.0)
    assert out.der[1, 0] == pytest.approx(2.0)
