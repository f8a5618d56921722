import mpmath
import numpy as np
import pytest

from levinterf.airy import AIRY_ZEROS, NEG_SWITCH, POS_SWITCH, airy, log_airy_sq


def _quad_ai(x: float) -> float:
    """Ai from its cosine integral representation, by oscillatory quadrature."""
    f = lambda t: mpmath.cos(t ** 3 / 3 + x * t)  # noqa: E731

    def nodes(n):
        # largest real root of t^3/3 + x t = n pi; the phase is monotone there
        roots = mpmath.polyroots([mpmath.mpf(1) / 3, 0, x, -n * mpmath.pi])
        return max(mpmath.re(r) for r in roots if abs(mpmath.im(r)) < 1e-20)

    return float(mpmath.quadosc(f, [0, mpmath.inf], zeros=nodes) / mpmath.pi)


def test_matches_integral_representation():
    mpmath.mp.dps = 30
    rng = np.random.default_rng(7)
    xs = np.concatenate([rng.uniform(-12, 6, 44), [NEG_SWITCH, POS_SWITCH, -4.5, 4.5, 0.0, -0.3]])
    got = airy(xs)
    for x, g in zip(xs, got):
        assert abs(g - float(mpmath.airyai(x))) < 1e-9, x
    for x in xs[:8]:
        assert abs(airy(x) - _quad_ai(float(x))) < 1e-9, x


def test_tabulated_zeros():
    assert np.all(np.abs(airy(np.array(AIRY_ZEROS))) < 1e-8)


def test_far_tails():
    mpmath.mp.dps = 30
    for x in (-60.0, -25.0, 12.0, 30.0):
        ref = float(mpmath.airyai(x))
        assert airy(x) == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_log_square_consistent_and_finite_far_right():
    x = np.linspace(-10, 6, 50)
    x = x[np.abs(airy(x)) > 1e-6]
    assert np.allclose(np.exp(log_airy_sq(x)), airy(x) ** 2, rtol=1e-9)
    mpmath.mp.dps = 30
    ref = float(2 * mpmath.log(mpmath.airyai(150)))
    assert log_airy_sq(150.0) == pytest.approx(ref, rel=1e-10)


def test_scalar_in_scalar_out():
    assert isinstance(airy(0.0), float)
