import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from front_stability_lab import norms
from front_stability_lab.errors import ResolutionError
from front_stability_lab.weight import WeightFunction, WeightSpec


@pytest.mark.parametrize("d,k", [(2, 2), (3, 2), (4, 3), (5, 3)])
def test_default_order(d, k):
    assert norms.default_order(d) == k


def test_periodic_sobolev_norm_of_a_mode():
    n, L = 64, 2 * np.pi
    y = np.arange(n) * L / n
    u = np.sin(3 * y)
    base = np.sqrt(np.pi)
    # sum over |beta| <= 2 of ||d^beta u||: 1 + 3 + 9 times ||sin||
    assert norms.sobolev_norm(u, 2, L / n, periodic=(True,)) == pytest.approx(13 * base, rel=1e-12)
    assert norms.l2_norm(u, L / n, periodic=(True,)) == pytest.approx(base, rel=1e-12)


def test_two_dimensional_multi_indices():
    assert sorted(norms.multi_indices(2, 1)) == [(0, 0), (0, 1), (1, 0)]
    assert len(list(norms.multi_indices(2, 2))) == 6


def test_weighted_norm_equals_norm_of_weighted_field():
    z = np.linspace(-10, 10, 201)
    h = z[1] - z[0]
    wf = WeightFunction(WeightSpec(0.3, 0.2))
    u = np.exp(-z**2)[:, None] * np.array([1.0, -2.0])
    a = norms.sobolev_norm(u, 2, h, weight=wf, z=z)
    b = norms.sobolev_norm(u * wf(z)[:, None], 2, h)
    assert a == pytest.approx(b, rel=1e-14)
    assert norms.intersection_norm(u, 2, (h,), wf, z) == pytest.approx(max(a, norms.sobolev_norm(u, 2, h)))


def test_bounded_axis_norm_converges():
    vals = []
    for n in (101, 201, 401):
        z = np.linspace(-8, 8, n)
        vals.append(norms.sobolev_norm(np.exp(-z**2), 1, z[1] - z[0]))
    # ||g|| + ||g'|| for g = exp(-z^2)
    exact = 2 * (np.pi / 2) ** 0.25
    assert abs(vals[-1] - exact) < 5e-6
    assert abs(vals[-1] - exact) < abs(vals[0] - exact)


def test_l1_and_w11():
    n, L = 400, 40.0
    h = L / n
    y = np.arange(n) * h - L / 2
    u = np.exp(-y**2)
    assert norms.l1_norm(u, h, periodic=(True,)) == pytest.approx(np.sqrt(np.pi), rel=1e-10)
    # int |u'| = 2 u(0); |u'| has a kink at 0, so only O(h)
    assert norms.w11_norm(u, h, periodic=(True,)) == pytest.approx(np.sqrt(np.pi) + 2.0, rel=2e-3)


def test_resolution_error():
    with pytest.raises(ResolutionError):
        norms.sobolev_norm(np.zeros(4), 2, 0.1)
    with pytest.raises(ValueError):
        norms.sobolev_norm(np.zeros(40), -1, 0.1)
    with pytest.raises(ValueError):
        norms.sobolev_norm(np.zeros(40), 1, 0.1, weight=WeightFunction(WeightSpec()))


def test_initial_energy_adds_parts():
    z = np.linspace(-5, 5, 51)
    hz = z[1] - z[0]
    v = np.zeros((51, 8, 1))
    y = np.arange(8) * 0.5
    q = np.cos(2 * np.pi * y / 4.0)
    E = norms.initial_energy(v, q, 2, (hz, 0.5), (0.5,), WeightFunction(WeightSpec()), z)
    per = (True,)
    expect = norms.sobolev_norm(q, 3, 0.5, periodic=per) + norms.w11_norm(q, 0.5, periodic=per)
    assert E == pytest.approx(expect)


@given(st.lists(st.floats(0, 10), min_size=2, max_size=30))
def test_running_sup_is_monotone(values):
    s = norms.NormSeries(k=2)
    for i, x in enumerate(values):
        s.append({c: (float(i) if c == "t" else x) for c in norms.SERIES_COLUMNS})
    sup = s.running_sup("q_hk")
    assert np.all(np.diff(sup) >= 0)
    assert sup[-1] == max(values)


def test_series_csv_roundtrip():
    s = norms.NormSeries(k=2, E_k=0.5)
    for t in (0.0, 0.5, 1.0):
        s.append({c: t + j for j, c in enumerate(norms.SERIES_COLUMNS)})
    text = s.to_csv()
    back = norms.NormSeries.from_csv(text, k=2, E_k=0.5)
    assert back.to_csv() == text
    assert text.splitlines()[0] == ",".join(norms.SERIES_COLUMNS)
