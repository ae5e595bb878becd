from __future__ import annotations

from math import comb

import pytest

from fziplab import chain as ch
from fziplab import filt as fl
from fziplab import fixtures as fx
from fziplab import fzip as fz
from fziplab.gf import FieldError, make_field

GF2 = make_field(2)


def curve_type(g):
    t = {(0, 0): 1, (1, -2): 1}
    if g:
        t.update({(0, -1): g, (1, -1): g})
    return t


@pytest.mark.parametrize("g", [0, 1, 2, 5])
def test_curve_type(g):
    Z = fx.curve(GF2, g)
    assert fz.validate(Z)[0]
    assert fz.zip_type(Z) == curve_type(g)
    assert fz.is_strong_zip(Z) and fz.is_degenerate_zip(Z)


def test_curve_rejects_negative_genus():
    with pytest.raises(ValueError):
        fx.curve(GF2, -1)


def test_k3(field):
    Z = fx.k3(field)
    assert fz.validate(Z)[0]
    assert fz.zip_type(Z) == {(0, 0): 1, (0, -2): 1, (1, -2): 20, (2, -2): 1, (2, -4): 1}
    assert fz.is_strong_zip(Z) and fz.is_degenerate_zip(Z)
    assert fz.pi(Z, -2).type() == {0: 1, 1: 20, 2: 1}
    assert fz.decompose(Z).ok


@pytest.mark.parametrize("n", [1, 2])
def test_abelian(field, n):
    Z = fx.abelian(field, n, seed=3)
    assert fz.validate(Z)[0] and fz.is_degenerate_zip(Z)
    b = ch.betti(Z.C.colim())
    assert {-k: comb(2 * n, k) for k in range(2 * n + 1)} == b
    # signed Euler contribution of degree -k under the embedding convention
    t = fz.zip_type(Z)
    for k in range(2 * n + 1):
        contrib = sum((-1) ** (i % 2) * v for (_, i), v in t.items() if i == -k)
        assert contrib == (-1) ** k * comb(2 * n, k)
    assert sum(fz.euler(Z).values()) == 0


def test_abelian_rejects_wrong_rank(field):
    with pytest.raises(ValueError):
        fx.abelian(field, 2, M=fx.curve_classical(field, 1))


def test_serre_completion():
    h = fx.serre_complete(fx.ENRIQUES_HODGE["mu2"])
    assert h[(2, 1)] == h[(0, 1)] and h[(1, 2)] == h[(1, 0)] and h[(2, 2)] == 1


@pytest.mark.parametrize("name", ["mu2", "z2"])
def test_enriques_degenerate_types(name):
    Z = fx.fixture(f"enriques_{name}", GF2)
    assert fz.validate(Z)[0]
    assert fz.is_degenerate_zip(Z) and fz.is_strong_zip(Z)
    want = fx.hodge_to_type(fx.serre_complete(fx.ENRIQUES_HODGE[name]))
    assert fz.zip_type(Z) == want
    # a degenerate zip has abutment equal to its E_1 totals
    assert fx.de_rham_dims(Z, 4) == fx.e1_totals(Z, 4) == (1, 1, 12, 1, 1)
    assert fz.decompose(Z).ok


def test_enriques_alpha2():
    Z = fx.enriques_alpha2(GF2)
    assert fz.validate(Z)[0]
    assert not fz.is_degenerate_zip(Z) and not fz.is_strong_zip(Z)
    assert fz.zip_type(Z) == fx.hodge_to_type(fx.serre_complete(fx.ENRIQUES_HODGE["alpha2"]))
    assert fx.e1_totals(Z, 4) == (1, 2, 14, 2, 1)
    assert fx.de_rham_dims(Z, 4) == (1, 1, 12, 1, 1)
    # E_1 and E_infinity of the Hodge side, confirmed through the page engine
    a, b = Z.C.window
    assert fl.spectral_page(Z.C, 1).entries != fl.spectral_page(Z.C, b - a + 2).entries


def test_enriques_needs_characteristic_two():
    for name in ("enriques_mu2", "enriques_z2", "enriques_alpha2"):
        with pytest.raises(FieldError):
            fx.fixture(name, make_field(3))


def test_enriques_over_gf4():
    Z = fx.enriques_alpha2(make_field(2, 2))
    assert not fz.is_degenerate_zip(Z)


def test_fixture_registry():
    for name in fx.NAMES:
        assert fz.validate(fx.fixture(name))[0]
    with pytest.raises(ValueError):
        fx.fixture("hyperkahler")
    assert fz.zip_type(fx.fixture("curve", g=3)) == curve_type(3)


def test_every_degenerate_fixture_decomposes():
    for name in fx.NAMES:
        Z = fx.fixture(name)
        if fz.is_degenerate_zip(Z):
            assert fz.decompose(Z).ok
        assert fz.is_degenerate_zip(Z) == fz.is_strong_zip(Z)
