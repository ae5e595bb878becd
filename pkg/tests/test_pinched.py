from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fziplab import chain as ch
from fziplab import filt as fl
from fziplab import fixtures as fx
from fziplab import fzip as fz
from fziplab import linalg as la
from fziplab import pinched as pn
from fziplab.chain import ChainMap
from fziplab.filt import ASC, Filtration
from fziplab.gf import make_field


def _add(acc, b):
    for k, v in b.items():
        acc[k] = acc.get(k, 0) + v


# ------------------------------------------------------------ Koszul

def test_koszul_one_step(field, rng):
    M = ch.random_complex(field, rng, -1, 1)
    K, pieces = pn.koszul_pullback(fl.one_step(M, ASC, 0))
    assert ch.betti(K) == ch.betti(M)
    assert list(pieces) == [0]


def test_koszul_identity_filtration_is_exact(field, rng):
    M = ch.random_complex(field, rng, -1, 1)
    X = Filtration(ASC, 0, [M, M, M], [ch.identity_map(M)] * 2)
    K, _ = pn.koszul_pullback(X)
    assert ch.betti(K) == ch.betti(M)  # the bottom level contributes M, the rest is exact
    assert all(ch.is_exact(pn.koszul_pullback(X)[1][i]) for i in (1, 2))


def test_koszul_additivity(field, rng):
    for _ in range(15):
        X = fl.random_any_filtration(field, rng)
        K, pieces = pn.koszul_pullback(X)
        want: dict = {}
        for i in fl.graded_window(X):
            _add(want, ch.betti(fl.graded(X, i)))
        assert ch.betti(K) == want
        assert all(pieces[i] == fl.graded(X, i) for i in pieces)


def test_koszul_empty(field):
    K, pieces = pn.koszul_pullback(fl.zero_filtration(field, ASC))
    assert K.is_zero() and pieces == {}


# ---------------------------------------------------------- vector bundles

def test_encode_unit(field):
    X = pn.encode_vb(fz.unit_classical(field))
    assert X.V.dims == [1] and X.W.dims == [1]
    assert X.V.lo == X.W.lo == 0
    assert fz.is_isomorphic(pn.decode_vb(X), fz.unit_classical(field))


def test_encode_rank_two_with_distinct_jumps(field, rng):
    Q, R = la.random_invertible(field, rng, 2), la.random_invertible(field, rng, 2)
    M = fz.classical_from_type(field, {0: 1, 2: 1}, Q, R)
    X = pn.encode_vb(M)
    # V (from D): rank 1 from index 0, rank 2 from index 2; W (from C): the reverse
    assert (X.V.lo, X.V.dims) == (0, [1, 1, 2])
    assert (X.W.lo, X.W.dims) == (0, [2, 1, 1])
    assert not X.V.check() and not X.W.check()
    assert sorted(X.pinch) == [0, 2]
    assert pn.vb_roundtrip(M)


def test_vb_round_trip_random(field, rng):
    for _ in range(15):
        M = fz.random_classical(field, rng, max_rank=5)
        N = pn.decode_vb(pn.encode_vb(M))
        assert N.is_valid() and fz.is_isomorphic(N, M)


def test_decode_rejects_singular_glue(field):
    X = pn.encode_vb(fz.trivial_classical(field, 0, 2))
    X.glue = la.zeros(2, 2)
    with pytest.raises(ValueError):
        pn.decode_vb(X)
    Y = pn.encode_vb(fz.unit_classical(field))
    Y.pinch = {0: la.zeros(1, 1)}
    with pytest.raises(ValueError):
        pn.decode_vb(Y)


# --------------------------------------------------------- perfect complexes

def test_perf_round_trip_unit_and_k3(field):
    U = fz.unit_zip(field)
    P = pn.from_derived_fzip(U)
    assert pn.validate_pinched(P) == (True, [])
    Z = pn.to_derived_fzip(P)
    assert fz.zip_type(Z) == fz.zip_type(U)
    for k in U.window():
        assert Z.twist(k) == U.twist(k)
    assert pn.perf_roundtrip(fx.k3(field))


def test_perf_round_trip_random(field, rng):
    for _ in range(6):
        assert pn.perf_roundtrip(fz.random_zip(field, rng))


def test_index_mixing_big_twist_rejected(field):
    # rank-one graded pieces at indices 0 and 1, both in degree 0
    Z = fz.embed(fz.classical_from_type(field, {0: 1, 1: 1}), 0)
    P = pn.from_derived_fzip(Z)
    bt = P.big_twist
    maps = {d: bt.map(d).copy() for d in bt.degrees}
    d0 = next(d for d in maps if maps[d].shape[0] >= 2 and maps[d].shape[1] >= 2)
    m = maps[d0]
    m[-1, 0] = 1
    bad = pn.PinchedPerfData(P.C, P.D, P.glue, ChainMap(bt.source, bt.target, maps))
    with pytest.raises(ValueError, match="mixes indices"):
        pn.to_derived_fzip(bad)


def test_validate_pinched_catches_bad_twist(field):
    P = pn.from_derived_fzip(fx.curve(field, 1))
    zero = ch.zero_map(P.big_twist.source, P.big_twist.target)
    ok, errs = pn.validate_pinched(pn.PinchedPerfData(P.C, P.D, P.glue, zero))
    assert not ok and errs == ["big twist not a quasi-isomorphism"]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([(2, 1), (2, 2), (3, 1), (3, 2)]))
def test_property_vb_and_koszul(seed, pnf):
    F = make_field(*pnf)
    rng = np.random.default_rng(seed)
    assert pn.vb_roundtrip(fz.random_classical(F, rng, max_rank=4))
    X = fl.random_any_filtration(F, rng)
    want: dict = {}
    for i in fl.graded_window(X):
        _add(want, ch.betti(fl.graded(X, i)))
    assert ch.betti(pn.koszul_pullback(X)[0]) == want
