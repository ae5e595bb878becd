"""Randomized property suites with a deterministic report."""
from __future__ import annotations

import numpy as np

from . import chain as ch
from . import filt as fl
from . import fzip as fz
from . import pinched as pn
from .gf import make_field

FIELDS = ((2, 1), (2, 2), (3, 1), (3, 2))


def _add(acc: dict, b: dict, scale: int = 1) -> None:
    for k, v in b.items():
        acc[k] = acc.get(k, 0) + scale * v


def _convolve(a: dict, b: dict) -> dict:
    out: dict = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return {k: v for k, v in out.items() if v}


def strong_iff_degenerate(F, rng) -> bool:
    X = fl.random_any_filtration(F, rng)
    return fl.is_strong(X) == fl.is_degenerate(X)


def convergence(F, rng) -> bool:
    X = fl.random_any_filtration(F, rng)
    a, b = X.window
    page = fl.spectral_page(X, b - a + 2, with_bases=False)
    totals: dict = {}
    for (p, q), v in page.entries.items():
        totals[p + q] = totals.get(p + q, 0) + v
    return totals == ch.betti(X.colim()) and page.entries == fl.e_infinity(X)


def splitting(F, rng) -> bool:
    C = ch.random_complex(F, rng, -2, 2, max_dim=5)
    s = ch.split(C)
    return not s.check() and ch.is_quasi_iso(s) and s.target.dims_dict() == ch.betti(C)


def kunneth(F, rng) -> bool:
    C = ch.random_complex(F, rng, -1, 1, max_dim=3)
    D = ch.random_complex(F, rng, -1, 1, max_dim=3)
    return ch.betti(ch.tensor(C, D)) == _convolve(ch.betti(C), ch.betti(D))


def day_unit(F, rng) -> bool:
    X = fl.random_any_filtration(F, rng, max_width=3, max_dim=4)
    XU = fl.day_convolution(X, fl.unit_filtration(F, X.direction))
    return XU.window == X.window and fl.levelwise_betti(XU) == fl.levelwise_betti(X)


def graded_of_tensor(F, rng) -> bool:
    X = fl.random_any_filtration(F, rng, max_width=3, max_dim=3)
    Y = fl.random_any_filtration(F, rng, direction=X.direction, max_width=2, max_dim=3)
    XY = fl.day_convolution(X, Y)
    for k in fl.graded_window(XY):
        want: dict = {}
        for i in fl.graded_window(X):
            _add(want, ch.betti(ch.tensor(fl.graded(X, i), fl.graded(Y, k - i))))
        if ch.betti(fl.graded(XY, k)) != {d: v for d, v in want.items() if v}:
            return False
    return True


def koszul(F, rng) -> bool:
    X = fl.random_any_filtration(F, rng)
    K, pieces = pn.koszul_pullback(X)
    want: dict = {}
    for c in pieces.values():
        _add(want, ch.betti(c))
    return ch.betti(K) == want


def vb_roundtrip(F, rng) -> bool:
    return pn.vb_roundtrip(fz.random_classical(F, rng, max_rank=5))


def section(F, rng) -> bool:
    M = fz.random_classical(F, rng, max_rank=6)
    n = int(rng.integers(-2, 2))
    return fz.is_isomorphic(fz.pi(fz.embed(M, n), n), M)


def decomposition(F, rng) -> bool:
    return fz.decompose(fz.random_degenerate_zip(F, rng)).ok


def zip_biconditional(F, rng) -> bool:
    Z = fz.random_zip(F, rng)
    return fz.validate(Z)[0] and fz.is_strong_zip(Z) == fz.is_degenerate_zip(Z)


SUITES = (
    ("strong <=> degenerate", strong_iff_degenerate),
    ("convergence", convergence),
    ("splitting", splitting),
    ("kunneth", kunneth),
    ("day unit law", day_unit),
    ("graded of tensor", graded_of_tensor),
    ("koszul pullback", koszul),
    ("vb round trip", vb_roundtrip),
    ("pi of embed", section),
    ("decomposition", decomposition),
    ("zip strong <=> degenerate", zip_biconditional),
)


def run(seed: int = 0, count: int = 10) -> tuple[list[str], bool]:
    """Report lines and overall success."""
    lines = [f"selftest seed={seed} count={count}",
             f"{'suite':<28}{'field':<9}{'cases':>6}{'fail':>6}  status"]
    ok = True
    for si, (name, check) in enumerate(SUITES):
        for fi, (p, n) in enumerate(FIELDS):
            F = make_field(p, n)
            rng = np.random.default_rng([seed, si, fi])
            failures = 0
            for _ in range(count):
                try:
                    good = check(F, rng)
                except Exception:  # a crash counts as a failed case
                    good = False
                failures += not good
            ok &= failures == 0
            status = "pass" if failures == 0 else "FAIL"
            lines.append(f"{name:<28}{F!r:<9}{count:>6}{failures:>6}  {status}")
    lines.append("all suites passed" if ok else "some suites FAILED")
    return lines, ok
