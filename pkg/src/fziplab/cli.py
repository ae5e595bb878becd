"""Command-line interface.  Exit codes: 0 success, 1 semantic failure,
2 malformed input (with the JSON path of the first problem)."""
from __future__ import annotations

import argparse
import json
import sys

from . import chain as ch
from . import filt as fl
from . import fixtures as fx
from . import fzip as fz
from . import pinched as pn
from . import selftest as st
from . import serialize as ser
from .gf import FieldError, make_field


class SemanticError(Exception):
    pass


def _read(path: str):
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise SemanticError(f"cannot read {path}: {e.strerror}") from None
    return ser.loads_document(text)


def _expect(doc, *kinds):
    kind, F, value = doc
    if kind not in kinds:
        raise SemanticError(f"expected a document of kind {' or '.join(kinds)}, got {kind}")
    return F, value


def _checked(doc, *kinds):
    F, v = _expect(doc, *kinds)
    errs = v.check()
    if errs:
        raise SemanticError(f"invalid {doc[0]}: {errs[0]}")
    return F, v


def _out(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _bool(v: bool) -> None:
    _out("true" if v else "false")


def _json(obj) -> None:
    _out(json.dumps(obj, sort_keys=True, separators=(",", ":")))


def _field_arg(text: str):
    try:
        p, n = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected p,n such as 2,1") from None
    try:
        return make_field(p, n)
    except FieldError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


# ------------------------------------------------------------------ commands

def cmd_validate(args) -> int:
    kind, F, v = _read(args.file)
    if kind == "zip":
        ok, errs = fz.validate(v)
    elif kind == "pinched":
        ok, errs = pn.validate_pinched(v)
    elif kind in ("complex", "chainmap", "filtration", "classical_zip"):
        errs = v.check()
        ok = not errs
    elif kind == "vb_charts":
        try:
            pn.decode_vb(v)
            ok, errs = True, []
        except ValueError as e:
            ok, errs = False, [str(e)]
    else:
        ok, errs = True, []
    if ok:
        _out("OK")
        return 0
    _out(errs[0])
    return 1


def cmd_homology(args) -> int:
    _, C = _checked(_read(args.file), "complex")
    _json([[d, v] for d, v in sorted(ch.betti(C).items())])
    return 0


def cmd_split(args) -> int:
    F, C = _checked(_read(args.file), "complex")
    _out(ser.dump_document("chainmap", F, ch.split(C)))
    return 0


def cmd_ss(args) -> int:
    F, X = _checked(_read(args.file), "filtration")
    if args.degenerate:
        _bool(fl.is_degenerate(X))
        return 0
    if args.r is None:
        raise SemanticError("ss needs --r R or --degenerate")
    if args.r < 1:
        raise SemanticError("page index must be at least 1")
    _out(ser.dump_document("page", F, fl.spectral_page(X, args.r)))
    return 0


def _zip(path):
    return _expect(_read(path), "zip")


def _valid_zip(path):
    F, Z = _zip(path)
    ok, errs = fz.validate(Z)
    if not ok:
        raise SemanticError(f"invalid zip: {errs[0]}")
    return F, Z


def cmd_zip(args) -> int:
    op = args.op
    files = args.files or ["-"]
    need = 2 if op == "tensor" else 1
    if len(files) != need:
        raise SemanticError(f"zip {op} takes {need} file argument(s)")
    if op in ("lift-curve", "lift-k3"):
        F, M = _checked(_read(files[0]), "classical_zip")
        Z = fz.lift_curve(M) if op == "lift-curve" else fz.lift_k3(M)
        _out(ser.dump_document("zip", F, Z))
        return 0
    F, Z = _valid_zip(files[0])
    if op == "type":
        _json([[k, i, v] for (k, i), v in sorted(fz.zip_type(Z).items())])
    elif op == "euler":
        _json([[k, v] for k, v in sorted(fz.euler(Z).items())])
    elif op == "strong":
        _bool(fz.is_strong_zip(Z))
    elif op == "degenerate":
        _bool(fz.is_degenerate_zip(Z))
    elif op == "tensor":
        F2, Z2 = _valid_zip(files[1])
        if F2 != F:
            raise SemanticError("zips over different fields")
        _out(ser.dump_document("zip", F, fz.tensor(Z, Z2)))
    elif op == "pi":
        if args.n is None:
            raise SemanticError("zip pi needs --n N")
        _out(ser.dump_document("classical_zip", F, fz.pi(Z, args.n)))
    elif op == "decompose":
        _out(ser.dump_document("decomposition", F, fz.decompose(Z)))
    elif op == "pairing":
        if args.map:
            _, w = _expect(_read(args.map), "chainmap")
        else:
            w = fz.standard_pairing(Z, args.shift)
        _bool(fz.check_dr_pairing(Z, args.shift, w))
    return 0


def cmd_pinched(args) -> int:
    op = args.op
    if op == "koszul":
        F, X = _checked(_read(args.file), "filtration")
        K, _ = pn.koszul_pullback(X)
        _out(ser.dump_document("complex", F, K))
    elif op == "encode":
        F, M = _checked(_read(args.file), "classical_zip")
        _out(ser.dump_document("vb_charts", F, pn.encode_vb(M)))
    elif op == "decode":
        F, X = _expect(_read(args.file), "vb_charts")
        _out(ser.dump_document("classical_zip", F, pn.decode_vb(X)))
    elif op == "roundtrip":
        kind, F, v = _read(args.file)
        if kind == "classical_zip":
            _bool(pn.vb_roundtrip(v))
        elif kind == "zip":
            _bool(pn.perf_roundtrip(v))
        elif kind == "pinched":
            Z = pn.to_derived_fzip(v)
            _bool(pn.perf_roundtrip(Z))
        else:
            raise SemanticError("roundtrip expects a classical_zip, zip or pinched document")
    return 0


def cmd_fixtures(args) -> int:
    F = args.field or make_field(2)
    params = {"seed": args.seed}
    if args.g is not None:
        params["g"] = args.g
    if args.n is not None:
        params["n"] = args.n
    Z = fx.fixture(args.name, F, **params)
    _out(ser.dump_document("zip", F, Z))
    return 0


def cmd_selftest(args) -> int:
    lines, ok = st.run(args.seed, args.count)
    _out("\n".join(lines))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fziplab", description="Derived F-zips over finite fields.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check any document")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("homology", help="Betti numbers of a complex")
    p.add_argument("file")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("split", help="quasi-isomorphism onto homology")
    p.add_argument("file")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("ss", help="spectral sequence of a filtration")
    p.add_argument("file")
    p.add_argument("--r", type=int)
    p.add_argument("--degenerate", action="store_true")
    p.set_defaults(func=cmd_ss)

    p = sub.add_parser("zip", help="operations on derived zips")
    p.add_argument("op", choices=["type", "euler", "strong", "degenerate", "tensor", "pi", "decompose",
                                  "lift-curve", "lift-k3", "pairing"])
    p.add_argument("files", nargs="*")
    p.add_argument("--n", type=int)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--map", help="chainmap document for the pairing (default: a synthesized one)")
    p.set_defaults(func=cmd_zip)

    p = sub.add_parser("pinched", help="pinched projective line dictionary")
    p.add_argument("op", choices=["koszul", "encode", "decode", "roundtrip"])
    p.add_argument("file", nargs="?", default="-")
    p.set_defaults(func=cmd_pinched)

    p = sub.add_parser("fixtures", help="emit a fixture zip")
    p.add_argument("name", choices=list(fx.NAMES))
    p.add_argument("--g", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--field", type=_field_arg)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("selftest", help="randomized property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args, extra = ap.parse_known_args(argv)
    if extra:
        # file arguments given after options land here for `zip`
        if args.command != "zip" or any(e.startswith("-") and e != "-" for e in extra):
            ap.error(f"unrecognized arguments: {' '.join(extra)}")
        args.files = args.files + extra
    try:
        return args.func(args)
    except ser.FormatError as e:
        sys.stderr.write(f"malformed document at {e.path}: {e.message}\n")
        return 2
    except (SemanticError, ValueError, FieldError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
