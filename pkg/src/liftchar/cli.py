"""Command-line front end: ``liftchar <command> [options]``.

Exit status: 0 on success, 1 when a verdict requested with ``--strict`` fails (or
a self-test suite fails), 2 on input or numerical errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import fileio
from .charfunc import char_symbol, compose_symbols, is_inner, symbols_equivalent
from .cpmaps import CPMap, fixed_points, is_ergodic, kappa, kappa_inverse
from .exceptions import LiftCharError
from .lifting import (
    Lifting,
    gamma_from_lifting,
    is_coisometric_lifting,
    is_reduced,
    is_subisometric,
    lifting_from_gamma,
)
from .rowcon import RowContraction, is_coisometric, is_star_stable, validate_row_contraction, wold_data
from .selftest import run_all

CONFIG_ENV = "LIFTCHAR_CONFIG"


@dataclass
class RunConfig:
    tol: float = 1e-9
    depth: int = 6
    max_iter: int = 10000
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            raise LiftCharError(f"tol must be > 0, got {self.tol!r}")
        if not (isinstance(self.depth, int) and self.depth >= 1):
            raise LiftCharError(f"depth must be an integer >= 1, got {self.depth!r}")
        if not (isinstance(self.max_iter, int) and self.max_iter >= 1):
            raise LiftCharError(f"max_iter must be an integer >= 1, got {self.max_iter!r}")
        if not isinstance(self.seed, int):
            raise LiftCharError(f"seed must be an integer, got {self.seed!r}")


def load_config(args=None) -> RunConfig:
    """Defaults, then the JSON file named by ``LIFTCHAR_CONFIG``, then command-line flags."""
    values = asdict(RunConfig())
    path = os.environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path) as fh:
                extra = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise LiftCharError(f"{CONFIG_ENV}={path}: {exc}") from None
        if not isinstance(extra, dict):
            raise LiftCharError(f"{CONFIG_ENV}={path}: expected a JSON object")
        unknown = set(extra) - set(values)
        if unknown:
            raise LiftCharError(f"{CONFIG_ENV}={path}: unknown keys {sorted(unknown)}")
        values.update(extra)
    if args is not None:
        for key in values:
            v = getattr(args, key, None)
            if v is not None:
                values[key] = v
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# output helpers


def _yes(b) -> str:
    return "inconclusive" if b is None else ("yes" if b else "no")


def _mat(m) -> str:
    return np.array2string(np.asarray(m), precision=6, suppress_small=True, max_line_width=100)


class _Out:
    def __init__(self, stream):
        self.stream = stream

    def __call__(self, *lines):
        for line in lines:
            print(line, file=self.stream)


def _write_out(args, doc, out):
    if args.out:
        fileio.write(args.out, doc)
        out(f"wrote {args.out}")


def _as_lifting(L: Lifting, cfg: RunConfig) -> Lifting:
    # files are parsed without the contraction check; run it here with the configured tol
    return Lifting(L.C.T, L.A.T, L.B, tol=cfg.tol)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, cfg, out) -> int:
    kind, value = fileio.read(args.file, ("row_contraction", "lifting"))
    if kind == "lifting":
        L = _as_lifting(value, cfg)
        rep = _classify(L, cfg)
        out(*[f"{k}: {_yes(v)}" for k, v in rep.items()])
        _write_out(args, {"kind": "report", "command": "validate", **rep}, out)
        return 0
    T = value
    rep = validate_row_contraction(T, cfg.tol)
    if not rep.ok:
        out(f"row contraction: no; lambda_max = {rep.lambda_max:.12g}")
        return 2
    R = RowContraction(T, cfg.tol)
    st = is_star_stable(R, cfg.tol, cfg.max_iter)
    co = is_coisometric(R, cfg.tol)
    cnc = wold_data(R, cfg.tol, cfg.max_iter).h1_dim == 0 if st.stable is not True else True
    dd = R.defects
    out(f"row contraction: yes; coisometric: {_yes(co)}; D_C rank {dd.rank}",
        f"lambda_max: {rep.lambda_max:.12g}",
        f"D_* rank: {dd.rank_star}",
        f"*-stable: {_yes(st.stable)} ({st.iterations} iterations)",
        f"c.n.c.: {_yes(cnc)}")
    _write_out(args, {"kind": "report", "command": "validate", "row_contraction": True,
                      "lambda_max": rep.lambda_max, "coisometric": co, "rank_D": dd.rank,
                      "rank_D_star": dd.rank_star, "star_stable": st.stable, "cnc": cnc}, out)
    return 0


def _classify(L: Lifting, cfg: RunConfig) -> dict:
    return {
        "contractive": True,
        "coisometric": bool(is_coisometric_lifting(L, max(cfg.tol, 1e-8))),
        "subisometric": is_subisometric(L, max(cfg.tol, 1e-8), cfg.max_iter).ok,
        "reduced": is_reduced(L),
    }


def cmd_lift(args, cfg, out) -> int:
    _, C = fileio.read(args.C, "row_contraction")
    _, A = fileio.read(args.A, "row_contraction")
    _, g = fileio.read(args.gamma, "matrix")
    L = lifting_from_gamma(C, A, g, cfg.tol)
    rep = _classify(L, cfg)
    out(*[f"{k}: {_yes(v)}" for k, v in rep.items()])
    _write_out(args, fileio.lifting_doc(L), out)
    return 1 if args.strict and not rep["reduced"] else 0


def cmd_charfn(args, cfg, out) -> int:
    _, L = fileio.read(args.lifting, "lifting")
    L = _as_lifting(L, cfg)
    S = char_symbol(L, cfg.depth)
    inner = is_inner(S, max(cfg.tol, 1e-8))
    out(f"characteristic function: d={S.d}, depth {S.N}, {S.dom_dim} -> {S.cod_dim}",
        f"leakage bound: {S.leakage_bound:.3e}",
        f"inner: {_yes(inner.inner)} (defect {inner.defect:.3e}, threshold {inner.threshold:.3e})")
    _write_out(args, fileio.symbol_doc(S), out)
    return 1 if args.strict and not inner.inner else 0


def cmd_equiv(args, cfg, out) -> int:
    _, S1 = fileio.read(args.first, "symbol")
    _, S2 = fileio.read(args.second, "symbol")
    rep = symbols_equivalent(S1, S2, tol=max(cfg.tol, 1e-8))
    out(f"equivalent: {_yes(rep.equivalent)}",
        f"relative residual: {rep.residual:.3e} (depth {rep.depth})")
    if rep.rank_deficient:
        out("note: coefficient stack is rank deficient; v is not unique")
    if rep.v is not None:
        out("v =", _mat(rep.v))
        _write_out(args, fileio.matrix_doc(rep.v), out)
    return 1 if args.strict and not rep.equivalent else 0


def cmd_compose(args, cfg, out) -> int:
    _, S1 = fileio.read(args.first, "symbol")
    _, S2 = fileio.read(args.second, "symbol")
    S = compose_symbols(S1, S2)
    out(f"product: d={S.d}, depth {S.N}, {S.dom_dim} -> {S.cod_dim}",
        f"leakage bound: {S.leakage_bound:.3e}")
    _write_out(args, fileio.symbol_doc(S), out)
    return 0


def cmd_fixedpoints(args, cfg, out) -> int:
    _, T = fileio.read(args.kraus, "row_contraction")
    phi = CPMap(T, cfg.tol)
    fp = fixed_points(phi)
    out(f"fixed-point dimension: {fp.dimension}", f"unital: {_yes(phi.unital)}")
    erg = None
    if phi.unital:
        erg = fp.dimension == 1
        out(f"ergodic: {_yes(erg)}")
    if fp.borderline:
        out(f"warning: {fp.borderline} singular value(s) near the threshold")
    for k, B in enumerate(fp.selfadjoint_basis):
        out(f"basis[{k}] =", _mat(B))
    _write_out(args, {"kind": "report", "command": "fixedpoints", "dimension": fp.dimension,
                      "unital": phi.unital, "ergodic": erg, "residual": fp.residual,
                      "basis": [fileio.encode_matrix(B) for B in fp.selfadjoint_basis]}, out)
    return 1 if args.strict and erg is False else 0


def cmd_kappa(args, cfg, out) -> int:
    _, L = fileio.read(args.lifting, "lifting")
    L = _as_lifting(L, cfg)
    _, X = fileio.read(args.x, ("matrix", "state"))
    phi = CPMap(L.E, cfg.tol)
    if args.inverse:
        res = kappa_inverse(X, phi, L.p, tol=min(cfg.tol, 1e-12), max_iter=cfg.max_iter)
        out(f"preimage after {res.iterations} iterations (last difference {res.last_difference:.3e})",
            f"corner residual: {res.corner_residual:.3e}", _mat(res.X))
        _write_out(args, fileio.matrix_doc(res.X), out)
        return 1 if args.strict and res.corner_residual > max(cfg.tol, 1e-8) else 0
    y = kappa(X, phi, L.p)
    out("corner:", _mat(y))
    _write_out(args, fileio.matrix_doc(y), out)
    return 0


def cmd_selftest(args, cfg, out) -> int:
    trials = args.trials
    results = run_all(cfg.seed, trials, perturbation=1e-3 if args.inject_failure else 0.0)
    if not results:
        out("no suites run (trials = 0): PASS")
        return 0
    for r in results:
        out(r.line())
    failed = [r.number for r in results if not r.passed]
    out(f"{len(results) - len(failed)}/{len(results)} suites passed")
    _write_out(args, {"kind": "report", "command": "selftest", "seed": cfg.seed,
                      "suites": [{"number": r.number, "name": r.name, "passed": r.passed,
                                  "failures": r.failures[:5], "seconds": r.seconds} for r in results]}, out)
    return 1 if failed else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="numerical tolerance (default 1e-9)")
    common.add_argument("--depth", type=int, default=None, help="Fock truncation depth N (default 6)")
    common.add_argument("--max-iter", dest="max_iter", type=int, default=None,
                        help="iteration cap (default 10000)")
    common.add_argument("--seed", type=int, default=None, help="seed for randomised suites (default 0)")
    common.add_argument("--strict", action="store_true", help="exit 1 when the command's verdict is negative")
    common.add_argument("--out", default=None, help="write the result to this JSON file")

    p = argparse.ArgumentParser(prog="liftchar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="classify a row contraction or lifting")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("lift", parents=[common], help="assemble the lifting of C by A through gamma")
    s.add_argument("C")
    s.add_argument("A")
    s.add_argument("gamma")
    s.set_defaults(func=cmd_lift)

    s = sub.add_parser("charfn", parents=[common], help="characteristic function of a reduced lifting")
    s.add_argument("lifting")
    s.set_defaults(func=cmd_charfn)

    s = sub.add_parser("equiv", parents=[common], help="test two symbols for equivalence")
    s.add_argument("first")
    s.add_argument("second")
    s.set_defaults(func=cmd_equiv)

    s = sub.add_parser("compose", parents=[common], help="product of two symbols")
    s.add_argument("first")
    s.add_argument("second")
    s.set_defaults(func=cmd_compose)

    s = sub.add_parser("fixedpoints", parents=[common], help="fixed points of the CP map of a tuple")
    s.add_argument("kraus")
    s.set_defaults(func=cmd_fixedpoints)

    s = sub.add_parser("kappa", parents=[common], help="corner compression of fixed points")
    s.add_argument("lifting")
    s.add_argument("x")
    s.add_argument("--inverse", action="store_true", help="reconstruct the preimage of a corner fixed point")
    s.set_defaults(func=cmd_kappa)

    s = sub.add_parser("selftest", parents=[common], help="run the randomised property suites")
    s.add_argument("--trials", type=int, default=None, help="trials per suite (default: full counts)")
    s.add_argument("--inject-failure", action="store_true", help="perturb one suite to check failure reporting")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Out(stdout)
    try:
        cfg = load_config(args)
        if getattr(args, "trials", None) is not None and args.trials < 0:
            raise LiftCharError("trials must be >= 0")
        return args.func(args, cfg, out)
    except LiftCharError as exc:
        print(f"error: {exc}", file=stderr)
        lam = getattr(exc, "lambda_max", None)
        if lam is not None:
            print(f"lambda_max: {lam:.12g}", file=stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
