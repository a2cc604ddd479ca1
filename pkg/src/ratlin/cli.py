"""Command-line front end.

Exit codes: 0 success, 2 precondition or certification failure, 1 I/O or parse error.
Reports are JSON with sorted keys; every number is an exact rational string or an int.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Callable, List, Tuple

from flint import fmpq_mat

from . import fixtures
from .fiedler import (
    FiedlerSpec,
    build_fiedler_rational,
    fiedler_tuples,
    permute_to_extended_kronecker,
    symbolic_d0_positions,
)
from .linearize import (
    OrthogonalRecurrence,
    Pencil,
    block_kronecker,
    build_sbmb,
    complete_pair,
    extended_m1_build,
    m1_build,
    m2_build,
)
from .minbases import MinimalBasis, is_minimal_basis, minimal_basis, oracle_minimal_indices, sorted_col_degrees
from .polymat import (
    PolyMatrix,
    RatMatrix,
    const_from_json,
    const_to_json,
    has_unit_invariant_factors,
    infinity_structure,
    invariant_factors,
    matrix_from_json,
    pencil_infinity_structure,
)
from .sysmat import (
    CertificationError,
    PolySystemMatrix,
    PreconditionError,
    irreducibility_orders,
    is_minimal,
    properness_conditions,
    strong_irreducibility,
    transfer_function,
)
from .verify import (
    check_strong_linearization,
    detect_branch,
    mu_relation,
    predicted_pencil_orders,
    structural_report,
)


class ParseError(Exception):
    pass


def _load(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _parse(path: str, fn: Callable):
    data = _load(path)
    try:
        return fn(data)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _matrix_or_pencil(data) -> RatMatrix:
    # a pencil record stands for lambda * l1 + l0
    if "l1" in data and "l0" in data:
        return Pencil.from_json(data).poly().to_rat()
    return matrix_from_json(data)


def _matrix(path: str) -> RatMatrix:
    return _parse(path, _matrix_or_pencil)


def _psm(path: str) -> PolySystemMatrix:
    return _parse(path, PolySystemMatrix.from_json)


def _basis_json(b: MinimalBasis) -> dict:
    return b.to_json()


# ---------------------------------------------------------------------------
# linearization records: pencil + what recovery needs


def _lin_record(lin, g: RatMatrix, extra: dict = None) -> dict:
    out = lin.to_json()
    meta = dict(out["meta"])
    meta["matrix"] = g.to_json()
    meta["recovery"] = {side: const_to_json(lin.recovery_matrix(side)) for side in ("right", "left")}
    meta["shift"] = {side: lin.shift(side) for side in ("right", "left")}
    cert = check_strong_linearization(lin.pencil, g)
    meta["certificate"] = cert.items
    meta["strong_linearization"] = bool(cert)
    meta.update(extra or {})
    out["meta"] = meta
    return out


class _Record:
    """Recovery data read back from a linearization record."""

    def __init__(self, data: dict):
        self.pencil = Pencil.from_json(data)
        meta = data.get("meta", {})
        self.g = matrix_from_json(meta["matrix"]) if "matrix" in meta else None
        self.rec = {k: const_from_json(v) for k, v in meta.get("recovery", {}).items()}
        self.shifts = {k: int(v) for k, v in meta.get("shift", {}).items()}


def cmd_analyze(args) -> dict:
    return structural_report(_matrix(args.matrix)).to_json()


def cmd_minbases(args) -> dict:
    g = _matrix(args.matrix)
    sides = ("right", "left") if args.side == "both" else (args.side,)
    return {side: _basis_json(minimal_basis(g, side)) for side in sides}


def cmd_transfer(args) -> dict:
    return {"transfer": transfer_function(_psm(args.psm)).to_json()}


def cmd_check_minimal(args) -> dict:
    return {"minimal": is_minimal(_psm(args.psm))}


def cmd_check_properness(args) -> dict:
    a, c = properness_conditions(_psm(args.psm))
    return {"a_inv_b_proper": a, "c_a_inv_proper": c}


def cmd_check_strong_irreducibility(args) -> dict:
    p = _psm(args.psm)
    wide, tall = irreducibility_orders(p)
    return {"strongly_irreducible": strong_irreducibility(p), "orders_wide": wide, "orders_tall": tall}


def _recurrence(data: dict) -> OrthogonalRecurrence:
    return OrthogonalRecurrence(data["alpha"], data["beta"], data["gamma"])


def cmd_linearize(args) -> dict:
    g = _matrix(args.matrix)
    extra = _parse(args.basis_file, lambda d: d) if args.basis_file else {}
    kind = args.kind
    if kind == "block-kronecker":
        if args.eps is None or args.eta is None:
            raise PreconditionError("block-kronecker needs --eps and --eta")
        lin = block_kronecker(g, args.eps, args.eta)
    elif kind == "sbmb":
        try:
            pairs = [complete_pair(matrix_from_json(extra[f"K{i}"]).to_poly(),
                                   matrix_from_json(extra[f"N{i}"]).to_poly()) for i in (1, 2)]
            body = matrix_from_json(extra["M"]).to_poly()
        except KeyError as exc:
            raise ParseError(f"sbmb basis file needs K1, N1, K2, N2, M: missing {exc}") from exc
        lin = build_sbmb(g, pairs[0], pairs[1], body)
    elif kind in ("m1", "m2"):
        rec = _recurrence(extra) if extra else None
        lin = (m1_build if kind == "m1" else m2_build)(g, rec)
    elif kind == "extended-m1":
        try:
            m_psi = matrix_from_json(extra["M_psi"]).to_poly()
            body = matrix_from_json(extra["m_psi_D"]).to_poly()
        except KeyError as exc:
            raise ParseError(f"extended-m1 basis file needs M_psi and m_psi_D: missing {exc}") from exc
        lin = extended_m1_build(g, m_psi, body)
    else:
        raise PreconditionError(f"unknown kind {kind!r}")
    return _lin_record(lin, g)


def cmd_recover(args) -> dict:
    rec = _parse(args.linearization, _Record)
    side = args.side
    # accepts a bare matrix, a basis record, or minbases output keyed by side
    basis = _parse(args.basis, lambda d: matrix_from_json(d.get(side, d).get("basis", d.get(side, d))).to_poly())
    if side not in rec.rec:
        raise PreconditionError("linearization record has no recovery data")
    cert_l = is_minimal_basis(basis, rec.pencil.poly(), side)
    if not cert_l:
        raise PreconditionError(f"input is not a minimal basis of L: {cert_l.failed}")
    h = PolyMatrix.from_const(rec.rec[side]) * basis
    out = MinimalBasis(side, h, sorted_col_degrees(h))
    report = {"basis": out.to_json()}
    if rec.g is not None:
        cert = is_minimal_basis(h, rec.g, side)
        if not cert:
            raise CertificationError(f"recovered basis is not minimal: {cert.failed}")
        report["certified"] = True
    sh = rec.shifts.get(side)
    if sh is not None:
        ok = [i + sh for i in out.indices] == sorted_col_degrees(basis)
        if not ok:
            raise CertificationError("minimal indices do not follow the shift law")
        report["shift"] = sh
    return report


def cmd_fiedler(args) -> dict:
    g = _matrix(args.matrix)
    assignments = _parse(args.assignments, lambda d: d) if args.assignments else {}
    spec = _parse(args.tuples, lambda d: FiedlerSpec.from_json(d, assignments))
    lin = build_fiedler_rational(g, spec)
    extra = {"d0_position": list(lin.d0_position), "c0": spec.c0, "i0": spec.i0}
    if args.permute:
        kf = permute_to_extended_kronecker(lin)
        extra.update({"pi1": kf.pi1.sigma, "pi2": kf.pi2.sigma, "eps": kf.eps_deg, "eta": kf.eta_deg,
                      "permutation_certificate": kf.certificate})
    else:
        permute_to_extended_kronecker(lin)
    return _lin_record(lin, g, extra)


def cmd_verify(args) -> dict:
    g = _matrix(args.matrix)
    pencil = _parse(args.linearization, Pencil.from_json)
    cert = check_strong_linearization(pencil, g)
    report = {"strong_linearization": bool(cert), "failed": cert.failed, "items": cert.items,
              "matrix": structural_report(g).to_json()}
    if cert.items.get("a1_invertible") and cert.items.get("order_equals_least_order"):
        branch = detect_branch(pencil)
        n, s = pencil.n, pencil.shape[0] - pencil.n - g.rows
        report["branch"] = branch
        report["mu_relation"] = mu_relation(g, pencil)
        report["predicted_orders"] = predicted_pencil_orders(infinity_structure(g).q, n, s, branch)
        report["pencil_orders"] = pencil_infinity_structure(pencil.l1, pencil.l0).q
    if args.report:
        _write(args.report, report)
    return report


def cmd_oracle(args) -> dict:
    g = _matrix(args.matrix)
    sides = ("right", "left") if args.side == "both" else (args.side,)
    return {side: oracle_minimal_indices(g, side, args.max_degree) for side in sides}


# ---------------------------------------------------------------------------
# reproduction of the published examples


def _worked_examples() -> List[Tuple[str, Callable[[], bool]]]:
    from .exactalg import LAMBDA, Poly, RatFn

    lam = LAMBDA
    checks = []

    def add(name):
        def wrap(fn):
            checks.append((name, fn))
            return fn
        return wrap

    @add("first PSM: transfer -1/lambda, minimal, proper, orders (-2,0,1), not strongly irreducible")
    def _():
        p = fixtures.first_psm()
        g = transfer_function(p)
        wide, tall = irreducibility_orders(p)
        return (g == RatMatrix.from_rows([[RatFn(Poly.const(-1), lam)]]) and is_minimal(p)
                and properness_conditions(p) == (True, True) and wide == [-2, 0, 1] and tall == [-2, 0, 1]
                and not strong_irreducibility(p))

    @add("second PSM: transfer 1/lambda - lambda^2 + lambda, improper, orders (-1,-1,-1,0), strongly irreducible")
    def _():
        p = fixtures.second_psm()
        g = transfer_function(p)
        want = RatMatrix.from_rows([[RatFn(Poly([1, 0, 1, -1]), lam)]])
        wide, tall = irreducibility_orders(p)
        return (g == want and properness_conditions(p) == (False, False)
                and wide == [-1, -1, -1, 0] and tall == [-1, -1, -1, 0] and strong_irreducibility(p))

    @add("diag(lambda + 1/lambda, 0): rank 1, eps (l^2+1), psi (l), q (-1), indices (0)/(0), nu 1, mu 0, d 1")
    def _():
        r = structural_report(fixtures.diag_example()).to_json()
        return (r["rank"] == 1 and r["eps"] == [["1", "0", "1"]] and r["psi"] == [["0", "1"]]
                and r["q"] == [-1] and r["right_indices"] == [0] and r["left_indices"] == [0]
                and r["nu"] == 1 and r["mu"] == 0 and r["d"] == 1)

    @add("L_{eps,eta}, eps, eta in 1..3: strong linearization, indices (eps)/(eta), mu identity")
    def _():
        g = fixtures.diag_example()
        for e in (1, 2, 3):
            for h in (1, 2, 3):
                pen = fixtures.l_eps_eta(e, h)
                lp = pen.poly()
                mu = mu_relation(g, pen)
                if not (check_strong_linearization(pen, g) and minimal_basis(lp, "right").indices == [e]
                        and minimal_basis(lp, "left").indices == [h] and mu["ok"] and mu["mu_l"] == e + h):
                    return False
        return True

    @add("K_u, u = 1..5: unit invariant factors, zero orders at infinity of K_u / lambda")
    def _():
        for u in range(1, 6):
            k = fixtures.k_u(u)
            inv = invariant_factors(k)
            inv_lam = RatFn(Poly.const(1), lam)
            scaled = RatMatrix(u, u + 1, [[x * inv_lam for x in row] for row in k.to_rat().entries])
            if not (len(inv) == u and all(f.degree == 0 for f in inv) and has_unit_invariant_factors(k)
                    and infinity_structure(scaled).q == [0] * u):
                return False
        return True

    @add("constant branch: L = D_0 with n = 0 gives zero orders and mu(G) = d r")
    def _():
        g = RatMatrix.from_rows([[1, 2], [2, 4]])
        d0 = fmpq_mat([[1, 2], [2, 4]])
        pen = Pencil(fmpq_mat(2, 2), d0, 0)
        mu = mu_relation(g, pen)
        return (bool(check_strong_linearization(pen, g)) and detect_branch(pen) == "constant"
                and pencil_infinity_structure(pen.l1, pen.l0).q == [0] and mu["ok"] and mu["mu_g"] == 0)

    @add("Fiedler pencils: D_0 at (q - i0, q - c0); q = 2 FP (1,0) gives (1,2); one of i0, c0 nonzero")
    def _():
        d = PolyMatrix.from_rows([[Poly([1, 2, 3])]])
        g = d.to_rat()
        for q in (2, 3):
            for spec in fiedler_tuples(q):
                dq = PolyMatrix.from_rows([[Poly([1] * (q + 1))]])
                lin = build_fiedler_rational(dq.to_rat(), spec)
                if symbolic_d0_positions(lin.poly_pencil) != [lin.d0_position]:
                    return False
                if (spec.i0 == 0) == (spec.c0 == 0):
                    return False
        lin = build_fiedler_rational(g, FiedlerSpec("FP", 2, [1, 0], [-2]))
        return lin.d0_position == (1, 2)

    return checks


def cmd_reproduce_paper(args) -> dict:
    rows = []
    for name, fn in _worked_examples():
        t0 = time.perf_counter()
        try:
            ok = bool(fn())
            err = None
        except (PreconditionError, CertificationError, ValueError) as exc:
            ok, err = False, str(exc)
        rows.append({"check": name, "pass": ok, "error": err})
        if args.timings:
            rows[-1]["seconds"] = f"{time.perf_counter() - t0:.3f}"
    return {"checks": rows, "all_pass": all(r["pass"] for r in rows)}


# ---------------------------------------------------------------------------


def _write(path: str, report: dict) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(_dump(report))
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _dump(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _text(report, indent: str = "") -> str:
    lines = []
    for k in sorted(report) if isinstance(report, dict) else range(len(report)):
        v = report[k]
        if isinstance(v, (dict, list)) and v and any(isinstance(x, (dict, list)) for x in
                                                     (v.values() if isinstance(v, dict) else v)):
            lines.append(f"{indent}{k}:")
            lines.append(_text(v, indent + "  "))
        else:
            lines.append(f"{indent}{k}: {json.dumps(v, sort_keys=True)}")
    return "\n".join(lines)


COMMANDS = {
    "analyze": cmd_analyze,
    "minbases": cmd_minbases,
    "transfer": cmd_transfer,
    "check-minimal": cmd_check_minimal,
    "check-properness": cmd_check_properness,
    "check-strong-irreducibility": cmd_check_strong_irreducibility,
    "linearize": cmd_linearize,
    "recover": cmd_recover,
    "fiedler": cmd_fiedler,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "reproduce-paper": cmd_reproduce_paper,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ratlin", description="Exact structural analysis and linearizations "
                                                           "of rational matrices.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of standard output")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for fixture generation")
    sub = ap.add_subparsers(dest="command", required=True)

    def verb(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    p = verb("analyze", "Smith-McMillan data, orders at infinity, minimal indices, least order")
    p.add_argument("--matrix", required=True)
    p = verb("minbases", "minimal bases and indices")
    p.add_argument("--matrix", required=True)
    p.add_argument("--side", choices=("right", "left", "both"), default="both")
    for name, h in (("transfer", "transfer function of a polynomial system matrix"),
                    ("check-minimal", "coprimeness of (A, B) and (A, C)"),
                    ("check-properness", "properness of A^-1 B and C A^-1"),
                    ("check-strong-irreducibility", "orders at infinity of the two bordered matrices")):
        p = verb(name, h)
        p.add_argument("--psm", required=True)
    p = verb("linearize", "build a linearization")
    p.add_argument("--matrix", required=True)
    p.add_argument("--kind", required=True, choices=("block-kronecker", "sbmb", "m1", "m2", "extended-m1"))
    p.add_argument("--eps", type=int)
    p.add_argument("--eta", type=int)
    p.add_argument("--basis-file", help="recurrence (m1, m2), dual pairs and body (sbmb), M_psi (extended-m1)")
    p = verb("recover", "recover a minimal basis of G from one of a linearization")
    p.add_argument("--linearization", required=True)
    p.add_argument("--basis", required=True)
    p.add_argument("--side", choices=("right", "left"), required=True)
    p = verb("fiedler", "Fiedler-like pencil of a square rational matrix")
    p.add_argument("--tuples", required=True)
    p.add_argument("--assignments")
    p.add_argument("--matrix", required=True)
    p.add_argument("--permute", action="store_true")
    p = verb("verify", "check a pencil is a strong linearization of G")
    p.add_argument("--linearization", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--report")
    p = verb("oracle", "brute-force minimal indices from degree-bounded kernels")
    p.add_argument("--matrix", required=True)
    p.add_argument("--max-degree", type=int, default=8)
    p.add_argument("--side", choices=("right", "left", "both"), default="right")
    p = verb("reproduce-paper", "run the published worked examples")
    p.add_argument("--timings", action="store_true", help="add wall-clock times (breaks byte identity)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
        code = 0
        if args.command == "reproduce-paper" and not report["all_pass"]:
            code = 2
    except (PreconditionError, CertificationError) as exc:
        report = {"error": type(exc).__name__, "failed": str(exc)}
        code = 2
    except ParseError as exc:
        print(json.dumps({"error": "ParseError", "failed": str(exc)}, sort_keys=True), file=sys.stderr)
        return 1
    text = _dump(report) if args.format == "json" else _text(report) + "\n"
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(json.dumps({"error": "IOError", "failed": str(exc)}), file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
