"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 search budget exhausted,
3 verification or validity failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from sicqb import definetti, qbist
from sicqb.errors import CapacityError, DimensionMismatchError, InvalidStateError, NotHermitianError
from sicqb.formats import (
    ARTIFACT_VERSION,
    FormatError,
    dumps,
    fiducial_document,
    load_json,
    parse_mixture,
    parse_probs,
    parse_state,
    probs_document,
    read_fiducial,
    state_document,
)
from sicqb.hilbert import DensityOperator, check_seed, eigh, normalize
from sicqb.sic import (
    VERIFY_TOL,
    SearchConfig,
    SicPovm,
    SicVerificationError,
    search_fiducial,
    verify_sic,
)
from sicqb.weyl_heisenberg import WhGroup, orbit

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_INVALID = 3

MAX_SEARCH_DIM = 16
DEFINETTI_TOL = 1e-12
BORN_TOL = 1e-10


class UsageError(Exception):
    pass


class Failure(Exception):
    """Verification or validity failure; carries the partial report."""

    def __init__(self, message: str, report: dict):
        self.report = report
        super().__init__(message)


# --------------------------------------------------------------------------- #
# Output
# --------------------------------------------------------------------------- #

def _rows(prefix: str, value):
    if isinstance(value, dict):
        for k, v in value.items():
            yield from _rows(f"{prefix}.{k}" if prefix else str(k), v)
    elif isinstance(value, (list, tuple, np.ndarray)):
        arr = np.asarray(value, dtype=object)
        if arr.ndim == 1 and all(not isinstance(v, (dict, list, tuple)) for v in arr):
            for i, v in enumerate(arr):
                yield prefix, i, v
        else:
            for i, v in enumerate(value):
                yield from _rows(f"{prefix}[{i}]", v)
    else:
        yield prefix, "", value


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def to_csv(doc: dict) -> str:
    """Long-format view: one ``field,index,value`` row per scalar."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["field", "index", "value"])
    for field, index, value in _rows("", doc):
        writer.writerow([field, index, _csv_cell(value)])
    return buf.getvalue()


def probs_csv(probs) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "prob"])
    for i, p in enumerate(probs):
        writer.writerow([i, _csv_cell(float(p))])
    return buf.getvalue()


def _render(doc: dict, fmt: str) -> str:
    return dumps(doc) if fmt == "json" else to_csv(doc)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _config(args: argparse.Namespace) -> dict:
    keys = ["command", "d", "seed", "tol", "format", "out"]
    keys += [k for k in vars(args) if k not in keys and k != "handler"]
    return {k: getattr(args, k, None) for k in keys}


def _header(args) -> dict:
    return {"artifact_version": ARTIFACT_VERSION, "config": _config(args)}


# --------------------------------------------------------------------------- #
# Helpers
# --------------------------------------------------------------------------- #

def _sic_diagnostics(vectors: np.ndarray) -> dict:
    """Residual, worst pair, frame-sum deviation and Gram spectrum, uncensored."""
    d = vectors.shape[1]
    over = np.abs(vectors.conj() @ vectors.T) ** 2
    dev = np.abs(over - 1.0 / (d + 1))
    np.fill_diagonal(dev, -1.0)
    i, j = divmod(int(np.argmax(dev)), d * d)
    projectors = np.einsum("ij,ik->ijk", vectors, vectors.conj())
    return {
        "d": d,
        "residual": float(max(dev[i, j], 0.0)),
        "worst_pair": [i, j],
        "worst_overlap_squared": float(over[i, j]),
        "target_overlap_squared": 1.0 / (d + 1),
        "sum_deviation": float(np.max(np.abs(projectors.sum(axis=0) - d * np.eye(d)))),
        "gram_min_singular_value": float(np.min(np.abs(eigh(over)[0]))),
    }


def _load_sic(path: str, tol: float) -> SicPovm:
    fid = read_fiducial(path)
    g = WhGroup(fid.size)
    try:
        return verify_sic(orbit(g, normalize(fid)), tol)
    except SicVerificationError as exc:
        raise Failure(f"{path}: not a SIC fiducial: {exc}", {}) from exc


def golden_fiducial_path(d: int) -> Path:
    return Path(str(resources.files("sicqb") / "data" / f"fiducial_d{d}.json"))


# --------------------------------------------------------------------------- #
# Commands
# --------------------------------------------------------------------------- #

def cmd_search(args) -> int:
    d = args.d
    if d is None or not 2 <= d <= MAX_SEARCH_DIM:
        raise UsageError(f"--d must be an integer in [2, {MAX_SEARCH_DIM}], got {d}")
    config = SearchConfig(
        max_restarts=args.max_restarts,
        max_iters=args.max_iters,
        success_threshold=args.success_threshold,
        seed=args.seed,
    )
    rep = search_fiducial(d, config)
    diag = _sic_diagnostics(orbit(WhGroup(d), rep.fiducial))
    header = _header(args)
    fid_doc = fiducial_document(rep.fiducial, diag["residual"], header)
    report = {
        **header,
        "report": {
            "dim": rep.dim,
            "objective": rep.objective,
            "restarts_used": rep.restarts_used,
            "iterations": rep.iterations,
            "seed": rep.seed,
            "converged": rep.converged,
            "residual": diag["residual"],
        },
    }
    if args.out:
        Path(args.out).write_text(dumps(fid_doc), encoding="utf-8")
        report["fiducial_file"] = args.out
    else:
        report["fiducial"] = fid_doc["fiducial"]
    sys.stdout.write(_render(report, args.format))
    return EXIT_OK if rep.converged else EXIT_BUDGET


def cmd_verify(args) -> int:
    tol = args.tol = VERIFY_TOL if args.tol is None else args.tol
    fid = read_fiducial(args.fiducial)
    args.d = fid.size
    if not np.any(fid):
        raise UsageError(f"{args.fiducial}: fiducial is the zero vector")
    # a fiducial stands for a ray; the orbit is built from its unit vector
    vectors = orbit(WhGroup(fid.size), normalize(fid))
    report = {**_header(args), **_sic_diagnostics(vectors)}
    try:
        verify_sic(vectors, tol)
        report["passed"] = True
        report["failure"] = None
    except SicVerificationError as exc:
        report["passed"] = False
        report["failure"] = str(exc)
    _emit(_render(report, args.format), args.out)
    return EXIT_OK if report["passed"] else EXIT_INVALID


def cmd_convert(args) -> int:
    tol = args.tol = VERIFY_TOL if args.tol is None else args.tol
    sic = _load_sic(args.fiducial, tol)
    args.d = sic.dim
    doc = load_json(args.input)
    header = _header(args)
    if args.direction == "to-probs":
        rho = parse_state(doc, args.input)
        if rho.shape[0] != sic.dim:
            raise DimensionMismatchError(f"state has d = {rho.shape[0]}, fiducial has d = {sic.dim}")
        try:
            rho = DensityOperator(rho)
        except (InvalidStateError, NotHermitianError) as exc:
            raise UsageError(f"{args.input}: not a density operator: {exc}") from exc
        p = qbist.to_probs(sic, rho)
        if args.format == "csv":
            _emit(probs_csv(p.probs), args.out)
        else:
            _emit(dumps(probs_document(sic.dim, p.probs, header)), args.out)
        return EXIT_OK

    if args.format == "csv":
        raise UsageError("density operators are written as JSON only; drop --format csv")
    d, probs = parse_probs(doc, args.input)
    if d != sic.dim:
        raise DimensionMismatchError(f"probabilities have d = {d}, fiducial has d = {sic.dim}")
    if args.normalize:
        if np.any(probs < 0) or probs.sum() <= 0:
            raise UsageError(f"{args.input}: cannot normalize negative or all-zero probabilities")
        probs = probs / probs.sum()
    try:
        p = qbist.SicProbabilityVector(d, probs)
    except ValueError as exc:
        raise UsageError(f"{args.input}: {exc}") from exc
    try:
        rho = qbist.from_probs(sic, p)
    except InvalidStateError as exc:
        raise Failure(str(exc), {**header, "valid": False,
                                 "min_eigenvalue": exc.min_eigenvalue}) from exc
    _emit(dumps(state_document(rho.matrix, header)), args.out)
    return EXIT_OK


def cmd_urgleichung(args) -> int:
    tol = args.tol = VERIFY_TOL if args.tol is None else args.tol
    sic = _load_sic(args.fiducial, tol)
    args.d = sic.dim
    rho = parse_state(load_json(args.state), args.state)
    if rho.shape[0] != sic.dim:
        raise DimensionMismatchError(f"state has d = {rho.shape[0]}, fiducial has d = {sic.dim}")
    try:
        rho = DensityOperator(rho)
    except (InvalidStateError, NotHermitianError) as exc:
        raise UsageError(f"{args.state}: not a density operator: {exc}") from exc
    if args.basis_seed is None:
        ground = qbist.GroundMeasurement.computational(sic.dim)
    else:
        ground = qbist.GroundMeasurement.random(sic.dim, check_seed(args.basis_seed))
    report = {**_header(args), **qbist.urgleichung_report(sic, rho, ground)}
    if args.gap_trials:
        sics = {d: _load_sic(str(golden_fiducial_path(d)), VERIFY_TOL) for d in range(2, 9)}
        report["gap_table"] = qbist.gap_table(sics, args.gap_trials, args.seed)
    _emit(_render(report, args.format), args.out)
    return EXIT_OK if report["max_born_error"] < BORN_TOL else EXIT_INVALID


def cmd_definetti(args) -> int:
    d, weights, comps = parse_mixture(load_json(args.mixture), args.mixture)
    try:
        mix = definetti.DeFinettiMixture(weights, comps)
    except (ValueError, InvalidStateError) as exc:
        raise UsageError(f"{args.mixture}: {exc}") from exc
    n = args.n
    if n < 1:
        raise UsageError(f"--n must be positive, got {n}")
    if d ** (n + 1) > definetti.MAX_DENSE_DIM:
        raise CapacityError(
            f"extendability check needs d^(n+1) = {d}^{n + 1} = {d ** (n + 1)} dimensions, "
            f"above the dense cap of {definetti.MAX_DENSE_DIM}; lower --n"
        )
    args.d = d
    fid_path = args.fiducial or str(golden_fiducial_path(d))
    tol = args.tol = VERIFY_TOL if args.tol is None else args.tol
    sic = _load_sic(fid_path, tol)
    sym = definetti.check_symmetry(definetti.build_exchangeable(mix, n))
    ext = definetti.check_extendability(mix, n)
    as_if = definetti.as_if_statistics(mix, sic, n, args.seed, args.trials)
    report = {
        **_header(args),
        "d": d,
        "n": n,
        "max_asymmetry": sym["max_asymmetry"],
        "max_inconsistency": ext["max_inconsistency"],
        "as_if": {
            "trials": as_if["trials"],
            "tv_distance": as_if["tv_distance"],
            "exact_law_gap": as_if["exact_law_gap"],
        },
    }
    _emit(_render(report, args.format), args.out)
    ok = max(sym["max_asymmetry"], ext["max_inconsistency"], as_if["exact_law_gap"]) <= DEFINETTI_TOL
    return EXIT_OK if ok else EXIT_INVALID


# --------------------------------------------------------------------------- #
# Parser
# --------------------------------------------------------------------------- #

def _seed(text: str) -> int:
    try:
        return check_seed(int(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="64-bit RNG seed (default 0)")
    common.add_argument("--tol", type=float, default=None,
                        help=f"SIC verification tolerance (default {VERIFY_TOL:g})")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", default=None, help="output path (default stdout)")

    parser = _Parser(prog="sicqb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("search", parents=[common], help="search for a SIC fiducial")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--max-restarts", type=int, default=SearchConfig.max_restarts)
    p.add_argument("--max-iters", type=int, default=SearchConfig.max_iters)
    p.add_argument("--success-threshold", type=float, default=SearchConfig.success_threshold)
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("verify", parents=[common], help="verify a fiducial file")
    p.add_argument("fiducial")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("convert", parents=[common], help="state <-> SIC probabilities")
    p.add_argument("fiducial")
    p.add_argument("input")
    p.add_argument("--direction", choices=["to-probs", "to-state"], required=True)
    p.add_argument("--normalize", action="store_true",
                   help="rescale input probabilities to sum to one (to-state only)")
    p.set_defaults(handler=cmd_convert)

    p = sub.add_parser("urgleichung", parents=[common],
                       help="Born rule from SIC probabilities vs total probability")
    p.add_argument("fiducial")
    p.add_argument("state")
    p.add_argument("--basis-seed", type=_seed, default=None,
                   help="seed of a Haar-random ground basis (default computational basis)")
    p.add_argument("--gap-trials", type=int, default=0,
                   help="also tabulate the mean gap for d = 2..8 over this many random pure states")
    p.set_defaults(handler=cmd_urgleichung)

    p = sub.add_parser("definetti", parents=[common], help="exchangeable-state diagnostics")
    p.add_argument("mixture")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--fiducial", default=None,
                   help="SIC fiducial file (default: shipped fiducial for the mixture's d)")
    p.set_defaults(handler=cmd_definetti)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except Failure as exc:
        if exc.report:
            _emit(_render(exc.report, args.format), args.out)
        print(f"sicqb {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, FormatError, CapacityError, DimensionMismatchError, ValueError) as exc:
        print(f"sicqb {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
