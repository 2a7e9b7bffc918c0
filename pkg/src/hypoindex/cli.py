"""Command-line interface: ``hypoindex classify|index|cayley|decay|lyapunov|suite``.

Matrix roles
------------
``classify``, ``cayley`` and ``lyapunov`` read the file as the system
matrix ``A`` of ``x' = A x`` or ``x_{k+1} = A x_k``. The continuous-time
indices (``hc``, ``shc``) and continuous ``decay`` read it as the generator
``B`` of ``x' = -B x``. ``--negate`` flips the sign before anything else.

Reports are JSON objects with sorted keys. Apart from ``generated_at`` they
are byte-identical for identical input and tolerances.

Exit codes: 0 success, 1 I/O or parse error, 2 precondition failure,
3 indeterminate decision or failed fit, 4 method disagreement or failed
expectation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_POINTS, DEFAULT_WINDOW, discrete_power_report, propagator_norm_samples,
    short_time_exponent_fit, shifted_decay_fit,
)
from .coercivity import classify_continuous, hc_index, shifted_hc_index
from .contractivity import classify_discrete, dhc_index, power_norm_profile, scaled_dhc_index
from .errors import HypoIndexError, InputError
from .io import SCHEMA_VERSION, MatrixFile, decode_matrix, dump_matrix_file, load_matrix_file, to_jsonable
from .matcore import TOLERANCE_PRESETS, Tolerances, hermitian_split, tolerances_from_env
from .transforms import (
    cayley, index_preservation_check, index_preservation_check_discrete, inverse_cayley,
    lyapunov_cayley_map, scaled_cayley, solve_lyapunov_continuous, solve_lyapunov_discrete,
)

EXIT_OK, EXIT_IO, EXIT_PRECONDITION, EXIT_INDETERMINATE, EXIT_CONSISTENCY = 0, 1, 2, 3, 4
INDEX_KINDS = ("hc", "shc", "dhc", "dshc")
FIT_TOLERANCE = 0.2
EXPECT_ATOL = 1e-9
EXPECT_MATRIX_ATOL = 1e-12


class CommandResult:
    """A report body plus the exit code it implies."""

    def __init__(self, body, code=EXIT_OK):
        self.body = body
        self.code = code


# ---------------------------------------------------------------- reports

def _identity(mf):
    return {"name": mf.name, "n": mf.n, "sha256": mf.sha256, "kind_hint": mf.kind_hint}


def _error(exc):
    d = {"error": str(exc), "error_type": type(exc).__name__,
         "exit_code": getattr(exc, "exit_code", EXIT_IO)}
    eig = getattr(exc, "eigenvalue", None)
    if eig is not None:
        d["blocking_eigenvalue"] = eig
    if getattr(exc, "audit", None):
        d["audit"] = exc.audit
    return d


def _audit(decisions):
    return [d.as_dict() for d in decisions]


def continuous_section(A, tol):
    c = classify_continuous(A, tol)
    return {
        "stable": c.stable, "asymptotically_stable": c.asymptotically_stable,
        "semi_dissipative": c.semi_dissipative, "dissipative": c.dissipative,
        "negative_hypocoercive": c.negative_hypocoercive,
        "alpha": c.alpha, "mu": c.mu, "indeterminate": c.indeterminate,
    }


def discrete_section(A, tol):
    d = classify_discrete(A, tol)
    return {
        "stable": d.stable, "asymptotically_stable": d.asymptotically_stable,
        "semi_contractive": d.semi_contractive, "contractive": d.contractive,
        "hypocontractive": d.hypocontractive, "rho": d.rho, "sigma_max": d.sigma_max,
        "defect_index": d.defect_index, "indeterminate": d.indeterminate,
    }


def _hc_body(r):
    return {"exists": r.exists, "m": r.m_hc, "per_method": r.per_method,
            "witness": r.witness_vector, "kernel_dim": r.kernel_dim,
            "indeterminate": r.indeterminate, "candidates": r.candidates,
            "audit": _audit(r.tolerance_audit)}


def _dhc_body(r):
    return {"exists": r.exists, "m": r.m_dhc, "per_method": r.per_method,
            "witness": r.witness_vector, "power_gap": r.power_gap,
            "indeterminate": r.indeterminate, "candidates": r.candidates,
            "audit": _audit(r.tolerance_audit)}


def index_section(M, which, tol):
    if which == "hc":
        return _hc_body(hc_index(M, tol))
    if which == "shc":
        r = shifted_hc_index(M, tol)
        body = _hc_body(r.inner)
        body.update(m=r.m_shc, lambda_min=r.lambda_min_BH, criterion_exists=r.criterion_exists)
        return body
    if which == "dhc":
        return _dhc_body(dhc_index(M, tol))
    r = scaled_dhc_index(M, tol)
    body = _dhc_body(r.inner)
    body.update(m=r.m_dshc, sigma_max=r.sigma_max, criterion_exists=r.criterion_exists)
    return body


def _worst(codes):
    return max(codes, default=EXIT_OK)


def cmd_classify(mf, mode="both", tol=Tolerances()):
    body = {}
    if mode in ("continuous", "both"):
        body["continuous"] = continuous_section(mf.matrix, tol)
    if mode in ("discrete", "both"):
        body["discrete"] = discrete_section(mf.matrix, tol)
    code = EXIT_INDETERMINATE if any(s["indeterminate"] for s in body.values()) else EXIT_OK
    return CommandResult({"classification": body}, code)


def cmd_index(mf, which="all", tol=Tolerances()):
    """Index report. With ``which="all"`` a failed precondition of one index
    is recorded in its entry and does not change the exit code."""
    kinds = INDEX_KINDS if which == "all" else (which,)
    out, codes = {}, []
    for k in kinds:
        try:
            out[k] = index_section(mf.matrix, k, tol)
            codes.append(EXIT_INDETERMINATE if out[k]["indeterminate"] else EXIT_OK)
        except HypoIndexError as exc:
            out[k] = _error(exc)
            if which != "all" or exc.exit_code != EXIT_PRECONDITION:
                codes.append(exc.exit_code)
    return CommandResult({"indices": out}, _worst(codes))


def cmd_cayley(mf, direction="c2d", t=None, alpha=None, tol=Tolerances()):
    """Cayley image plus, when the input qualifies, the index-preservation check.

    Returns the report and the image as a :class:`MatrixFile`.
    """
    A = mf.matrix
    if direction == "c2d":
        res = cayley(A, tol) if t is None else scaled_cayley(A, t, tol)
    else:
        if t is not None:
            raise InputError("--t applies to the c2d direction only")
        res = inverse_cayley(A, 1.0 if alpha is None else alpha, tol)
    body = {"direction": direction, "t": t, "alpha": complex(res.shift_alpha),
            "image": res.image, "checks": res.checks}
    try:
        if direction == "c2d" and t is None:
            p = index_preservation_check(A, tol)
        elif direction == "d2c" and res.shift_alpha == 1.0:
            p = index_preservation_check_discrete(A, tol)
        else:
            p = None
        if p is not None:
            body["preservation"] = {"m_hc": p.m_hc, "m_dhc": p.m_dhc, "equal": p.equal}
    except HypoIndexError as exc:
        if exc.exit_code != EXIT_PRECONDITION:
            raise
    code = EXIT_OK
    if "preservation" in body and not body["preservation"]["equal"]:
        code = EXIT_CONSISTENCY
    suffix = "discrete" if direction == "c2d" else "continuous"
    image = MatrixFile(name=f"{mf.name}_{suffix}", matrix=res.image, kind_hint=suffix)
    return CommandResult({"cayley": body}, code), image


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "norm", "shifted_norm"])
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def cmd_decay(mf, mode="continuous", out_csv=None, tol=Tolerances(),
              window=DEFAULT_WINDOW, points=DEFAULT_POINTS):
    """Short-time exponent fit (continuous) or power-norm profile (discrete)."""
    M = mf.matrix
    if mode == "continuous":
        lam = float(np.linalg.eigvalsh(hermitian_split(M).H)[0])
        if lam >= -tol.tol_psd * max(np.linalg.norm(M, 2), 1e-300):
            m = hc_index(M, tol)
            if not m.exists:
                return CommandResult({"decay": {"mode": mode, **_error(
                    HypoIndexError("B has no finite hypocoercivity index; no algebraic decay law"))}},
                    EXIT_PRECONDITION)
            fit = short_time_exponent_fit(M, m.m_hc, tol, window, points)
        else:
            fit = shifted_decay_fit(M, tol, window, points)
        samples = propagator_norm_samples(M, fit.t_samples)
        rows = [(t, nrm, np.exp(lam * t) * nrm) for t, nrm in samples]
        ok = abs(fit.a_est - fit.a_expected) <= FIT_TOLERANCE
        body = {"mode": mode, "a_est": fit.a_est, "c_est": fit.c_est,
                "a_expected": fit.a_expected, "a_rounded": fit.a_rounded,
                "lambda_shift": fit.lambda_shift, "fit_window": list(fit.fit_window),
                "r_squared": fit.r_squared, "points": len(fit.t_samples),
                "tolerance": FIT_TOLERANCE, "pass": bool(ok)}
    else:
        rep = discrete_power_report(M, tol)
        prof = power_norm_profile(M, M.shape[0] + 1)
        rows = [(j, nrm, nrm / rep.sigma_max ** j) for j, nrm in prof]
        ok = rep.m_from_profile == rep.m_gram
        body = {"mode": mode, "profile": [nrm for _, nrm in rep.profile],
                "sigma_max": rep.sigma_max, "scaled": rep.scaled,
                "m_profile": rep.m_from_profile, "m_gram": rep.m_gram, "gap": rep.gap,
                "indeterminate": rep.indeterminate, "pass": bool(ok)}
    if out_csv is not None:
        _write_csv(out_csv, rows)
        body["csv"] = str(out_csv)
    return CommandResult({"decay": body}, EXIT_OK if ok else EXIT_CONSISTENCY)


def cmd_lyapunov(mf, kind="continuous", rhs=None, tol=Tolerances()):
    """Solve ``A^H P + P A = -Q`` or ``A^H P A - P = -Q`` (``Q = I`` by default).
    The continuous solve also reports the Cayley-mapped Stein residual."""
    A = mf.matrix
    Q = np.eye(A.shape[0]) if rhs is None else rhs
    if kind == "continuous":
        sol = solve_lyapunov_continuous(A, Q, tol)
    else:
        sol = solve_lyapunov_discrete(A, Q, tol)
    body = {"kind": kind, "P": sol.P, "residual": sol.residual,
            "positive_definite": sol.positive_definite, "condition": sol.condition}
    if kind == "continuous":
        try:
            m = lyapunov_cayley_map(A, Q, tol)
            body["cayley_map"] = {"Qd": m.Qd, "A_d": m.A_d, "residual_d": m.residual_d}
        except HypoIndexError as exc:
            body["cayley_map"] = _error(exc)
    return CommandResult({"lyapunov": body})


# ------------------------------------------------------------------ suite

def analyse_file(mf, tol=Tolerances()):
    """Full per-file pipeline used by ``suite``: classification, all four
    indices, the Cayley map matching ``kind_hint`` and, for discrete files,
    the power profile."""
    body = dict(cmd_classify(mf, "both", tol).body)
    body.update(cmd_index(mf, "all", tol).body)
    if mf.kind_hint:
        direction = "c2d" if mf.kind_hint == "continuous" else "d2c"
        try:
            body.update(cmd_cayley(mf, direction, tol=tol)[0].body)
        except HypoIndexError as exc:
            body["cayley"] = _error(exc)
    if mf.kind_hint == "discrete":
        try:
            body.update(cmd_decay(mf, "discrete", tol=tol).body)
        except HypoIndexError as exc:
            body["decay"] = _error(exc)
    return to_jsonable(body)


def _lookup(tree, dotted):
    node = tree
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise KeyError(dotted)
        node = node[part]
    return node


def _matches(got, want):
    if isinstance(want, bool) or want is None or isinstance(want, str):
        return got == want
    if isinstance(want, (int, float)):
        return (isinstance(got, (int, float)) and not isinstance(got, bool)
                and abs(got - want) <= EXPECT_ATOL * max(1.0, abs(want)))
    if isinstance(want, list):
        try:
            g = decode_matrix(got) if np.ndim(got) == 3 else np.asarray(got, dtype=float)
            w = decode_matrix(want) if np.ndim(want) == 3 else np.asarray(want, dtype=float)
        except (HypoIndexError, ValueError, TypeError):
            return False
        return g.shape == w.shape and bool(np.max(np.abs(g - w), initial=0.0) <= EXPECT_MATRIX_ATOL)
    return got == want


def check_expectations(report, expect):
    failures = []
    for key in sorted(expect):
        want = expect[key]
        try:
            got = _lookup(report, key)
        except KeyError:
            failures.append({"key": key, "expected": want, "got": "<missing>"})
            continue
        if not _matches(got, want):
            failures.append({"key": key, "expected": want, "got": got})
    return failures


def _suite_one(path, tol):
    entry = {"file": path.name}
    try:
        mf = load_matrix_file(path)
    except HypoIndexError as exc:
        entry.update(status="error", **_error(exc))
        return entry
    entry["input"] = _identity(mf)
    try:
        report = analyse_file(mf, tol)
    except HypoIndexError as exc:
        entry.update(status="error", **_error(exc))
        return entry
    failures = check_expectations(report, mf.expect)
    entry.update(report=report, expectations=len(mf.expect), failures=failures,
                 status="pass" if not failures else "fail")
    return entry


def cmd_suite(corpus_dir, tol=Tolerances(), jobs=1):
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise InputError(f"{corpus_dir}: not a directory")
    files = sorted(corpus_dir.glob("*.json"), key=lambda p: p.name)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        entries = list(pool.map(lambda p: _suite_one(p, tol), files))
    summary = [{"file": e["file"], "status": e["status"],
                "failed": [f["key"] for f in e.get("failures", [])]} for e in entries]
    codes = [EXIT_IO if e["status"] == "error" and e["exit_code"] == EXIT_IO else
             EXIT_CONSISTENCY if e["status"] != "pass" else EXIT_OK for e in entries]
    counts = {s: sum(1 for e in entries if e["status"] == s) for s in ("pass", "fail", "error")}
    return CommandResult({"suite": {"directory": str(corpus_dir), "files": entries,
                                    "summary": summary, "counts": counts}}, _worst(codes))


def shipped_corpus():
    return Path(__file__).with_name("corpus")


# -------------------------------------------------------------- plumbing

def _tolerances(args):
    tol = tolerances_from_env()
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise InputError(f"{args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(cfg, dict):
            raise InputError(f"{args.config}: expected a JSON object")
        if "profile" in cfg:
            if cfg["profile"] not in TOLERANCE_PRESETS:
                raise InputError(f"{args.config}: unknown profile {cfg['profile']!r}")
            tol = TOLERANCE_PRESETS[cfg["profile"]]
        unknown = set(cfg) - {"profile", "tol_rank", "tol_psd", "tol_sym", "tol_recon", "tol_unit"}
        if unknown:
            raise InputError(f"{args.config}: unknown keys {sorted(unknown)}")
        tol = tol.updated(**{k: v for k, v in cfg.items() if k != "profile"})
    return tol.updated(tol_rank=args.tol_rank, tol_psd=args.tol_psd, tol_sym=args.tol_sym,
                       tol_recon=args.tol_recon, tol_unit=args.tol_unit)


def _complex(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (np.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("tolerances and output")
    g.add_argument("--config", help="JSON file with tol_* keys and/or a 'profile' name")
    for name in ("tol-rank", "tol-psd", "tol-sym", "tol-recon", "tol-unit"):
        g.add_argument(f"--{name}", type=float, default=None, metavar="X")
    g.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
    g.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    g.add_argument("--negate", action="store_true", help="use the negated matrix")

    p = argparse.ArgumentParser(
        prog="hypoindex",
        description="Stability classes and hypocoercivity/hypocontractivity indices of matrices.",
        epilog="The tolerance preset is taken from HYPOINDEX_TOL_PROFILE "
               f"({', '.join(sorted(TOLERANCE_PRESETS))}).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="stability classification")
    s.add_argument("input")
    s.add_argument("--mode", choices=("continuous", "discrete", "both"), default="both")

    s = sub.add_parser("index", parents=[common], help="hc, shc, dhc and dshc indices")
    s.add_argument("input")
    s.add_argument("--which", choices=INDEX_KINDS + ("all",), default="all")

    s = sub.add_parser("cayley", parents=[common], help="(inverse) Cayley transform")
    s.add_argument("input")
    s.add_argument("--direction", choices=("c2d", "d2c"), default="c2d")
    s.add_argument("--t", type=_positive, default=None, help="time step of the scaled transform")
    s.add_argument("--alpha", type=_complex, default=None, help="unit-modulus shift, e.g. 1j")
    s.add_argument("-o", "--output", help="write the image as a matrix file")

    s = sub.add_parser("decay", parents=[common], help="short-time decay fit or power profile")
    s.add_argument("input")
    s.add_argument("--mode", choices=("continuous", "discrete"), default="continuous")
    s.add_argument("--csv", dest="out_csv", help="write samples (t,norm,shifted_norm)")
    s.add_argument("--window", type=_positive, nargs=2, default=DEFAULT_WINDOW, metavar=("T0", "T1"))
    s.add_argument("--points", type=int, default=DEFAULT_POINTS)

    s = sub.add_parser("lyapunov", parents=[common], help="Lyapunov or Stein equation")
    s.add_argument("input")
    s.add_argument("--kind", choices=("continuous", "discrete"), default="continuous")
    s.add_argument("--rhs", help="matrix file with the right-hand side (default: identity)")

    s = sub.add_parser("suite", parents=[common], help="run a corpus of matrix files")
    s.add_argument("corpus_dir", nargs="?", default=None,
                   help="directory of *.json matrix files (default: the shipped corpus)")
    s.add_argument("--jobs", type=int, default=1)
    return p


def _flatten(node, prefix=""):
    if isinstance(node, dict):
        for k in sorted(node):
            yield from _flatten(node[k], f"{prefix}.{k}" if prefix else k)
    else:
        yield prefix, node


def render(report, pretty=False):
    if not pretty:
        return json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"
    lines = []
    for key, val in _flatten(report):
        if ".audit" in key or key.startswith(("suite.files", "suite.summary")):
            continue
        lines.append(f"{key:<48} {json.dumps(val)}")
    for row in report.get("suite", {}).get("summary", []):
        failed = f"  failed: {', '.join(row['failed'])}" if row["failed"] else ""
        lines.append(f"{row['status']:<6} {row['file']}{failed}")
    return "\n".join(lines) + "\n"


def _run(args):
    tol = _tolerances(args)
    if args.command == "suite":
        root = Path(args.corpus_dir) if args.corpus_dir else shipped_corpus()
        return cmd_suite(root, tol, args.jobs), None, None
    mf = load_matrix_file(args.input)
    if args.negate:
        mf = MatrixFile(mf.name, -mf.matrix, mf.kind_hint, mf.expect)
    identity = _identity(mf)
    if args.command == "classify":
        return cmd_classify(mf, args.mode, tol), identity, None
    if args.command == "index":
        return cmd_index(mf, args.which, tol), identity, None
    if args.command == "cayley":
        res, image = cmd_cayley(mf, args.direction, args.t, args.alpha, tol)
        if args.output:
            dump_matrix_file(image, args.output)
            res.body["cayley"]["output"] = args.output
        return res, identity, image
    if args.command == "decay":
        res = cmd_decay(mf, args.mode, args.out_csv, tol, tuple(args.window), args.points)
        return res, identity, None
    rhs = None if args.rhs is None else load_matrix_file(args.rhs).matrix
    return cmd_lyapunov(mf, args.kind, rhs, tol), identity, None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    report = {"schema_version": SCHEMA_VERSION, "command": args.command,
              "version": __version__}
    try:
        report["tolerances"] = _tolerances(args).as_dict()
        res, identity, _ = _run(args)
        report.update(res.body)
        if identity is not None:
            report["input"] = identity
            report["tolerances"] = _tolerances(args).as_dict(identity["n"])
        code = res.code
    except HypoIndexError as exc:
        report.update(status="error", **_error(exc))
        code = exc.exit_code
    report.setdefault("status", "ok" if code == EXIT_OK else "failed")
    report["exit_code"] = code
    report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = render(to_jsonable(report), args.pretty)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    if code != EXIT_OK and "error" in report:
        print(f"hypoindex: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
