"""``heisenberg-wave`` command line.

Each subcommand prints a JSON envelope ``{tool_version, config_hash, results}``
(or CSV with ``--format csv``) and a verdict table on stderr.  Exit status:
0 when every verdict passes, 1 when some verdict fails, 2 for usage errors and
3 when a numerical routine gives up.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import hashlib
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .besov import BesovSpec, as_symbol, besov_norm, parse_exponent, strichartz_admissible
from .errors import HeisenbergWaveError
from .littlewood_paley import DyadicProfile, OperatorTag, kernel, lp_symbol, natural_grids
from .propagator import SCHRODINGER, WAVE, halfwave_on_kernel, propagated_symbol, schrodinger_on_kernel
from .spectral_core import GroupParams, RadialFunction, evaluate
from . import verifier

EXIT_OK, EXIT_VERDICT, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

# claim-ids the verifier can emit; tolerance overrides must match one of these
CLAIM_PATTERNS = [re.compile(p) for p in (
    r"dispersive\.t_slope\[j=-?\d+\]",
    r"dispersive\.j_exponent\[j(>=0|<0)\]",
    r"schrodinger\.t_slope\[j=-?\d+\]",
    r"schrodinger\.j_exponent\[j>=0\]",
    r"sharpness\.t_slope\[v_0\]",
    r"sharpness\.j_exponent\[j(>=0|<0)\]",
    r"sharpness\.minus_branch_slope\[v_0\]",
    r"sharpness\.vj_besov_uniform",
    r"counterexample\.j_exponent\[j(>=0|<0)\]",
    r"counterexample\.window_gap",
    r"counterexample\.dilation_identity",
    r"(vj|wj)\.lower_below_value",
    r"consistency\.lower_le_upper",
    r"strichartz\.growth_under_doubling",
)]


def known_claim(claim_id: str) -> bool:
    base = claim_id[: -len(".r_squared")] if claim_id.endswith(".r_squared") else claim_id
    return any(p.fullmatch(base) for p in CLAIM_PATTERNS)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Settings shared by all subcommands; loaded from JSON with ``--config``."""

    n: int = 1
    transition_sharpness: float = 1.0
    tolerances: dict = field(default_factory=dict)
    j_list: list | None = None
    t_window: list | None = None
    r_max: float | None = None
    sigma_max: float | None = None
    output_path: str | None = None
    output_format: str = "json"

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise UsageError(f"n must be a positive integer, got {self.n!r}")
        for claim, interval in self.tolerances.items():
            if not known_claim(claim):
                raise UsageError(f"unknown claim-id in tolerances: {claim!r}")
            if len(interval) != 2:
                raise UsageError(f"tolerance for {claim!r} must be [lo, hi]")
        if self.j_list is not None and any(abs(int(j)) > 6 for j in self.j_list):
            raise UsageError("j_list must lie in [-6, 6]")
        if self.t_window is not None and (len(self.t_window) != 2 or not 0 < self.t_window[0] < self.t_window[1]):
            raise UsageError("t_window must be [t_min, t_max] with 0 < t_min < t_max")
        if self.output_format not in ("json", "csv"):
            raise UsageError("output format must be json or csv")

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        raw = json.loads(text)
        grids = raw.get("grids", {})
        output = raw.get("output", {})
        unknown = set(raw) - {"n", "transition_sharpness", "tolerances", "grids", "output"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(n=raw.get("n", 1), transition_sharpness=raw.get("transition_sharpness", 1.0),
                   tolerances=raw.get("tolerances", {}), j_list=grids.get("j_list"),
                   t_window=grids.get("t_window"), r_max=grids.get("r_max"), sigma_max=grids.get("sigma_max"),
                   output_path=output.get("path"), output_format=output.get("format", "json"))

    def digest(self, seed: int) -> str:
        payload = json.dumps({"config": dataclasses.asdict(self), "seed": seed}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @property
    def params(self) -> GroupParams:
        return GroupParams(self.n)

    @property
    def profile(self) -> DyadicProfile:
        return DyadicProfile(self.transition_sharpness)


# ---------------------------------------------------------------------------
# argument types


def _exponent(text: str):
    try:
        return parse_exponent(text)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _real(text: str) -> float:
    """Besov exponents: 'inf', 'a/b' or a decimal."""
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in re.split(r"[,\s]+", text.strip()) if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _n_from_N(N: int | None, cfg: RunConfig) -> GroupParams:
    if N is None:
        return cfg.params
    if N < 4 or N % 2:
        raise UsageError(f"homogeneous dimension N = 2n + 2 must be even and >= 4, got {N}")
    return GroupParams(N // 2 - 1)


# ---------------------------------------------------------------------------
# JSON helpers


def _plain(obj, timings: bool):
    """Recursively turn results into JSON-ready values; runtimes only with ``timings``."""
    if isinstance(obj, dict):
        return {str(k): _plain(v, timings) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))
                if timings or k not in ("runtime",)}
    if isinstance(obj, (list, tuple)):
        return [_plain(v, timings) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _plain(obj.to_dict() if hasattr(obj, "to_dict") else dataclasses.asdict(obj), timings)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return None if math.isnan(x) else x
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _apply_tolerances(verdicts: list, cfg: RunConfig) -> list:
    out = []
    for v in verdicts:
        if v.claim_id in cfg.tolerances:
            lo, hi = (float(x) for x in cfg.tolerances[v.claim_id])
            v = verifier.Verdict.judge(v.claim_id, (lo, hi), v.observed, v.runtime, **v.details)
        out.append(v)
    return out


def _verdict_table(verdicts: list) -> str:
    lines = [f"{'claim':<44} {'observed':>12} {'expected':>24}  result"]
    for v in verdicts:
        lo, hi = v.expected
        lines.append(f"{v.claim_id:<44} {v.observed:>12.5g} {f'[{lo:.4g}, {hi:.4g}]':>24}  "
                     f"{'pass' if v.passed else 'FAIL'}")
    return "\n".join(lines)


def _csv_text(payload: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    results = payload["results"]
    verdicts = [v for r in results for v in r.get("verdicts", [])]
    cells = [c for r in results for c in r.get("cells", []) if isinstance(c, dict) and "t" in c]
    points = [(g, v) for r in results if "values" in r for g, v in zip(r["grid"], r["values"])]
    if points:
        writer.writerow(["r", "sigma", "re", "im"])
        for (r_, s_), (re_, im_) in points:
            writer.writerow([r_, s_, re_, im_])
    elif cells:
        writer.writerow(["t", "j", "sup_value"])
        for c in cells:
            writer.writerow([c["t"], c["j"], c["value"]])
    elif verdicts:
        writer.writerow(["claim_id", "expected_lo", "expected_hi", "observed", "pass"])
        for v in verdicts:
            writer.writerow([v["claim_id"], v["expected"][0], v["expected"][1], v["observed"], v["passed"]])
    else:
        writer.writerow(["key", "value"])
        for r in results:
            for k, v in r.items():
                if not isinstance(v, (dict, list)):
                    writer.writerow([k, v])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands; each returns (result dict, verdict list)


def cmd_kernel(args, cfg: RunConfig):
    params = _n_from_N(args.N, cfg)
    r_extent = args.r_extent or cfg.r_max or 64.0
    r, wr, s, ws = natural_grids(OperatorTag.parse(args.tag), args.j, params, r_extent=r_extent)
    k = kernel(args.tag, args.j, cfg.profile, params, r, s, r_weights=wr, s_weights=ws)
    space = k.space
    store = Path(args.store)
    np.savez(store, r_grid=space.r_grid, s_grid=space.s_grid, samples=space.samples,
             r_weights=space.r_weights, s_weights=space.s_weights, n=params.n,
             meta=json.dumps(space.meta, sort_keys=True))
    return {"command": "kernel", "tag": k.tag.value, "j": args.j, "N": params.N, "grid": list(space.samples.shape),
            "l1_norm": space.norm(1.0), "l2_norm": space.norm(2.0), "sup": space.norm(math.inf),
            "store": str(store)}, []


def _load_store(path: str) -> RadialFunction:
    try:
        data = np.load(path)
    except FileNotFoundError:
        raise UsageError(f"no stored function at {path}; run the kernel subcommand first") from None
    return RadialFunction(GroupParams(int(data["n"])), data["r_grid"], data["s_grid"], data["samples"],
                          data["r_weights"], data["s_weights"], json.loads(str(data["meta"])))


def cmd_besov(args, cfg: RunConfig):
    u = _load_store(args.store)
    spec = BesovSpec(OperatorTag.parse(args.tag), args.rho, args.q, args.r)
    value = besov_norm(as_symbol(u), spec, tuple(args.window), profile=cfg.profile)
    stored = u.norm(2.0)
    return {"command": "besov", "tag": spec.tag.value, "rho": args.rho, "q": args.q, "r": args.r, "norm": value,
            "stored_l2_norm": stored, "ratio_to_l2": value / stored if stored else None}, []


def cmd_admissible(args, cfg: RunConfig):
    params = _n_from_N(args.N, cfg)
    window = strichartz_admissible(args.p, args.r, params, args.which)
    out = {"command": "admissible", "N": params.N, "which": args.which}
    out.update(window.to_dict())
    return out, []


def cmd_propagate(args, cfg: RunConfig):
    params = _n_from_N(args.N, cfg)
    sigmas = np.asarray(args.sigma, dtype=float)
    grid = [[float(args.r), float(s)] for s in sigmas]
    if args.route == "mode":
        if args.kind == "cos":
            raise UsageError("the mode route covers the wave and schrodinger kinds")
        fn = halfwave_on_kernel if args.kind == WAVE else schrodinger_on_kernel
        values = [fn(args.j, args.t, args.r, float(s), params, cfg.profile, args.tol) for s in sigmas]
    else:
        base = lp_symbol(OperatorTag.FULL, args.j, cfg.profile, params)
        sym = propagated_symbol(base, args.t, args.kind)
        values = list(evaluate(sym, np.full_like(sigmas, args.r), sigmas * args.t))
    return {"command": "propagate", "j": args.j, "t": args.t, "kind": args.kind, "route": args.route,
            "grid": grid, "values": [[complex(v).real, complex(v).imag] for v in values]}, []


def _times(args, cfg: RunConfig, default: tuple[float, float]):
    lo, hi = (args.t_min, args.t_max)
    if lo is None or hi is None:
        lo, hi = cfg.t_window or default
    return verifier.log_grid(lo, hi, args.per_decade)


def _js(args, cfg: RunConfig, default) -> list[int]:
    js = args.j_list if args.j_list is not None else (cfg.j_list if cfg.j_list is not None else default)
    if any(abs(j) > 6 for j in js):
        raise UsageError("j values must lie in [-6, 6]")
    return list(js)


def _scan_out(name: str, result: verifier.ScanResult):
    out = result.to_dict()
    out["command"] = name
    return out, result.verdicts


def cmd_dispersive(args, cfg: RunConfig):
    params = _n_from_N(args.N, cfg)
    rho = args.rho if args.rho is not None else params.N - 1.5
    result = verifier.dispersive_scan(_js(args, cfg, range(-2, 5)), _times(args, cfg, (10.0, 1000.0)), rho, params,
                                      args.budget, profile=cfg.profile)
    return _scan_out("dispersive-scan", result)


def cmd_schrodinger(args, cfg: RunConfig):
    params = _n_from_N(args.N, cfg)
    result = verifier.schrodinger_scan(_js(args, cfg, (0, 1, 2)), _times(args, cfg, (10.0, 1000.0)), params,
                                       args.budget, profile=cfg.profile)
    return _scan_out("schrodinger", result)


def cmd_sharpness(args, cfg: RunConfig):
    params = _n_from_N(args.N, cfg)
    result = verifier.sharpness_vj(_js(args, cfg, (-3, -2, -1, 0, 4, 5, 6, 7)), _times(args, cfg, (1.0, 10.0)),
                                   params, cfg.profile, budget=args.budget)
    out, verdicts = _scan_out("sharpness", result)
    if args.guard:
        verdicts = verdicts + [verifier.consistency_guard(result, params, cfg.profile)]
        out["verdicts"] = [v.to_dict() for v in verdicts]
    return out, verdicts


def cmd_counterexample(args, cfg: RunConfig):
    params = _n_from_N(args.N, cfg)
    result = verifier.counterexample_wj(_js(args, cfg, (-3, -2, -1, 0, 4, 5, 6, 7)),
                                        _times(args, cfg, (1.0, 10.0)), params, cfg.profile, budget=args.budget)
    return _scan_out("counterexample", result)


def cmd_strichartz(args, cfg: RunConfig):
    params = _n_from_N(args.N, cfg)
    u0 = lp_symbol(OperatorTag.FULL, 0, cfg.profile, params)
    if args.u0 == "psi0+psi2":
        u0 = u0.add(lp_symbol(OperatorTag.FULL, 2, cfg.profile, params))
    v = verifier.strichartz_spot_check(args.p, args.r, args.rho, u0, args.T, params, cfg.profile, which=args.which,
                                       nodes=args.nodes)
    return {"command": "strichartz", "p": str(args.p), "r": str(args.r), "rho": args.rho, "u0": args.u0,
            "verdicts": [v.to_dict()]}, [v]


def cmd_report(args, cfg: RunConfig):
    verdicts = []
    for path in args.files:
        try:
            payload = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {path}: {exc}") from None
        for result in payload.get("results", []):
            for d in result.get("verdicts", []):
                lo, hi = (float(x) for x in d["expected"])
                verdicts.append(verifier.Verdict.judge(d["claim_id"], (lo, hi), float(d["observed"])))
    return {"command": "report", "files": list(args.files), "verdicts": [v.to_dict() for v in verdicts],
            "passed": sum(v.passed for v in verdicts), "failed": sum(not v.passed for v in verdicts)}, verdicts


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with a RunConfig")
    common.add_argument("--seed", type=int, default=0, help="seed for every random sample (default 0)")
    common.add_argument("--threads", type=int, help="cap on worker threads used by the compiled kernels")
    common.add_argument("--format", choices=("json", "csv"), help="output format (default json)")
    common.add_argument("--output", help="write the output here instead of stdout")
    common.add_argument("--timings", action="store_true",
                        help="include wall-clock runtimes (the output is then no longer reproducible byte for byte)")
    common.add_argument("--N", type=int, help="homogeneous dimension 2n+2 (default from the config, 4)")

    parser = argparse.ArgumentParser(prog="heisenberg-wave",
                                     description="Numerical experiments for wave propagators on the Heisenberg group.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, fn, help_text, description):
        p = sub.add_parser(name, parents=[common], help=help_text, description=description)
        p.set_defaults(func=fn)
        return p

    p = add("kernel", cmd_kernel, "materialize a Littlewood-Paley kernel",
            "Builds the dyadic kernel (Kohn scale: phi_j, full scale: psi_j) on its natural grid by inverse "
            "transform, stores it for the besov subcommand and reports its L1, L2 and sup norms. Exercises the "
            "kernel estimates and the homogeneity of the Kohn-scale kernels.")
    p.add_argument("--tag", choices=("kohn", "full"), default="full")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--r-extent", type=float, help="radial extent in units of 2^-j (default 64)")
    p.add_argument("--store", default="heisenberg_kernel.npz")

    p = add("besov", cmd_besov, "Besov norm of a stored function",
            "Computes the l^q sum of 2^(k rho) ||Delta_k u||_{L^r} for the function stored by `kernel`. With "
            "rho = 0 and q = r = 2 this reproduces the L2 norm up to the equivalence constants of the two scales.")
    p.add_argument("--store", default="heisenberg_kernel.npz")
    p.add_argument("--tag", choices=("kohn", "full"), default="full", help="which dyadic decomposition")
    p.add_argument("--rho", type=_real, required=True)
    p.add_argument("--q", type=_real, required=True, help="dyadic summability exponent")
    p.add_argument("--r", type=_real, required=True, help="Lebesgue exponent of the blocks")
    p.add_argument("--window", type=int, nargs=2, default=(-8, 8), metavar=("LO", "HI"))

    p = add("admissible", cmd_admissible, "check a Strichartz exponent pair",
            "Exact rational check of the Strichartz exponent constraints and the regularity window for rho. "
            "Exponents are integers, 'a/b' fractions or 'inf'; decimals are refused because region boundaries "
            "must be decided exactly.")
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--r", type=_exponent, required=True)
    p.add_argument("--which", choices=verifier_which(), default="Thm1.2-b",
                   help="Thm1.2-b / Thm1.2-c: sharp admissible line with the two rho windows; "
                        "Cor1.3: the region obtained by Sobolev embedding")

    p = add("propagate", cmd_propagate, "evaluate a propagated kernel",
            "Evaluates e^{-it sqrt(L)} psi_j (wave), cos(t sqrt(L)) psi_j (cos) or e^{-itL} psi_j (schrodinger) "
            "at |z| = r, s = sigma t, either by the per-mode oscillatory-integral sum or directly on a frequency "
            "grid. The two routes are independent and should agree.")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--sigma", type=float, nargs="+", default=[0.0])
    p.add_argument("--kind", choices=(WAVE, "cos", SCHRODINGER), default=WAVE)
    p.add_argument("--route", choices=("grid", "mode"), default="grid")
    p.add_argument("--tol", type=float, default=1e-6)

    def scan_opts(p, budget=True):
        p.add_argument("--j-list", type=_int_list, help="comma-separated j values")
        p.add_argument("--t-min", type=float)
        p.add_argument("--t-max", type=float)
        p.add_argument("--per-decade", type=int, default=12)
        if budget:
            p.add_argument("--budget", type=float, help="wall-clock budget in seconds")

    p = add("dispersive-scan", cmd_dispersive, "t- and j-exponents of the half-wave sup norm",
            "Sup over (r, sigma) of |e^{-it sqrt(L)} psi_j(r, sigma t)|. Checks the t^{-1/2} decay for each j and "
            "fits the t-normalized sup against 2^j: exponent N - 3/2 for j >= 0 and N - 1/2 for j < 0, the two ends "
            "of the admissible loss window.")
    scan_opts(p)
    p.add_argument("--rho", type=float, help="loss used for the reported uniformity ratio (default N - 3/2)")

    p = add("sharpness", cmd_sharpness, "lower bounds showing the dispersive estimate is sharp",
            "Evaluates cos(t sqrt(L)) v_j at the stationary point of the m = 0 bump beyond the stationary-phase "
            "threshold: t^{-1/2} decay, j-exponents N - n - 1/2 (j >= 0) and N - 1/2 (j < 0), faster decay of the "
            "non-stationary branch, and (with --guard) lower bound <= an independent upper scan.")
    scan_opts(p)
    p.add_argument("--no-guard", dest="guard", action="store_false", help="skip the lower/upper consistency guard")
    p.set_defaults(per_decade=4)

    p = add("counterexample", cmd_counterexample, "Kohn-scale bumps that rule out a Kohn-scale estimate",
            "Same experiment with the bumps w_j localized by the Kohn sub-Laplacian: the j-exponents N + 1 (j >= 0) "
            "and N - 1/2 (j < 0) leave no common loss rho, which the window-gap verdict certifies.")
    scan_opts(p)
    p.set_defaults(per_decade=4)

    p = add("schrodinger", cmd_schrodinger, "dispersion of the Schrodinger group",
            "Sup of |e^{-itL} psi_j|: t^{-1/2} decay and j-exponent N - 2.")
    scan_opts(p)
    p.set_defaults(per_decade=4)

    p = add("strichartz", cmd_strichartz, "boundedness proxy for the homogeneous Strichartz estimate",
            "Computes the L^p-in-time Besov norm of e^{-it sqrt(L)} u0 over [0, T] and [0, 2T]; a globally bounded "
            "norm grows by less than 5% on doubling. (p, r, rho) must be admissible.")
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--r", type=_exponent, required=True)
    p.add_argument("--rho", type=_real, required=True)
    p.add_argument("--T", type=float, default=4.0)
    p.add_argument("--u0", choices=("psi0", "psi0+psi2"), default="psi0")
    p.add_argument("--which", choices=verifier_which(), default="Thm1.2-c")
    p.add_argument("--nodes", type=int, default=6, help="Gauss-Legendre nodes in t")

    p = add("report", cmd_report, "aggregate verdicts from earlier JSON outputs",
            "Reads JSON envelopes written by the other subcommands and re-judges every verdict in them.")
    p.add_argument("files", nargs="+")
    return parser


def verifier_which():
    from .besov import WHICH
    return WHICH


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = RunConfig.from_json(Path(args.config).read_text()) if args.config else RunConfig()
    except (OSError, json.JSONDecodeError, UsageError, TypeError) as exc:
        print(f"heisenberg-wave: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    np.random.seed(args.seed)
    if args.threads:
        import numba
        numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
    try:
        result, verdicts = args.func(args, cfg)
    except UsageError as exc:
        print(f"heisenberg-wave: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HeisenbergWaveError as exc:
        claim = exc.claim_id or args.command
        print(f"heisenberg-wave: numerical failure [{claim}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    verdicts = _apply_tolerances(verdicts, cfg)
    if verdicts:
        result["verdicts"] = [v.to_dict() for v in verdicts]
        print(_verdict_table(verdicts), file=sys.stderr)
    payload = {"tool_version": __version__, "config_hash": cfg.digest(args.seed),
               "results": [_plain(result, args.timings)]}
    fmt = args.format or cfg.output_format
    text = _csv_text(payload) if fmt == "csv" else json.dumps(payload, indent=2, sort_keys=True) + "\n"
    _emit(text, args.output or cfg.output_path)
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
