"""Command-line entry point: ``kink-collide <command> [options]``.

Exit codes: 0 when every check passes, 1 when a check or computation fails,
2 for usage errors.  Tables go to stdout as CSV (RFC 4180) or JSON (sorted
keys); with ``--output-dir`` they are also written to files there.
"""

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import ansatz as az
from . import checks
from . import evolution as ev
from . import linearized_operator as lo
from . import modulation as md
from . import profiles as pr
from . import series_algebra as sa
from . import studies as st
from .errors import AlgebraError, InvalidArgument, KinkCollideError

CONFIG_SCHEMA_VERSION = 1
THREADS_ENV = "KINK_COLLIDE_THREADS"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- configuration -------------------------------------------------------------

@dataclass
class RunConfig:
    command: str = ""
    v_list: tuple = (0.1, 0.05, 0.025)
    order: int = 2
    grid: tuple = (8192, 120.0)  # (N, L_dom) of the ansatz grid [-L_dom, L_dom]
    time: tuple = (md.T_SPAN, md.DEFAULT_SAMPLES)  # (T_max in units of 1/(s v), samples)
    tolerances: dict = field(default_factory=dict)
    output_dir: str | None = None
    format: str = "csv"

    def validate(self):
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if any(not v > 0 for v in self.v_list) or any(not v < 1 for v in self.v_list):
            raise UsageError("speeds must lie in (0, 1)")
        if self.order < 2:
            raise UsageError("order must be at least 2")
        if self.grid[0] <= 0 or self.grid[1] <= 0 or self.time[0] <= 0 or self.time[1] <= 0:
            raise UsageError("grid and time parameters must be positive")
        if int(self.time[1]) % 2 == 0:
            raise UsageError("the number of time samples must be odd")
        if abs(self.time[0] - md.T_SPAN) > 1e-12:
            raise UsageError(f"only the default modulation horizon T_max = {md.T_SPAN}/(s v) is supported")
        return self

    @property
    def x_grid(self):
        N, L = self.grid
        return (-float(L), float(L), int(N))

    @property
    def samples(self):
        return int(self.time[1])

    def to_dict(self):
        d = asdict(self)
        d["schema_version"] = CONFIG_SCHEMA_VERSION
        d["v_list"], d["grid"], d["time"] = list(self.v_list), list(self.grid), list(self.time)
        return d


def load_config(path):
    """RunConfig from a JSON file carrying ``schema_version``."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if data.get("schema_version") != CONFIG_SCHEMA_VERSION:
        raise UsageError(f"unsupported config schema version {data.get('schema_version')!r}")
    known = {f for f in RunConfig.__dataclass_fields__}
    unknown = set(data) - known - {"schema_version"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg = RunConfig()
    kw = {k: data[k] for k in known if k in data}
    for key in ("v_list", "grid", "time"):
        if key in kw:
            kw[key] = tuple(kw[key])
    return replace(cfg, **kw)


def build_config(args):
    """Config file values overridden by explicitly given flags."""
    cfg = load_config(args.config) if args.config else RunConfig()
    over = {"command": args.command}
    if getattr(args, "v", None) is not None:
        over["v_list"] = tuple(args.v)
    if getattr(args, "order", None) is not None:
        over["order"] = args.order
    if args.grid is not None:
        over["grid"] = tuple(args.grid)
    if args.samples is not None:
        over["time"] = (cfg.time[0], args.samples)
    if args.output_dir is not None:
        over["output_dir"] = args.output_dir
    if args.format is not None:
        over["format"] = args.format
    return replace(cfg, **over).validate()


def thread_cap(n_tasks):
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        cap = os.cpu_count() or 1
    else:
        try:
            cap = int(raw)
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
        if cap < 1:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return max(1, min(cap, n_tasks))


# -- output ----------------------------------------------------------------

def _plain(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _cell(x):
    x = _plain(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return str(x)


def render_csv(rows, columns=None):
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def render_json(obj):
    return json.dumps(_plain(obj), sort_keys=True, ensure_ascii=False, indent=2, allow_nan=True) + "\n"


def emit(cfg, name, rows, columns=None, extra=None, stream=None):
    """Write a table to stdout and, with an output directory, to ``name``.csv/json."""
    stream = stream or sys.stdout
    if cfg.format == "csv":
        text = render_csv(rows, columns)
    else:
        body = {"rows": rows}
        if extra:
            body.update(extra)
        text = render_json(body)
    stream.write(text)
    if cfg.output_dir:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"{name}.{cfg.format}", "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _floats(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _grid_pair(text):
    vals = _floats(text)
    if len(vals) != 2 or vals[0] != int(vals[0]):
        raise argparse.ArgumentTypeError(f"expected N,L with integer N, got {text!r}")
    return (int(vals[0]), vals[1])


# -- commands ----------------------------------------------------------------

def run_check_identities(cfg, k1_offset=0.0):
    """Identity table (identity, residual, tolerance, pass) and the exit code."""
    k1 = pr.compute_k1() + k1_offset if k1_offset else None
    rows = checks.all_identities(k1)
    table = [{k: r[k] for k in ("identity", "residual", "tolerance", "pass")} for r in rows]
    emit(cfg, "identities", table, ["identity", "residual", "tolerance", "pass"])
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAIL


def _describe(el):
    parts = []
    for n in el.powers:
        exps = el.exponents(n)
        if not exps:
            continue
        e = exps[0]
        var = "e^{sx}" if el.side == "plus" else "e^{-sx}"
        parts.append(f"x^{n}: {el.coef(e, n):.6g} {var}^{e} + ...")
    return "; ".join(parts) or "0"


_PRESETS = {
    "pair": lambda: (sa.kink_derivative(), sa.PolyExpElement.from_expr(sa.parse_expr("H(-x)**2"), "minus")),
}


def cmd_separate(cfg, args):
    if args.preset == "l1":
        terms = sa.potential_cross_terms(*sa.interaction_terms_kinks(), 1)
        res = sa.decompose_interaction(terms, M=args.M)
        sup = lambda z: sa.sup_remainder_terms(terms, res, z)
    else:
        if args.preset:
            f, g = _PRESETS[args.preset]()
        else:
            if not (args.f and args.g):
                raise UsageError("separate needs --f and --g, or --preset")
            f = sa.PolyExpElement.from_expr(sa.parse_expr(args.f), "plus")
            g = sa.PolyExpElement.from_expr(sa.parse_expr(args.g), "minus")
        res = sa.separate(f, g, M=args.M)
        sup = lambda z: float(sa.certify_remainder(f, g, res, (z,))[0])
    rows = []
    for p in res.pairs:
        rows.append({"kind": "term", "d": p.d, "frame": p.attach, "zeta_power": p.zeta_power,
                     "coef": p.coef, "h": _describe(p.h)})
    zetas = sorted(args.zeta)
    dM = res.remainder_exponent
    sups = [sup(z) for z in zetas]
    ok = True
    for i, (z, s) in enumerate(zip(zetas, sups)):
        r = {"kind": "remainder", "d": dM, "zeta": z, "sup_remainder": s}
        if i:
            ratio = sups[i - 1] / s if s > 0 else float("inf")
            pred = float(np.exp(pr.SQRT2 * dM * (z - zetas[i - 1])))
            r.update(ratio=ratio, predicted_ratio=pred, tolerance_factor=2.0,
                     **{"pass": bool(0.5 <= ratio / pred <= 2.0)})
            ok = ok and r["pass"]
        rows.append(r)
    cols = ["kind", "d", "frame", "zeta_power", "coef", "h", "zeta", "sup_remainder", "ratio",
            "predicted_ratio", "tolerance_factor", "pass"]
    emit(cfg, "separation", rows, cols)
    return EXIT_OK if ok else EXIT_FAIL


def _read_rhs(text):
    path = Path(text)
    if path.suffix == ".csv" and path.exists():
        data = np.genfromtxt(path, delimiter=",", names=True)
        if data.dtype.names is None or len(data.dtype.names) < 2:
            raise UsageError("rhs file needs two columns (x, g) with a header")
        x, g = data[data.dtype.names[0]], data[data.dtype.names[1]]
        from scipy.interpolate import CubicSpline
        spl = CubicSpline(x, g)
        return lambda y: np.where((y >= x[0]) & (y <= x[-1]), spl(np.clip(y, x[0], x[-1])), 0.0)
    if path.exists():
        text = path.read_text(encoding="utf-8")
    return sa.parse_expr(text)


def cmd_invert_l(cfg, args):
    N, L = args.grid or (6001, 60.0)
    grid = lo.OperatorGrid(-L, L, int(N), order=args.stencil)
    g = _read_rhs(args.rhs)(grid.x)
    res = grid.invert(g)
    gp, _ = grid.project(g)
    resid = grid.apply(res.values) - gp - res.multiplier * grid.unit_kink
    rows = [{"x": x, "u": u, "residual": r} for x, u, r in zip(grid.x, res.values, resid)]
    emit(cfg, "invert_l", rows, ["x", "u", "residual"],
         {"multiplier": res.multiplier, "removed_kernel_component": res.removed})
    return EXIT_OK


def _build(cfg, v, order):
    return az.build_ansatz(v, order, cfg.samples, az.CORRECTION_SAMPLES, cfg.x_grid)


def cmd_modulate(cfg, args):
    v = _single_v(cfg)
    spec = _build(cfg, v, cfg.order)
    sol = spec.modulations[-1]
    F = sol.forcing if sol.forcing is not None else np.full_like(sol.t_grid, np.nan)
    rows = [{"t": t, "r": r, "rdot": a, "rddot": b, "F": f}
            for t, r, a, b, f in zip(sol.t_grid, sol.r, sol.rd, sol.rdd, F)]
    extra = {"v": v, "order": sol.k, "limit_r": sol.limit_r, "sup_abs": sol.sup_abs,
             "evenness": sol.evenness(), "ode_residual": sol.ode_residual()}
    emit(cfg, f"modulation_k{sol.k}", rows, ["t", "r", "rdot", "rddot", "F"], extra)
    return EXIT_OK


def _single_v(cfg):
    if len(cfg.v_list) != 1:
        raise UsageError("this command takes a single speed --v")
    return float(cfg.v_list[0])


def cmd_build_ansatz(cfg, args):
    v = _single_v(cfg)
    spec = _build(cfg, v, cfg.order)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(spec.dumps(), encoding="utf-8")
    e_v, e_vk, e_r = az.compute_time_shift(spec)
    rows = [{"v": v, "order": spec.k, "time_shift": e_v, "asymptotic_offset": e_vk, "offset_correction": e_r,
             "spec": str(out)}]
    emit(cfg, "build_ansatz", rows)
    return EXIT_OK


def _load_spec(path):
    try:
        return az.AnsatzSpec.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read spec {path}: {exc}") from exc
    except (KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed spec {path}: {exc}") from exc


def _norm_name(s):
    return {0.0: "L2", 1.0: "H1"}.get(s, f"H{s:g}")


def cmd_residual_scan(cfg, args):
    spec = _load_spec(args.spec)
    s_values = args.s
    rows = []
    for t in args.times:
        norms = st.residual_norms(spec, t, s_values)
        r = {"t": t}
        r.update({_norm_name(s): n for s, n in zip(s_values, norms)})
        r["projection"] = az.kink_projection(spec, t)
        rows.append(r)
    emit(cfg, "residual_scan", rows, ["t"] + [_norm_name(s) for s in s_values] + ["projection"],
         {"v": spec.v, "order": spec.k})
    return EXIT_OK


def _study_task(args):
    v, order, samples, x_grid = args
    return st.study_point(v, order, samples, az.CORRECTION_SAMPLES, x_grid)


def run_scaling_study(cfg):
    """Per-speed builds (in parallel), slope fits and windows; returns (reports, points)."""
    vs = [float(v) for v in cfg.v_list]
    if len(vs) < 3:
        raise UsageError("a scaling study needs at least 3 speeds")
    if any(b >= a for a, b in zip(vs, vs[1:])):
        raise UsageError("speeds must be strictly decreasing")
    tasks = [(v, cfg.order, cfg.samples, cfg.x_grid) for v in vs]
    workers = thread_cap(len(tasks))
    if workers == 1:
        points = [_study_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_study_task, tasks))
    for p in points:
        if "error" in p:
            print(f"speed {p['v']}: build failed: {p['error']}", file=sys.stderr)
    windows = {k: tuple(v) for k, v in cfg.tolerances.get("windows", {}).items()}
    gap = cfg.tolerances.get("gap_threshold", st.GAP_THRESHOLD)
    return st.scaling_reports(points, cfg.order, windows, gap), points


def cmd_scaling_study(cfg, args):
    reports, points = run_scaling_study(cfg)
    rows = []
    for r in reports:
        lo_, hi_ = r.window if r.window else (None, None)
        rows.append({"quantity": r.quantity, "slope": r.slope, "window_lo": lo_, "window_hi": hi_,
                     "pairs": " ".join(f"{v!r}:{x!r}" for v, x in r.pairs),
                     "judged": r.window is not None, "pass": r.passed})
    emit(cfg, "scaling_report", rows, ["quantity", "slope", "window_lo", "window_hi", "pairs", "judged", "pass"],
         {"points": points, "config": cfg.to_dict()})
    failed = any(not r.passed for r in reports) or any("error" in p for p in points)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_evolve(cfg, args):
    spec = _load_spec(args.spec)
    v = spec.v
    phi, pi = az.build_phi(spec, args.t0)
    init = ev.FieldState(args.t0, phi, pi)
    snaps = args.snap or []
    traj = ev.evolve(init, args.T, args.dt, snap_times=snaps, monitor_every=args.monitor_every)
    rows = []
    for s in traj.snapshots:
        for x, p, q in zip(s.x, s.phi.values, s.pi.values):
            rows.append({"t": s.t, "x": x, "phi": p, "pi": q})
    final = traj.final
    fit = {}
    try:
        shift, dist = ev.asymptotic_fit(final, v)
        fit = {"shift": shift, "distance": dist,
               "ansatz_offset_at_end": az.separation_offset(spec, final.t),
               "ansatz_offset_limit": az.separation_offset(spec),
               "time_shift_offset": az.compute_time_shift(spec)[1]}
    except KinkCollideError as exc:
        fit = {"error": str(exc)}
    ansatz_distance = None
    if abs(final.t) <= spec.t_max:
        aphi, api = az.build_phi(spec, final.t, final.x)
        ansatz_distance = ev.h1l2_distance(final, aphi.values, api.values)
    manifest = {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "params": {"spec": str(args.spec), "v": v, "order": spec.k, "t0": args.t0, "T": args.T, "dt": args.dt,
                   "snap": snaps, "grid": list(spec.x_grid)},
        "energy": {"times": traj.times, "values": traj.energies, "relative_drift": traj.energy_drift()},
        "momentum": {"values": traj.momenta},
        "fit": fit,
        "ansatz_distance_at_end": ansatz_distance,
        "note": "comparison of the evolved field with the approximate solution is a numerical experiment",
    }
    text = render_json(manifest)
    sys.stdout.write(text)
    if cfg.output_dir:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "snapshots.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(render_csv(rows, ["t", "x", "phi", "pi"]))
        (out / "manifest.json").write_text(text, encoding="utf-8")
    tol = cfg.tolerances.get("energy_drift", 1e-6)
    return EXIT_OK if traj.energy_drift() <= tol else EXIT_FAIL


def cmd_report(cfg, args):
    """Summarize result tables (with a pass column) found in a directory."""
    root = Path(args.dir)
    if not root.is_dir():
        raise UsageError(f"no such directory: {root}")
    rows = []
    for path in sorted(root.iterdir()):
        if path.suffix == ".csv":
            with open(path, newline="", encoding="utf-8") as fh:
                table = list(csv.DictReader(fh))
            if not table or "pass" not in table[0]:
                continue
            verdicts = [r["pass"] for r in table if r["pass"] != ""]
        elif path.suffix == ".json":
            data = json.loads(path.read_text(encoding="utf-8"))
            table = data.get("rows") if isinstance(data, dict) else None
            if not table or not isinstance(table, list) or "pass" not in table[0]:
                continue
            verdicts = ["true" if r.get("pass") else "false" for r in table if r.get("pass") is not None]
        else:
            continue
        fails = sum(1 for x in verdicts if x != "true")
        rows.append({"file": path.name, "checks": len(verdicts), "failed": fails, "pass": fails == 0})
    emit(cfg, "report", rows, ["file", "checks", "failed", "pass"])
    return EXIT_OK if rows and all(r["pass"] for r in rows) else EXIT_FAIL


# -- parser ----------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="JSON config file (flags override its values)")
    p.add_argument("--output-dir", help="also write results into this directory (created if missing)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--grid", type=_grid_pair, default=None, help="N,L")
    p.add_argument("--samples", type=int, default=None, help="time samples of the modulation grid (odd)")


def make_parser():
    parser = argparse.ArgumentParser(prog="kink-collide", description="Approximate kink collisions for phi^6.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-identities", help="profile and operator identities")
    _common(p)
    p.add_argument("--k1-offset", type=float, default=0.0, help="perturb the G constant (fault injection)")

    p = sub.add_parser("separate", help="separation of a two-frame product")
    _common(p)
    p.add_argument("--f", help="plus-side factor, e.g. 'Hd'")
    p.add_argument("--g", help="minus-side factor, e.g. --g=-H(-x)")
    p.add_argument("--preset", choices=sorted(list(_PRESETS) + ["l1"]))
    p.add_argument("--order", dest="M", type=int, default=2, help="largest emitted exponent")
    p.add_argument("--zeta", type=_floats, default=[5.0, 8.0])

    p = sub.add_parser("invert-l", help="grid inverse of the linearized operator")
    _common(p)
    p.add_argument("--rhs", required=True, help="expression, file holding one, or CSV (x, g)")
    p.add_argument("--stencil", type=int, choices=(2, 4), default=2)

    for name, hlp in (("modulate", "solve for the modulation r_k"), ("build-ansatz", "build phi_k")):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        p.add_argument("--v", type=_floats, default=None)
        p.add_argument("--order", type=int, default=None)
        if name == "build-ansatz":
            p.add_argument("--out", required=True, help="spec JSON path")

    p = sub.add_parser("residual-scan", help="residual norms of a stored ansatz")
    _common(p)
    p.add_argument("--spec", required=True)
    p.add_argument("--times", type=_floats, required=True)
    p.add_argument("--s", type=_floats, default=[0.0, 1.0])

    p = sub.add_parser("scaling-study", help="residual scaling over speeds")
    _common(p)
    p.add_argument("--v", type=_floats, default=None)
    p.add_argument("--order", type=int, default=None)

    p = sub.add_parser("evolve", help="evolve the ansatz with the full equation")
    _common(p)
    p.add_argument("--spec", required=True)
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--dt", type=float, default=0.005)
    p.add_argument("--snap", type=_floats, default=None)
    p.add_argument("--monitor-every", type=int, default=10)

    p = sub.add_parser("report", help="summarize result tables in a directory")
    _common(p)
    p.add_argument("--dir", required=True)
    return parser


_COMMANDS = {
    "separate": cmd_separate,
    "invert-l": cmd_invert_l,
    "modulate": cmd_modulate,
    "build-ansatz": cmd_build_ansatz,
    "residual-scan": cmd_residual_scan,
    "scaling-study": cmd_scaling_study,
    "evolve": cmd_evolve,
    "report": cmd_report,
}


_NEGATIVE_LIST = re.compile(r"^-\d|^-\.\d")


def _join_negative_values(argv):
    """Turn ``--snap -40,0`` into ``--snap=-40,0`` so argparse accepts it."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--") and "=" not in a and i + 1 < len(argv) and _NEGATIVE_LIST.match(argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None):
    parser = make_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = build_config(args)
        if args.command == "check-identities":
            return run_check_identities(cfg, args.k1_offset)
        return _COMMANDS[args.command](cfg, args)
    except (UsageError, InvalidArgument, AlgebraError) as exc:
        print(f"kink-collide: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KinkCollideError as exc:
        print(f"kink-collide: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not an error of ours
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
