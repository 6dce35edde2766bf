"""Per-speed measurements of the approximate solutions and log-log slope fits."""

from dataclasses import dataclass, field

import numpy as np

from . import ansatz as az
from . import modulation as md
from .errors import KinkCollideError

# slope windows for the k = 2 and k = 3 residual scaling
WINDOWS = {
    "residual_L2_k2": (3.5, 4.8),
    "projection_k2": (5.4, 6.8),
    "residual_L2_k3": (5.2, 7.0),
}
GAP_THRESHOLD = 10.0


def residual_norms(spec, t, s_values=(0.0, 1.0)):
    """Sobolev norms of Lambda(phi)(t, .) on the spec grid, one per index s."""
    lam = az.lambda_residual(spec, t)
    return [az.sobolev_norm(lam, s) for s in s_values]


def measure(spec, t):
    """(L2 norm, H1 norm, projection on H'(w)) of the residual at time t."""
    l2, h1 = residual_norms(spec, t)
    return {"L2": l2, "H1": h1, "projection": az.kink_projection(spec, t)}


def sample_times(v):
    """The two measurement times t = 0 and t = 1/(2v)."""
    return {"t0": 0.0, "thalf": 0.5 / v}


def study_point(v, order=2, samples=md.DEFAULT_SAMPLES, correction_samples=az.CORRECTION_SAMPLES,
                x_grid=az.DEFAULT_X):
    """Build phi_2 (and phi_3 if order >= 3) at speed v and measure residuals.

    Returns a flat dict of named values; a failed build is reported as
    {"v": v, "error": message} so that a study can carry on with other speeds.
    """
    out = {"v": float(v)}
    try:
        spec = az.build_ansatz(v, 2, samples, correction_samples, x_grid)
        r2 = spec.modulations[0]
        out["r2_sup"] = r2.sup_abs
        out["r2_evenness"] = r2.evenness()
        out["r2_ode_residual"] = r2.ode_residual()
        out["shift_e_r"] = az.compute_time_shift(spec)[2]
        for label, t in sample_times(v).items():
            m = measure(spec, t)
            out[f"residual_L2_k2_{label}"] = m["L2"]
            out[f"residual_H1_k2_{label}"] = m["H1"]
            out[f"projection_k2_{label}"] = abs(m["projection"])
            out[f"unmodulated_projection_k2_{label}"] = abs(az.kink_projection(spec.unmodulated(), t))
        if order >= 3:
            spec3 = spec
            while spec3.k < order:
                spec3 = az.raise_order(spec3, samples, correction_samples)
            for label, t in sample_times(v).items():
                m = measure(spec3, t)
                out[f"residual_L2_k{order}_{label}"] = m["L2"]
                out[f"residual_H1_k{order}_{label}"] = m["H1"]
                out[f"projection_k{order}_{label}"] = abs(m["projection"])
    except KinkCollideError as exc:
        return {"v": float(v), "error": f"{type(exc).__name__}: {exc}"}
    return out


def fit_slope(vs, values):
    """Least-squares slope of ln(value) against ln(v)."""
    x = np.log(np.asarray(vs, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if len(x) < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class ScalingReport:
    """A fitted v-power of one measured quantity and its verdict."""

    quantity: str
    pairs: list = field(default_factory=list)  # (v, value)
    slope: float = float("nan")
    window: tuple | None = None  # None: informational only
    passed: bool = True

    @classmethod
    def fit(cls, quantity, pairs, window=None):
        pairs = sorted(((float(v), float(x)) for v, x in pairs), reverse=True)
        ok_pairs = [(v, x) for v, x in pairs if x > 0 and np.isfinite(x)]
        slope = fit_slope([p[0] for p in ok_pairs], [p[1] for p in ok_pairs]) if len(ok_pairs) >= 2 else float("nan")
        if window is None:
            passed = True
        else:
            passed = bool(len(ok_pairs) >= 3 and window[0] <= slope <= window[1])
        return cls(quantity, pairs, slope, None if window is None else tuple(window), passed)

    def to_dict(self):
        return {
            "quantity": self.quantity,
            "pairs": [[v, x] for v, x in self.pairs],
            "slope": self.slope,
            "window": None if self.window is None else list(self.window),
            "pass": self.passed,
        }


def scaling_reports(points, order=2, windows=None, gap_threshold=GAP_THRESHOLD):
    """Slope reports from per-speed measurements (failed points are skipped).

    Quantities with a window are judged at both sample times; the H1 norms,
    the unmodulated projections and the k >= 3 projections are informational.  The
    modulation gap is judged at the smallest speed, and for order >= 3 the
    raised residual slope must exceed the k = 2 slope.
    """
    windows = dict(WINDOWS, **(windows or {}))
    good = [p for p in points if "error" not in p]
    reports = []
    keys = ["residual_L2_k2", "residual_H1_k2", "projection_k2", "unmodulated_projection_k2"]
    if order >= 3:
        keys += [f"residual_L2_k{order}", f"residual_H1_k{order}", f"projection_k{order}"]
    for key in keys:
        for label in ("t0", "thalf"):
            name = f"{key}_{label}"
            pairs = [(p["v"], p[name]) for p in good if name in p]
            window = windows.get(key)
            reports.append(ScalingReport.fit(name, pairs, window))
    by_name = {r.quantity: r for r in reports}
    if good:
        vmin = min(p["v"] for p in good)
        p = next(q for q in good if q["v"] == vmin)
        ratio = p["unmodulated_projection_k2_t0"] / max(p["projection_k2_t0"], 1e-300)
        reports.append(ScalingReport("modulation_gap_k2_t0", [(vmin, ratio)], float("nan"),
                                     (gap_threshold, float("inf")), bool(ratio >= gap_threshold)))
    if order >= 3:
        lo = by_name["residual_L2_k2_t0"].slope
        hi = by_name[f"residual_L2_k{order}_t0"].slope
        reports.append(ScalingReport(f"slope_gain_k{order}_over_k2_t0", [], hi - lo, (0.0, float("inf")),
                                     bool(np.isfinite(hi - lo) and hi > lo)))
    return reports
