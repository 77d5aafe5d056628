"""Command-line harness: seeded, reproducible experiment runs.

Subcommands cover the main pipelines (resonances, wkb-check, det-check,
perturb, montecarlo, zworski-density), emit plot-ready CSV / JSON at 12
significant digits, and support golden-file regression behind an explicit
``--bless`` flag.  Exit codes: 0 success, 2 validation error, 3 numerical
gate failure (cross-method disagreement or golden mismatch).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from . import counting, grushin, model, perturb, resonance, wkb

__all__ = [
    "RunConfig",
    "det_check_families",
    "main",
    "run",
    "square_well_k_resonances",
    "wkb_remainder_table",
    "zworski_density",
]


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    """A fully serializable run description.

    Round-trips byte-identically through the flat ``key=value`` config text:
    parameters are kept as strings and only interpreted by the subcommand
    runners.
    """

    subcommand: str
    master_seed: int = 0
    output_prefix: str = ""
    params: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"subcommand={self.subcommand}",
            f"master_seed={self.master_seed}",
            f"output_prefix={self.output_prefix}",
        ]
        lines += [f"{k}={self.params[k]}" for k in sorted(self.params)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        sub, seed, prefix, params = None, 0, "", {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {raw!r}: expected key=value")
            key, value = line.split("=", 1)
            key, value = key.strip(), value.strip()
            if key == "subcommand":
                sub = value
            elif key == "master_seed":
                seed = int(value)
            elif key == "output_prefix":
                prefix = value
            else:
                params[key] = value
        if sub is None:
            raise ValueError("config text is missing the subcommand key")
        return cls(subcommand=sub, master_seed=seed, output_prefix=prefix,
                   params=params)

    def out_path(self, name: str) -> str:
        path = Path(self.output_prefix + name)
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        return str(path)


# ---------------------------------------------------------------------------
# small helpers


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _write_csv(path: str, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _index_map(fn, items, workers: int = 1) -> list:
    """Apply fn to items; results ordered by index regardless of workers."""
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _parse_floats(text: str, n: int | None = None) -> tuple:
    try:
        vals = tuple(float(t) for t in str(text).split(","))
    except ValueError as exc:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _get_float(params: dict, key: str) -> float:
    if key not in params:
        raise ValueError(f"missing required parameter --{key.replace('_', '-')}")
    return float(params[key])


def _build_potential(params: dict, default_kind: str = "square_well") -> model.PotentialSpec:
    kind = params.get("potential", default_kind)
    support = _parse_floats(params.get("support", "-1,1"), 2)
    v0 = int(params.get("v0", "2"))
    if kind == "square_well":
        spec_params = {"depth": float(params.get("depth", "-4.0"))}
    elif kind == "smooth_bump":
        spec_params = {
            "amplitude": float(params.get("amplitude", "-4.0")),
            "edge_width": float(params.get("edge_width", "0.03")),
        }
    else:
        raise ValueError(f"unsupported potential kind for the CLI: {kind!r}")
    return model.PotentialSpec(kind, support, spec_params, v0=v0)


def _golden_gate(outputs: list, golden_dir: str | None, bless: bool):
    if golden_dir is None:
        return
    gdir = Path(golden_dir)
    if bless:
        gdir.mkdir(parents=True, exist_ok=True)
        for out in outputs:
            shutil.copy2(out, gdir / Path(out).name)
        return
    for out in outputs:
        ref = gdir / Path(out).name
        if not ref.exists():
            raise ValueError(f"no golden file {ref}; rerun with --bless to create it")
        if ref.read_bytes() != Path(out).read_bytes():
            raise ArithmeticError(f"golden mismatch for {Path(out).name}")


# ---------------------------------------------------------------------------
# square-well k-plane density (resonances as poles in k, z = k^2)


def square_well_k_resonances(well_depth: float, half_width: float,
                             r_max: float, h: float = 1.0) -> np.ndarray:
    """All resonances in the lower half k-plane with |k| <= r_max for the
    square well V = -well_depth on (-a, a), a = half_width.

    Roots of the even/odd product transcendentals
        even:  Omega sin(Omega a / h) + i k cos(Omega a / h) = 0,
        odd:   Omega cos(Omega a / h) - i k sin(Omega a / h) = 0,
    Omega = sqrt(k^2 + well_depth), by vectorized Newton from a seed lattice,
    completed by the k -> -conj(k) mirror symmetry and deduplicated."""
    if well_depth <= 0:
        return np.empty(0, dtype=complex)
    a = float(half_width)
    re = np.arange(0.0, r_max + 2.0, np.pi * h / (8 * a))
    im = -np.array([0.05, 0.2, 0.5, 1.0, 1.7, 2.5, 3.5, 5.0, 7.0]) * h / a
    seeds = (re[None, :] + 1j * im[:, None]).ravel()
    groups = []
    with np.errstate(all="ignore"):
        for parity in (0, 1):
            k = seeds.copy()
            step = np.full_like(k, np.inf)
            for _ in range(80):
                om = np.sqrt(k * k + well_depth)
                s, c = np.sin(om * a / h), np.cos(om * a / h)
                if parity == 0:
                    f = om * s + 1j * k * c
                    df = ((k / om) * s + a * k * c / h + 1j * c
                          - 1j * a * k * k * s / (om * h))
                else:
                    f = om * c - 1j * k * s
                    df = ((k / om) * c - a * k * s / h - 1j * s
                          - 1j * a * k * k * c / (om * h))
                step = np.where(df != 0, f / np.where(df != 0, df, 1.0), 0.0)
                k = k - step
            ok = ((np.abs(step) < 1e-10 * (1 + np.abs(k)))
                  & (k.imag < -1e-8) & (np.abs(k) <= r_max))
            groups.append(k[ok])
    roots = np.concatenate(groups)
    mirrored = -np.conj(roots[np.abs(roots.real) > 1e-8])
    roots = np.concatenate([roots, mirrored])
    roots = roots[np.lexsort((roots.imag, roots.real))]
    out: list = []
    for v in roots:
        if not out or abs(v - out[-1]) > 1e-6 * (1 + abs(v)):
            out.append(v)
    return np.asarray(out, dtype=complex)


def zworski_density(depth_value: float, support, r_max: float,
                    h: float = 1.0, n_r: int = 24) -> dict:
    """Resonance-counting density report for a square well.

    N(r) counts resonances with |k| <= r; the fitted slope is compared with
    the 1D density law 2 * (support length) / pi.  A zero potential yields an
    empty report; fewer than 10 resonances is an error (r_max too small)."""
    lo, hi = support
    length = hi - lo
    target = 2.0 * length / math.pi
    if depth_value == 0.0:
        return {"support": [lo, hi], "r_max": float(r_max), "h": float(h),
                "empty": True, "n_found": 0, "slope": None, "target": target,
                "rel_err": None, "table": []}
    roots = square_well_k_resonances(-depth_value, 0.5 * length, r_max, h=h)
    if len(roots) < 10:
        raise ValueError(
            f"only {len(roots)} resonances with |k| <= {r_max}; "
            "too few for a density fit (increase --rmax)")
    rr = np.linspace(r_max / 6.0, r_max, n_r)
    nn = np.array([(np.abs(roots) <= r).sum() for r in rr], dtype=float)
    slope = float(np.polyfit(rr, nn, 1)[0])
    return {"support": [lo, hi], "r_max": float(r_max), "h": float(h),
            "empty": False, "n_found": int(len(roots)), "slope": slope,
            "target": target, "rel_err": abs(slope - target) / target,
            "table": [(float(r), int(n)) for r, n in zip(rr, nn)],
            "roots": roots}


# ---------------------------------------------------------------------------
# exact-WKB remainder table (series vs an independent Riccati oracle)


def wkb_remainder_table(h_values=(0.08, 0.04, 0.02), orders=(0, 1, 2),
                        V=None, x_span=(0.5, 2.2), probe_span=(1.5, 2.2),
                        n_path: int = 2500, n_probe: int = 24,
                        pad: float = 0.5, workers: int = 1):
    """Max deviation between the truncated symbol series and an exact
    solution, in normalization-free ratio form, for each (order, h).

    The oracle integrates the log-derivative (Riccati) equation
    h u' = V - u^2 for the growing branch — forward integration is the
    stable direction for it — starting a pad before the path so the
    boundary layer has died off; the exact symbol ratio between two points
    x, x_ref is then exp((I(x) - I(x_ref) - (psi(x) - psi(x_ref))) / h) with
    I the integral of u.  The series comes from the gauged Volterra
    construction's steady-constant transport coefficients.

    Returns (rows, slopes): rows (order, h, max_ratio_deviation) and the
    fitted log-log slope per order (expected about order + 1)."""
    if V is None:
        V = lambda x: 1.0 + x * x
    x0, x1 = x_span

    def one_h(h):
        path = wkb.segment_path(x0, x1, n_path)
        res = wkb.exact_wkb_volterra(V, path, h, max(orders), sign=+1)
        if not res.converged:
            raise ArithmeticError(f"symbol fixed point not converged at h={h}")
        x = path.real
        sol = solve_ivp(
            lambda t, w: [(float(np.real(V(t))) - w[0] ** 2) / h, w[0]],
            (x0 - pad, x1), [math.sqrt(float(np.real(V(x0 - pad)))), 0.0],
            method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
        if not sol.success:
            raise ArithmeticError(f"Riccati oracle failed at h={h}: {sol.message}")
        idx = np.searchsorted(x, np.linspace(probe_span[0], probe_span[1], n_probe))
        xp = x[idx]
        integral = sol.sol(xp)[1]
        dpsi = (res.psi[idx] - res.psi[idx[0]]).real
        oracle = np.exp((integral - integral[0] - dpsi) / h)
        out = {}
        for N in orders:
            series = sum(res.coeffs[j][idx] * h ** j for j in range(N + 1))
            ratio = series / series[0]
            out[N] = float(np.max(np.abs(oracle - ratio)[1:]))
        return out

    per_h = _index_map(one_h, list(h_values), workers=workers)
    rows = [(N, h, vals[N]) for h, vals in zip(h_values, per_h) for N in orders]
    slopes = {}
    for N in orders:
        devs = [vals[N] for vals in per_h]
        slopes[N] = float(np.polyfit(np.log(h_values), np.log(devs), 1)[0])
    return rows, slopes


# ---------------------------------------------------------------------------
# determinant-calculus check on random matrix families


def det_check_families(n_families: int = 20, seed: int = 0, dim_max: int = 8,
                       workers: int = 1):
    """Winding-number multiplicities vs planted algebraic multiplicities on
    random families z I - M, plus winding additivity under products.

    M is built as Q T Q* with unitary Q and upper-triangular T whose diagonal
    repeats plant the multiplicities, so the ground truth is exact.  Returns
    (rows, n_failures); rows are (family, dim, zero_re, zero_im,
    algebraic_mult, winding_mult, additive_ok)."""
    rng = np.random.default_rng(seed)
    cases = []
    for fam_i in range(n_families):
        d = int(rng.integers(2, dim_max + 1))
        n_eig = int(rng.integers(1, d + 1))
        vals = rng.uniform(-1.5, 1.5, n_eig) + 1j * rng.uniform(-1.5, 1.5, n_eig)
        mults = np.ones(n_eig, dtype=int)
        for _ in range(d - n_eig):
            mults[rng.integers(0, n_eig)] += 1
        T = np.diag(np.repeat(vals, mults)).astype(complex)
        iu = np.triu_indices(d, 1)
        T[iu] = 0.5 * (rng.standard_normal(len(iu[0]))
                       + 1j * rng.standard_normal(len(iu[0])))
        Q, _ = np.linalg.qr(rng.standard_normal((d, d))
                            + 1j * rng.standard_normal((d, d)))
        M2 = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        cases.append((fam_i, d, vals, mults, Q @ T @ Q.conj().T, M2))

    def one_case(case):
        fam_i, d, vals, mults, M, M2 = case
        fam = lambda z: z * np.eye(d) - M
        fam2 = lambda z: z * np.eye(d) - M2
        rows, failures = [], 0
        wa, wb, wab = grushin.winding_additivity(fam, fam2, vals[0], 0.3)
        additive_ok = wab == wa + wb
        if not additive_ok:
            failures += 1
        for v, mu in zip(vals, mults):
            others = vals[np.abs(vals - v) > 1e-12]
            gap = float(np.min(np.abs(others - v))) if len(others) else 1.0
            w = grushin.det_winding(fam, v, min(0.45 * gap, 0.5))
            if w != mu:
                failures += 1
            rows.append((fam_i, d, v.real, v.imag, int(mu), int(w), additive_ok))
        return rows, failures

    results = _index_map(one_case, cases, workers=workers)
    rows = [row for case_rows, _ in results for row in case_rows]
    n_failures = sum(f for _, f in results)
    return rows, n_failures


# ---------------------------------------------------------------------------
# subcommand runners (each returns the list of written output files)


def _run_resonances(cfg: RunConfig) -> list:
    p = cfg.params
    h = _get_float(p, "h")
    a, b, c = _parse_floats(p.get("window", "0.5,2,1.0"), 3)
    window = model.SpectralWindow(a, b, c)
    rect = model.validate_window(window, h)
    V = _build_potential(p)
    support = V.support
    method = p.get("method", "both")
    if method not in {"scaling", "detdiff", "both"}:
        raise ValueError(f"unknown method {method!r}")
    nodes = int(p.get("nodes", "0"))
    if nodes <= 0:
        nodes = max(140, counting._auto_nodes(V, support, h, window.b,
                                              per_feature=12.0))
    results = {}
    if method in ("scaling", "both"):
        results["scaling"] = resonance.resonances_by_scaling(
            V, h, rect, support, nodes=nodes)
    if method in ("detdiff", "both"):
        det_box = (rect[0], rect[1], rect[2], -h ** 3)
        results["detdiff"] = resonance.resonances_by_detdiff(
            V, h, det_box, support, breakpoints=support)
    rows = [(name, z.real, z.imag, int(m))
            for name, rs in results.items()
            for z, m in zip(rs.values, rs.multiplicities)]
    out = cfg.out_path("resonances.csv")
    _write_csv(out, ("method", "re", "im", "multiplicity"), rows)
    if method == "both":
        zs = np.sort_complex(np.repeat(results["scaling"].values,
                                       results["scaling"].multiplicities))
        zd = np.sort_complex(np.repeat(results["detdiff"].values,
                                       results["detdiff"].multiplicities))
        if len(zs) != len(zd):
            raise ArithmeticError(
                f"method disagreement: scaling found {len(zs)}, detdiff {len(zd)}")
        if len(zs) and float(np.max(np.abs(zs - zd))) > 1e-6:
            raise ArithmeticError(
                f"method disagreement: max gap {np.max(np.abs(zs - zd)):.3e}")
    return [out]


def _run_wkb_check(cfg: RunConfig) -> list:
    p = cfg.params
    h_values = _parse_floats(p.get("h_values", "0.08,0.04,0.02"))
    if len(h_values) < 2:
        raise ValueError("wkb-check needs at least two h values for a slope fit")
    orders = tuple(int(v) for v in _parse_floats(p.get("orders", "0,1,2")))
    tol = float(p.get("slope_tol", "0.2"))
    workers = int(p.get("workers", "1"))
    rows, slopes = wkb_remainder_table(h_values=h_values, orders=orders,
                                       workers=workers)
    out_rows = cfg.out_path("wkb_check.csv")
    _write_csv(out_rows, ("order", "h", "max_ratio_deviation"), rows)
    out_slopes = cfg.out_path("wkb_slopes.csv")
    _write_csv(out_slopes, ("order", "fitted_slope", "target"),
               [(N, slopes[N], N + 1) for N in orders])
    bad = [N for N in orders if abs(slopes[N] - (N + 1)) > tol]
    if bad:
        detail = ", ".join(f"order {N}: {slopes[N]:.3f}" for N in bad)
        raise ArithmeticError(f"remainder slopes off target: {detail}")
    return [out_rows, out_slopes]


def _run_det_check(cfg: RunConfig) -> list:
    p = cfg.params
    n_families = int(p.get("families", "20"))
    dim_max = int(p.get("dim_max", "8"))
    workers = int(p.get("workers", "1"))
    rows, n_failures = det_check_families(n_families=n_families,
                                          seed=cfg.master_seed,
                                          dim_max=dim_max, workers=workers)
    out = cfg.out_path("det_check.csv")
    _write_csv(out, ("family", "dim", "zero_re", "zero_im",
                     "algebraic_mult", "winding_mult", "additive_ok"), rows)
    if n_failures:
        raise ArithmeticError(
            f"determinant calculus check failed on {n_failures} cases")
    return [out]


def _run_perturb(cfg: RunConfig) -> list:
    p = cfg.params
    h = _get_float(p, "h")
    n_samples = int(p.get("samples", "8"))
    lo, hi = _parse_floats(p.get("support", "-1,1"), 2)
    pcfg = model.PerturbationConfig(
        v0=int(p.get("v0", "2")),
        R=float(p.get("R", "1.0")),
        L=float(p.get("L", "10.0")),
    )
    mid, halfw = 0.5 * (lo + hi), 0.5 * (hi - lo)
    length = max(2.0 * math.pi, 4.0 * halfw)
    basis = perturb.build_basis(pcfg.L, h,
                                domain=(mid - 0.5 * length, mid + 0.5 * length))
    delta = pcfg.delta_at(h)
    streams = perturb.draw_streams(cfg.master_seed, n_samples)
    out = cfg.out_path("perturb_draws.jsonl")
    with open(out, "w") as fh:
        for i in range(n_samples):
            draw = perturb.sample_draw(basis, pcfg.R, rng_seed=streams[i],
                                       obstacle=(lo, hi), v0=pcfg.v0,
                                       delta=delta)
            line = {
                "sample": i,
                "n_modes": int(len(draw.alpha)),
                "alpha_norm": float(np.linalg.norm(draw.alpha)),
                "sup_norm": float(np.max(np.abs(draw.realized))),
                "delta": float(delta),
            }
            fh.write(json.dumps(line, sort_keys=True) + "\n")
    return [out]


def _run_montecarlo(cfg: RunConfig) -> list:
    p = cfg.params
    h = _get_float(p, "h")
    n_samples = int(p.get("samples", "50"))
    a, b, c = _parse_floats(p.get("window", "0.5,2,1.2"), 3)
    window = model.SpectralWindow(a, b, c)
    V = _build_potential(p, default_kind="smooth_bump")
    pcfg = model.PerturbationConfig(
        v0=int(p.get("v0", "2")),
        R=float(p.get("R", "1.0")),
        L=float(p.get("L", "10.0")),
    )
    records, summary = counting.discrepancy_experiment(
        V, pcfg, window, n_samples, cfg.master_seed, h=h, support=V.support,
        agreement_tol=float(p.get("agreement_tol", "1e-6")))
    rows = [(r.seed, r.n_res, r.n0_ab, r.boundary_terms, r.discrepancy,
             r.meta["alpha_norm"], r.meta["delta"]) for r in records]
    out_records = cfg.out_path("montecarlo_records.csv")
    _write_csv(out_records, ("sample", "n_res", "n0_ab", "boundary_terms",
                             "discrepancy", "alpha_norm", "delta"), rows)
    out_summary = cfg.out_path("summary.json")
    _write_json(out_summary, {
        "h": summary["h"],
        "window": summary["window"],
        "samples": summary["samples"],
        "frac_within_bound": summary["frac_within_bound"],
        "mean_discrepancy": summary["mean_discrepancy"],
        "mean_n0": summary["mean_n0"],
        "seed": summary["seed"],
    })
    if summary["discarded"]:
        raise ArithmeticError(
            f"route disagreement on samples {summary['discarded']}")
    return [out_records, out_summary]


def _run_zworski(cfg: RunConfig) -> list:
    p = cfg.params
    r_max = _get_float(p, "rmax")
    lo, hi = _parse_floats(p.get("support", "-1,1"), 2)
    depth_value = float(p.get("depth", "-4.0"))
    h = float(p.get("h", "1.0"))
    report = zworski_density(depth_value, (lo, hi), r_max, h=h,
                             n_r=int(p.get("n_r", "24")))
    out_table = cfg.out_path("zworski_density.csv")
    _write_csv(out_table, ("r", "count"), report["table"])
    out_report = cfg.out_path("zworski_report.json")
    _write_json(out_report, {k: v for k, v in report.items()
                             if k not in ("table", "roots")})
    return [out_table, out_report]


_RUNNERS = {
    "resonances": _run_resonances,
    "wkb-check": _run_wkb_check,
    "det-check": _run_det_check,
    "perturb": _run_perturb,
    "montecarlo": _run_montecarlo,
    "zworski-density": _run_zworski,
}

# CLI option name -> params key, per subcommand ("flag" entries take no value)
_OPTIONS = {
    "resonances": ["h", "window", "potential", "depth", "amplitude",
                   "edge-width", "support", "v0", "method", "nodes"],
    "wkb-check": ["h-values", "orders", "slope-tol", "workers"],
    "det-check": ["families", "dim-max", "workers"],
    "perturb": ["h", "samples", "support", "v0", "R", "L"],
    "montecarlo": ["h", "samples", "window", "potential", "depth", "amplitude",
                   "edge-width", "support", "v0", "R", "L", "agreement-tol"],
    "zworski-density": ["rmax", "depth", "support", "h", "n-r"],
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reslab",
        description="Seeded resonance experiments with CSV/JSON outputs.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, options in _OPTIONS.items():
        sp = sub.add_parser(name)
        for opt in options:
            sp.add_argument(f"--{opt}", default=None)
        sp.add_argument("--config", default=None,
                        help="key=value config file; CLI flags override it")
        sp.add_argument("--seed", default=None, help="master seed (64-bit)")
        sp.add_argument("--out", default=None, help="output path prefix")
        sp.add_argument("--golden", default=None,
                        help="directory of golden outputs to compare against")
        sp.add_argument("--bless", action="store_true",
                        help="regenerate the golden files instead of comparing")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        cfg = RunConfig.from_text(Path(args.config).read_text())
        if cfg.subcommand != args.subcommand:
            raise ValueError(
                f"config file is for {cfg.subcommand!r}, not {args.subcommand!r}")
    else:
        cfg = RunConfig(subcommand=args.subcommand)
    for opt in _OPTIONS[args.subcommand]:
        key = opt.replace("-", "_")
        value = getattr(args, key)
        if value is not None:
            cfg.params[key] = value
    if args.seed is not None:
        cfg.master_seed = int(args.seed)
    if args.out is not None:
        cfg.output_prefix = args.out
    env_seed = os.environ.get("RESLAB_SEED")
    if env_seed is not None:
        cfg.master_seed = int(env_seed)
    return cfg


def run(argv) -> int:
    """Run one harness invocation; returns the process exit code."""
    try:
        args = _build_parser().parse_args(list(argv))
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return 0 if code == 0 else 2
    try:
        cfg = _config_from_args(args)
        outputs = _RUNNERS[cfg.subcommand](cfg)
        _golden_gate(outputs, args.golden, args.bless)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"numerical gate failed: {exc}", file=sys.stderr)
        return 3
    for out in outputs:
        print(out)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
