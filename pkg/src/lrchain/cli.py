"""Command-line front end.

Every subcommand writes a data file (CSV or JSON) plus a JSON sidecar that
echoes the effective run configuration, and prints a one-line summary.
Exit codes: 0 success, 2 bad arguments, 3 numerical failure, 4 resource
budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, exact, meanfield, spinwaves, sublattice
from .errors import BranchError, DomainError, NumericalError, ResourceError
from .model import DEFAULT_DIM_BUDGET, ChainSpec, clausen_truncated, dirichlet_eta, lerch, parse_inf, riemann_zeta

logger = logging.getLogger("lrchain")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_RESOURCE = 0, 2, 3, 4

SPEC_KEYS = ("n_sites", "spin2", "alpha", "j0", "b", "boundary", "kac_rescale")
RING_COMMANDS = ("dispersion", "gap", "sublattice")
INF_COMMANDS = RING_COMMANDS

SPEC_DEFAULTS = {"n_sites": 4, "spin2": 1, "alpha": 1.0, "j0": 1.0, "b": 0.0, "kac_rescale": False}
COMMAND_DEFAULTS = {
    "spectrum": {},
    "sweep": {"b_min": 0.0, "b_max": 2.0, "b_steps": 21, "log_grid": False},
    "semiclassical": {"table": "levels", "mode": "eps_only"},
    "dispersion": {"kind": "uniform", "k_points": spinwaves.DEFAULT_INF_POINTS},
    "gap": {"kind": "uniform", "b_min": 0.0, "b_max": 3.0, "b_steps": 31},
    "bifurcations": {"bins_per_decade": 10, "unstable": False, "weighting": "levels"},
    "deviation": {"b_min": 1e-2, "b_max": 1e2, "b_steps": 60, "mode": "eps_only"},
    "sublattice": {"phi_b": None, "phi_c": None, "k_points": spinwaves.DEFAULT_INF_POINTS},
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Effective configuration of one CLI run; round-trips through JSON."""

    command: str
    spec: dict
    params: dict = field(default_factory=dict)
    output_dir: str = "."
    format: str = "csv"
    threads: int = 1
    raw_units: bool = False
    budget: int = DEFAULT_DIM_BUDGET

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)

    def chain(self) -> ChainSpec:
        return ChainSpec.from_dict(self.spec)


# --- argument parsing -----------------------------------------------------------


def _num(text: str):
    try:
        return parse_inf(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    g = p.add_argument_group("chain")
    g.add_argument("--n", dest="n_sites", type=_num, default=s, help="number of sites, or 'inf'")
    g.add_argument("--spin2", type=int, default=s, help="twice the spin length (integer)")
    g.add_argument("--alpha", type=_num, default=s, help="interaction exponent, or 'inf'")
    g.add_argument("--j0", type=float, default=s, help="coupling strength")
    g.add_argument("--b", type=float, default=s, help="transverse field")
    g.add_argument("--boundary", choices=("open", "periodic"), default=s)
    g.add_argument("--kac", dest="kac_rescale", action="store_true", default=s, help="divide J0 by N")
    o = p.add_argument_group("run")
    o.add_argument("--config", default=s, help="JSON run configuration; flags override it")
    o.add_argument("--output-dir", default=s)
    o.add_argument("--format", choices=("csv", "json"), default=s)
    o.add_argument("--threads", type=int, default=s, help="worker threads (0 = all cores)")
    o.add_argument("--raw-units", action="store_true", default=s, help="do not divide energies by |J0|")
    o.add_argument("--budget", type=int, default=s, help="Hilbert-dimension cap for exact diagonalization")


def _grid_args(p: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    p.add_argument("--b-min", type=float, default=s)
    p.add_argument("--b-max", type=float, default=s)
    p.add_argument("--b-steps", type=int, default=s)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrchain", description="Spectra and spin waves of long-range transverse-field chains.")
    parser.add_argument("--version", action="version", version=f"lrchain {__version__}")
    parser.add_argument("--seed-info", action="store_true", help="report randomness and reproducibility settings")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")
    s = argparse.SUPPRESS

    p = sub.add_parser("spectrum", help="exact spectrum at one field")
    _common(p)

    p = sub.add_parser("sweep", help="exact spectra along a field grid")
    _common(p)
    _grid_args(p)
    p.add_argument("--log-grid", action="store_true", default=s)

    p = sub.add_parser("semiclassical", help="semiclassical or closed-form level tables")
    _common(p)
    p.add_argument("--table", choices=("levels", "ferro-b0", "para-j0", "ising", "lmg"), default=s)
    p.add_argument("--mode", choices=("eps_only", "eps_xi", "full_lengths"), default=s)

    p = sub.add_parser("dispersion", help="spin-wave dispersion on a ring")
    _common(p)
    p.add_argument("--kind", choices=("uniform", "alternating"), default=s)
    p.add_argument("--k-points", type=int, default=s, help="momentum samples for --n inf")

    p = sub.add_parser("gap", help="excitation gap along a field grid")
    _common(p)
    _grid_args(p)
    p.add_argument("--kind", choices=("uniform", "alternating"), default=s)

    p = sub.add_parser("bifurcations", help="log-binned histogram of bifurcation fields")
    _common(p)
    p.add_argument("--bins-per-decade", type=int, default=s)
    p.add_argument("--unstable", action="store_true", default=s, help="include maxima (unstable points)")
    p.add_argument("--weighting", choices=("levels", "configs"), default=s)

    p = sub.add_parser("deviation", help="relative ground-energy deviation on a log field grid")
    _common(p)
    _grid_args(p)
    p.add_argument("--mode", choices=("eps_only", "eps_xi", "full_lengths"), default=s)

    p = sub.add_parser("sublattice", help="two-sublattice Bogoliubov bands")
    _common(p)
    p.add_argument("--phi-b", type=float, default=s, help="Newton seed for sublattice B")
    p.add_argument("--phi-c", type=float, default=s, help="Newton seed for sublattice C")
    p.add_argument("--k-points", type=int, default=s)

    p = sub.add_parser("special", help="zeta, eta, Clausen and Lerch values")
    p.add_argument("--zeta", type=_num)
    p.add_argument("--eta", type=_num)
    p.add_argument("--clausen", nargs=3, metavar=("ALPHA", "K", "N"), type=_num)
    p.add_argument("--lerch", nargs=3, metavar=("K", "ALPHA", "A"), type=float)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the optional JSON file and explicit flags, in that order."""
    given = {k: v for k, v in vars(args).items() if k not in ("command", "seed_info", "verbose")}
    from_file: dict = {}
    if "config" in given:
        try:
            from_file = json.loads(Path(given.pop("config")).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        if from_file.get("command", args.command) != args.command:
            raise UsageError(f"config file is for '{from_file['command']}', not '{args.command}'")
    cmd = args.command
    spec = dict(SPEC_DEFAULTS, boundary="periodic" if cmd in RING_COMMANDS else "open")
    spec.update(from_file.get("spec", {}))
    params = dict(COMMAND_DEFAULTS[cmd])
    params.update(from_file.get("params", {}))
    run = {k: from_file[k] for k in ("output_dir", "format", "threads", "raw_units", "budget") if k in from_file}
    for key, value in given.items():
        if key in SPEC_KEYS:
            spec[key] = value
        elif key in ("output_dir", "format", "threads", "raw_units", "budget"):
            run[key] = value
        else:
            params[key] = value
    for key in ("n_sites", "alpha"):
        if isinstance(spec[key], float) and math.isinf(spec[key]):
            spec[key] = "inf"
    cfg = RunConfig(cmd, spec, params, **run)
    if cfg.threads == 0:
        cfg.threads = os.cpu_count() or 1
    return cfg


# --- output ------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def write_outputs(cfg: RunConfig, columns: list[str], rows, meta: dict, comments: list[str] = ()) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    sidecar = {"config": cfg.to_dict(), "version": __version__, **meta}
    if cfg.format == "json":
        path = out / f"{cfg.command}.json"
        data = {c: [float(r[i]) if not isinstance(r[i], (bool, np.bool_)) else bool(r[i]) for r in rows] for i, c in enumerate(columns)}
        path.write_text(json.dumps({**sidecar, "data": data}, indent=2, default=_json_default) + "\n")
        return path
    path = out / f"{cfg.command}.csv"
    lines = [f"# lrchain {cfg.command}", f"# spec {json.dumps(cfg.spec, sort_keys=True)}"]
    lines += [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    lines += [",".join(_fmt(v) for v in r) for r in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    (out / f"{cfg.command}.meta.json").write_text(json.dumps(sidecar, indent=2, default=_json_default) + "\n")
    return path


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x)}")


def _unit(cfg: RunConfig, spec: ChainSpec) -> float:
    if cfg.raw_units or spec.j0 == 0:
        return 1.0
    return 1.0 / abs(spec.j0)


def _grid(params: dict, log: bool) -> np.ndarray:
    lo, hi, steps = params["b_min"], params["b_max"], params["b_steps"]
    if steps < 1 or hi < lo:
        raise UsageError("field grid needs b_steps >= 1 and b_max >= b_min")
    if log:
        if lo <= 0:
            raise UsageError("a logarithmic grid needs b_min > 0")
        return np.logspace(math.log10(lo), math.log10(hi), steps)
    return np.linspace(lo, hi, steps)


# --- commands -----------------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig, spec: ChainSpec):
    t0 = time.perf_counter()
    series = exact.spectrum_sweep(spec, [spec.b], budget=cfg.budget, residuals=True)
    return _spectrum_output(cfg, spec, series, time.perf_counter() - t0)


def cmd_sweep(cfg: RunConfig, spec: ChainSpec):
    grid = _grid(cfg.params, cfg.params.get("log_grid", False))
    t0 = time.perf_counter()
    series = exact.spectrum_sweep(spec, grid, threads=cfg.threads, budget=cfg.budget, residuals=True)
    return _spectrum_output(cfg, spec, series, time.perf_counter() - t0)


def _spectrum_output(cfg, spec, series, wall):
    u = _unit(cfg, spec)
    cols = ["b"] + [f"level_{i}" for i in range(series.levels.shape[1])]
    rows = [[b * u, *(lv * u)] for b, lv in zip(series.b_grid, series.levels)]
    distinct = _distinct(series.levels[0] * u)
    meta = {"residuals": series.residuals, "wall_time": wall, "dim": int(series.levels.shape[1])}
    summary = f"dim={series.levels.shape[1]} points={len(series.b_grid)} ground={_fmt(series.ground_energy[0] * u)} distinct_at_first_point={len(distinct)}"
    return cols, rows, meta, summary


def _distinct(levels: np.ndarray) -> np.ndarray:
    width = max(float(levels.max() - levels.min()), 1e-300)
    keep = np.concatenate([[True], np.diff(levels) > 1e-9 * width])
    return levels[keep]


def cmd_semiclassical(cfg: RunConfig, spec: ChainSpec):
    table = cfg.params["table"]
    u = _unit(cfg, spec)
    n = spec.require_finite("semiclassical tables")
    if table in ("ising", "lmg"):
        lt = meanfield.ising_levels(n, spec.j0) if table == "ising" else meanfield.lmg_levels(n, spec.j0, spec.kac_rescale)
        rows = [[e * u, d] for e, d in zip(lt.levels, lt.degeneracy)]
        return ["level", "degeneracy"], rows, {"table": table}, f"{table}: {len(rows)} levels"
    if table in ("ferro-b0", "para-j0"):
        vals = meanfield.ferro_spectrum_b0(spec) if table == "ferro-b0" else meanfield.para_spectrum_j0(spec)
        lv, deg = _group(vals * u)
        rows = [[e, d] for e, d in zip(lv, deg)]
        return ["level", "degeneracy"], rows, {"table": table}, f"{table}: {len(rows)} distinct levels"
    scale = spec.spin2 * n
    rows = []
    for c in meanfield.distinct_couplings(spec, cfg.params["mode"]):
        try:
            lvl = meanfield.semiclassical_level(c, scale)
        except BranchError:
            continue
        rows.append([c.j_mu * u, c.b_mu_per_field, c.multiplicity, lvl.branch == "min", lvl.b_c * u, lvl.total_energy(spec.b) * u])
    cols = ["j_mu", "slope", "multiplicity", "stable", "b_c", "energy"]
    ground = min((r[5] for r in rows if r[3]), default=float("nan"))
    return cols, rows, {"table": "levels", "mode": cfg.params["mode"]}, f"{len(rows)} semiclassical levels; lowest stable energy {_fmt(ground)}"


def _group(vals: np.ndarray):
    vals = np.sort(vals)
    width = max(float(vals.max() - vals.min()), 1.0)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(vals) > 1e-9 * width) + 1])
    counts = np.diff(np.append(starts, len(vals)))
    return vals[starts], counts


def cmd_dispersion(cfg: RunConfig, spec: ChainSpec):
    curve = spinwaves.dispersion(spec, cfg.params["kind"], n_points=cfg.params["k_points"])
    u = _unit(cfg, spec)
    rows = [[k, f * u, g * u, e * u, s] for k, f, g, e, s in zip(curve.k_grid, curve.f, curve.g, curve.energy, curve.stable)]
    a = curve.angle
    meta = {"phi_c": a.phi_c, "j_eff_p": a.j_eff_p * u, "regime": a.regime, "branch": a.branch, "e0": curve.e0 * u, "status": curve.status}
    summary = f"{a.kind}: phi_c={_fmt(a.phi_c)} regime={a.regime} gap={_fmt(curve.gap * u)} at k={_fmt(curve.k_grid[curve.gap_mode])} status={curve.status}"
    return ["k", "F", "G", "epsilon", "stable"], rows, meta, summary


def cmd_gap(cfg: RunConfig, spec: ChainSpec):
    grid = _grid(cfg.params, False)
    kind = cfg.params["kind"]
    scan = spinwaves.gap_scan(spec, kind, grid)
    u = _unit(cfg, spec)
    gap_at_bc = spinwaves.mode_energy(spec, kind, scan.b_c, spinwaves.gap_momentum(kind))
    rows = [[b * u, g * u, l] for b, g, l in zip(scan.b, scan.gap, scan.corr_length)]
    meta = {"b_c": scan.b_c * u, "gap_at_b_c": gap_at_bc * u, "exponent": scan.exponent, "kind": kind}
    exp = "n/a" if scan.exponent is None else f"{scan.exponent:.4f}"
    summary = f"{kind}: gap reaches {gap_at_bc * u:.3g} at b={scan.b_c * u:.8g}; exponent {exp}"
    return ["b", "gap", "corr_length"], rows, meta, summary


def cmd_bifurcations(cfg: RunConfig, spec: ChainSpec):
    p = cfg.params
    h = meanfield.bifurcation_histogram(spec, p["bins_per_decade"], not p["unstable"], p["weighting"])
    u = _unit(cfg, spec)
    rows = [[lo * u, hi * u, c, cc, cl] for lo, hi, c, cc, cl in zip(h.bins[:-1], h.bins[1:], h.counts, h.counts_configs, h.counts_levels)]
    meta = {"stable_only": h.stable_only, "weighting": h.weighting, "peak": h.peak() * u}
    return ["bin_lo", "bin_hi", "count", "count_configs", "count_levels"], rows, meta, f"peak near b={h.peak() * u:.6g} ({h.weighting} weighting)"


def cmd_deviation(cfg: RunConfig, spec: ChainSpec):
    grid = _grid(cfg.params, True)
    t0 = time.perf_counter()
    tab = meanfield.deviation(spec, grid, cfg.params["mode"], threads=cfg.threads)
    u = _unit(cfg, spec)
    rows = [[b * u, d, em * u, e0 * u] for b, d, em, e0 in zip(tab.b, tab.d, tab.e_min, tab.e0)]
    meta = {"min_d": float(tab.d.min()), "wall_time": time.perf_counter() - t0}
    return ["b", "d", "e_min", "e0"], rows, meta, f"d ranges {tab.d.min():.3e} .. {tab.d.max():.3e}"


def cmd_sublattice(cfg: RunConfig, spec: ChainSpec):
    p = cfg.params
    if p.get("phi_b") is None and p.get("phi_c") is None:
        config = sublattice.uniform_config(spec)
    else:
        seed = (p.get("phi_b") or 0.0, p.get("phi_c") if p.get("phi_c") is not None else p.get("phi_b") or 0.0)
        config = sublattice.stationary_angles(spec, seed)
    table = sublattice.bdg_bands(spec, config, p["k_points"])
    u = _unit(cfg, spec)
    rows = [[q, b1 * u, b2 * u, s] for q, (b1, b2), s in zip(table.q, table.bands, table.stable)]
    meta = {"phi_b": config.phi_b, "phi_c": config.phi_c, "m_b": config.m_b, "m_c": config.m_c, "residual": config.residual}
    summary = f"phi_b={_fmt(config.phi_b)} phi_c={_fmt(config.phi_c)} residual={config.residual:.2e} unstable={int((~table.stable).sum())}"
    return ["k", "band1", "band2", "stable"], rows, meta, summary


COMMANDS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "semiclassical": cmd_semiclassical,
    "dispersion": cmd_dispersion,
    "gap": cmd_gap,
    "bifurcations": cmd_bifurcations,
    "deviation": cmd_deviation,
    "sublattice": cmd_sublattice,
}


def cmd_special(args) -> int:
    done = False
    if args.zeta is not None:
        print(f"{riemann_zeta(args.zeta):.10f}")
        done = True
    if args.eta is not None:
        print(f"{dirichlet_eta(args.eta):.10f}")
        done = True
    if args.clausen is not None:
        a, k, n = args.clausen
        print(f"{float(clausen_truncated(a, k, n)):.10f}")
        done = True
    if args.lerch is not None:
        k, a, s = args.lerch
        z = lerch(k, a, s)
        print(f"{z.real:.10f} {z.imag:+.10f}j")
        done = True
    if not done:
        raise UsageError("special needs at least one of --zeta, --eta, --clausen, --lerch")
    return EXIT_OK


def _seed_info() -> str:
    import scipy

    return (
        "lrchain uses no random numbers; all outputs are deterministic functions of the run configuration.\n"
        f"numpy {np.__version__}, scipy {scipy.__version__}"
    )


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr, format="%(levelname)s %(message)s")
    if args.seed_info:
        print(_seed_info())
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "special":
            return cmd_special(args)
        cfg = resolve_config(args)
        spec = cfg.chain()
        if spec.infinite and args.command not in INF_COMMANDS:
            raise UsageError(f"--n inf is not defined for '{args.command}'")
        columns, rows, meta, summary = COMMANDS[args.command](cfg, spec)
        path = write_outputs(cfg, columns, rows, meta)
        print(f"{summary} -> {path}")
        return EXIT_OK
    except (UsageError, DomainError, BranchError, ValueError, TypeError, KeyError) as exc:
        print(f"lrchain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"lrchain: resource budget exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as exc:
        print(f"lrchain: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
