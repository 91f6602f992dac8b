"""Command-line front end: every table is written as CSV or JSON for outside plotting.

Each output starts with a metadata block (units, parameters, versions and a
timestamp); the data section is a pure function of the flags and the seed.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io
from .bdg import PhononModeSet, solve_wavenumbers, zero_mode_state
from .imagestats import (
    ThermalOccupation,
    bogoliubov_family,
    correlation_J,
    meanfield_family,
    mean_density_bogoliubov,
)
from .inference import (
    almost_optimal_gain,
    gaussian_fisher,
    mean_slope,
    optimal_gain_meanfield,
    snr_and_split,
    snr_information,
)
from .meanfield import (
    PixelGrid,
    fisher_dark_soliton_closed,
    fisher_pixelized_poisson,
    fisher_poisson_continuum,
    fisher_poisson_pixels,
    pixel_slopes,
)
from .profiles import DarkSolitonParams, QuinticSolitonParams, VortexParams
from .simulate import RNG_ALGORITHM, crb_experiment

SCHEMA = {
    "fisher-mf": {
        "profile": "dark | quintic | vortex",
        "method": "closed | quadrature | pixel (Poisson + Gaussian correction) | pixel-poisson",
        "n": "background density (linear for 1D, areal for the vortex), units 1/xi",
        "v_over_c": "soliton velocity over sound speed",
        "q": "soliton position (xi)",
        "dx": "pixel width (xi); nan for continuum methods",
        "F": "Fisher information (1/xi^2)",
        "F_scaled": "F * xi^2",
        "crb_sigma": "Cramer-Rao width 1/sqrt(F) (xi)",
        "model": "FisherReport model tag",
    },
    "fisher-gauss": {
        "n": "background density (1/xi)",
        "dx": "pixel width (xi)",
        "state": "squeezed | thermal zero-mode state",
        "parameter": "zeta or tau (1/xi)",
        "F": "Gaussian-image Fisher information (1/xi^2)",
        "F_scaled": "F * xi^2",
        "crb_sigma": "1/sqrt(F) (xi)",
        "F_box_poisson": "Gaussian FI of diagonal mean-field Poisson statistics on the same pixels",
        "F_poisson_first": "exact Poisson pixel information (first sum only)",
        "F_snr_ao": "slope^2 / Var(S) of the almost-optimal gain",
        "fd_flag": "1 if halving fd_step changed F by more than 1%",
    },
    "modes": {
        "j": "mode index",
        "k": "wavenumber (1/xi)",
        "k_over_pi_l": "k in units of pi / l",
        "E": "Bogoliubov energy (hbar^2 / m xi^2)",
        "M": "normalization constant",
        "residual": "quantization residual",
    },
    "modes --table": {
        "j": "mode index",
        "x": "position (xi)",
        "re_u": "Re u_k(x)",
        "im_u": "Im u_k(x)",
        "re_v": "Re v_k(x)",
        "im_v": "Im v_k(x)",
    },
    "density": {
        "state": "squeezed | thermal",
        "parameter": "zeta or tau",
        "x": "position (xi)",
        "density": "mean density (1/xi)",
        "density_over_n": "mean density over n",
    },
    "corr": {"x": "position (xi)", "y": "position (xi)", "J": "correlation function J(x, y) (1/xi)"},
    "snr": {"(json)": "data.poisson and data.gaussian blocks: F, slope, variance, split, Monte Carlo result"},
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _state(args):
    if args.tau is not None and args.zeta is not None:
        raise ValueError("give either --zeta or --tau, not both")
    if args.tau is not None:
        return [("thermal", v) for v in io.parse_range(args.tau)]
    return [("squeezed", v) for v in io.parse_range(args.zeta if args.zeta is not None else "1")]


def _temp(args):
    return ThermalOccupation(float(args.beta))


def _map(func, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


# fisher-mf


def _mf_point(p):
    profile, method, n, nu, q, dx, window = p
    if profile == "dark":
        prm = DarkSolitonParams(n, nu, q)
    elif profile == "quintic":
        prm = QuinticSolitonParams(n, nu, q)
    else:
        prm = VortexParams(n, q=q)
    if method == "closed":
        if profile != "dark":
            raise ValueError("closed form only available for the dark soliton")
        rep = fisher_dark_soliton_closed(prm)
    elif method == "quadrature":
        rep = fisher_poisson_continuum(prm)
    else:
        if profile != "dark":
            raise ValueError("pixel sums only available for the dark soliton")
        grid = PixelGrid.from_window(window, dx)
        rep = (fisher_pixelized_poisson if method == "pixel" else fisher_poisson_pixels)(prm, grid)
    return [profile, method, n, nu, q, dx, rep.F, rep.F_scaled, rep.crb_sigma, rep.model]


def cmd_fisher_mf(args):
    method = args.method or ("closed" if args.profile == "dark" else "quadrature")
    pixel = method.startswith("pixel")
    if pixel and args.dx is None:
        raise ValueError(f"method {method} needs --dx")
    dxs = io.parse_range(args.dx) if pixel else [math.nan]
    pts = itertools.product(
        [args.profile], [method], io.parse_range(args.n_xi), io.parse_range(args.v_over_c),
        io.parse_range(args.q), dxs, [args.window],
    )
    rows = _map(_mf_point, pts, args.jobs)
    return "csv", list(SCHEMA["fisher-mf"]), rows


# fisher-gauss


def _gauss_point(p):
    n, dx, (kind, par), ell, pairs, fd, beta, q, want_stats = p
    modes = solve_wavenumbers(ell, pairs, n=n)
    state = zero_mode_state(kind, par, n, ell)
    grid = PixelGrid.from_window(ell, dx)
    fam = bogoliubov_family(modes, state, grid, ThermalOccupation(beta))
    rep = gaussian_fisher(fam, q, fd)
    box = gaussian_fisher(meanfield_family(DarkSolitonParams(n), grid), q, fd, check_step=False)
    first = fisher_poisson_pixels(DarkSolitonParams(n, q=q), grid).F
    stats = fam(q)
    drho = mean_slope(fam, q, fd)
    slope, var, _ = snr_and_split(stats, almost_optimal_gain(stats, drho), drho)
    flag = int(any("finite-difference" in w for w in rep.warnings))
    row = [n, dx, kind, par, rep.F, rep.F_scaled, rep.crb_sigma, box.F, first, snr_information(slope, var), flag]
    return row, (stats.to_dict() if want_stats else None)


def cmd_fisher_gauss(args):
    pts = itertools.product(
        io.parse_range(args.n_xi), io.parse_range(args.dx), _state(args),
        [args.half_length], [args.pairs], [args.fd_step], [float(args.beta)], [args.q], [bool(args.stats_out)],
    )
    out = _map(_gauss_point, pts, args.jobs)
    if args.stats_out:
        io.emit(io.json_text(io.metadata("fisher-gauss --stats-out", vars_clean(args)), [s for _, s in out]), args.stats_out)
    return "csv", list(SCHEMA["fisher-gauss"]), [r for r, _ in out]


# modes


def cmd_modes(args):
    ell = args.half_length
    modes = solve_wavenumbers(ell, args.pairs, n=args.n_xi)
    rows = [
        [int(j), k, k / (math.pi / ell), E, M, r]
        for j, k, E, M, r in zip(modes.j, modes.wavenumbers, modes.energies, modes.norms, modes.residuals())
        if j > 0 or args.both_signs
    ]
    if args.table:
        x = np.array(io.parse_range(args.x or f"{-ell}:{ell}:0.1"))
        U, V = modes.uv(x)
        table = [
            [int(j), xi, U[i, a].real, U[i, a].imag, V[i, a].real, V[i, a].imag]
            for i, j in enumerate(modes.j)
            if j > 0 or args.both_signs
            for a, xi in enumerate(x)
        ]
        meta = io.metadata("modes --table", vars_clean(args))
        io.emit(io.csv_text(meta, list(SCHEMA["modes --table"]), table), args.table)
    return "csv", list(SCHEMA["modes"]), rows


# density and corr


def _modes_for(args):
    base = solve_wavenumbers(args.half_length, args.pairs, n=args.n_xi)
    return PhononModeSet(args.half_length, base.wavenumbers, args.n_xi, args.q)


def cmd_density(args):
    modes = _modes_for(args)
    x = np.array(io.parse_range(args.x))
    states = _state(args)
    if args.tau is None and args.also_tau:
        states += [("thermal", v) for v in io.parse_range(args.also_tau)]
    rows = []
    for kind, par in states:
        st = zero_mode_state(kind, par, args.n_xi, args.half_length)
        d = mean_density_bogoliubov(modes, st, _temp(args), x)
        rows += [[kind, par, xi, di, di / args.n_xi] for xi, di in zip(x, d)]
    return "csv", list(SCHEMA["density"]), rows


def cmd_corr(args):
    modes = _modes_for(args)
    (kind, par), *rest = _state(args)
    if rest:
        raise ValueError("corr takes a single zero-mode state")
    st = zero_mode_state(kind, par, args.n_xi, args.half_length)
    x = np.array(io.parse_range(args.x))
    y = np.array(io.parse_range(args.y)) if args.y else x
    J = correlation_J(modes, st, x, y, _temp(args))
    rows = [[xi, yj, J[i, j]] for i, xi in enumerate(x) for j, yj in enumerate(y)]
    return "csv", list(SCHEMA["corr"]), rows


# snr


def cmd_snr(args):
    (kind, par), *rest = _state(args)
    if rest:
        raise ValueError("snr takes a single zero-mode state")
    n, ell, q = args.n_xi, args.half_length, args.q
    grid = PixelGrid.from_window(ell, args.dx)
    prm = DarkSolitonParams(n, q=q)
    mf = meanfield_family(prm, grid)
    s_mf = mf(q)
    g_opt = optimal_gain_meanfield(prm, grid)
    d_mf = pixel_slopes(prm, grid, q)
    F_mf = fisher_poisson_pixels(prm, grid).F
    slope, var, split = snr_and_split(s_mf, g_opt, d_mf)
    mc_mf = crb_experiment(s_mf, g_opt, d_mf, F_mf, args.samples, args.seed, "poisson", args.jobs)

    modes = solve_wavenumbers(ell, args.pairs, n=n)
    fam = bogoliubov_family(modes, zero_mode_state(kind, par, n, ell), grid, _temp(args))
    stats = fam(q)
    drho = mean_slope(fam, q, args.fd_step)
    g_ao = almost_optimal_gain(stats, drho)
    F_g = gaussian_fisher(fam, q, args.fd_step).F
    slope_g, var_g, split_g = snr_and_split(stats, g_ao, drho)
    mc_g = crb_experiment(stats, g_ao, drho, F_g, args.samples, args.seed + 1, "gaussian", args.jobs)

    rng = np.random.Generator(np.random.PCG64(args.seed))
    worst = 0.0
    for _ in range(args.random_gains):
        g = g_ao.__class__.normalized(grid, rng.standard_normal(grid.count))
        _, t, sp = snr_and_split(stats, g, drho)
        worst = max(worst, abs(sp.meanfield + sp.phonon - sp.goldstone - t) / abs(t))
    data = {
        "rng": RNG_ALGORITHM,
        "poisson": {
            "F": F_mf, "slope": slope, "variance": var, "information": snr_information(slope, var),
            "gain": g_opt.values, "monte_carlo": vars(mc_mf),
        },
        "gaussian": {
            "F": F_g, "slope": slope_g, "variance": var_g, "information": snr_information(slope_g, var_g),
            "split": split_g.to_dict(), "gain": g_ao.values, "ridge": g_ao.info.get("ridge", 0.0),
            "monte_carlo": vars(mc_g), "split_check_max_rel_error": worst,
        },
    }
    return "json", None, data


def vars_clean(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "config")}


def _common(p, jobs=True):
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--config", default=None, help="key=value file; command-line flags take precedence")
    if jobs:
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")


def _system(p, pairs=70):
    p.add_argument("--n-xi", type=float, default=100.0, help="background density n xi")
    p.add_argument("--half-length", type=float, default=10.0, help="box half-length l (xi)")
    p.add_argument("--pairs", type=int, default=pairs, help="phonon mode pairs (j = +-1 .. +-pairs)")
    p.add_argument("--q", type=float, default=0.0, help="soliton position (xi)")
    p.add_argument("--beta", default="inf", help="phonon inverse temperature (inf = T 0)")


def _states(p):
    p.add_argument("--zeta", default=None, help="squeezing parameter(s), range syntax")
    p.add_argument("--tau", default=None, help="thermal zero-mode parameter(s) (1/xi), range syntax")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="soliton-imaging", description=__doc__.splitlines()[0])
    parser.add_argument("--schema", action="store_true", help="print the CSV column documentation and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("fisher-mf", help="mean-field Poisson Fisher information sweeps")
    p.add_argument("--profile", choices=["dark", "quintic", "vortex"], default="dark")
    p.add_argument("--method", choices=["closed", "quadrature", "pixel", "pixel-poisson"], default=None)
    p.add_argument("--n-xi", default="100", help="density (range syntax start:stop:step)")
    p.add_argument("--v-over-c", default="0", help="velocity over sound speed (range)")
    p.add_argument("--q", default="0", help="soliton position (range)")
    p.add_argument("--dx", default=None, help="pixel width (range), pixel methods only")
    p.add_argument("--window", type=float, default=30.0, help="half-width of the pixel row (xi)")
    _common(p)
    p.set_defaults(func=cmd_fisher_mf)

    p = sub.add_parser("fisher-gauss", help="Gaussian Fisher information with Bogoliubov statistics")
    p.add_argument("--n-xi", default="100", help="density (range)")
    p.add_argument("--dx", default="0.7", help="pixel width (range)")
    p.add_argument("--half-length", type=float, default=10.0)
    p.add_argument("--pairs", type=int, default=70)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--beta", default="inf")
    p.add_argument("--fd-step", type=float, default=1e-3)
    p.add_argument("--stats-out", default=None, help="also write the image statistics as JSON")
    _states(p)
    _common(p)
    p.set_defaults(func=cmd_fisher_gauss)

    p = sub.add_parser("modes", help="phonon wavenumbers, energies and mode tables")
    p.add_argument("--half-length", type=float, default=10.0)
    p.add_argument("--pairs", type=int, default=3)
    p.add_argument("--n-xi", type=float, default=100.0)
    p.add_argument("--both-signs", action="store_true", help="include j < 0")
    p.add_argument("--table", default=None, help="write u, v mode functions to this CSV")
    p.add_argument("--x", default=None, help="positions for --table (range)")
    _common(p, jobs=False)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("density", help="mean density profiles across the notch")
    _system(p)
    _states(p)
    p.add_argument("--also-tau", default=None, help="extra thermal states to tabulate alongside --zeta")
    p.add_argument("--x", default="-5:5:0.1")
    _common(p, jobs=False)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("corr", help="J(x, y) on a grid")
    _system(p)
    _states(p)
    p.add_argument("--x", default="-5:5:0.25")
    p.add_argument("--y", default=None)
    _common(p, jobs=False)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("snr", help="gains, noise split and Monte Carlo check of the Cramer-Rao bound")
    _system(p)
    _states(p)
    p.add_argument("--dx", type=float, default=0.7)
    p.add_argument("--fd-step", type=float, default=1e-3)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-gains", type=int, default=20)
    _common(p)
    p.set_defaults(func=cmd_snr)
    return parser, sub


def _parse(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        return args
    if args.command is None:
        raise CliError("a command is required (or --schema)")
    if args.config:
        cfg = io.read_config(args.config)
        sp = sub.choices[args.command]
        dests = {a.dest for a in sp._actions}
        unknown = sorted(set(cfg) - dests - {"config"})
        if unknown:
            raise CliError(f"unknown config key(s): {', '.join(unknown)}")
        flags = {a.dest for a in sp._actions if isinstance(a, argparse._StoreTrueAction)}
        for key in flags & set(cfg):
            cfg[key] = cfg[key].lower() in ("1", "true", "yes", "on")
        sp.set_defaults(**{k: v for k, v in cfg.items() if k != "config"})
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    try:
        args = _parse(argv)
        if args.schema:
            sys.stdout.write(json.dumps(SCHEMA, indent=1, sort_keys=True) + "\n")
            return 0
        kind, columns, data = args.func(args)
        meta = io.metadata(args.command, vars_clean(args))
        text = io.csv_text(meta, columns, data) if kind == "csv" else io.json_text(meta, data)
        io.emit(text, args.out)
        return 0
    except CliError as exc:
        sys.stderr.write(json.dumps({"error": "usage", "message": str(exc), "command": command}) + "\n")
        return 2
    except Exception as exc:  # every module error becomes one machine-readable line
        record = {"error": type(exc).__name__, "message": str(exc), "command": command}
        sys.stderr.write(json.dumps(record) + "\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
