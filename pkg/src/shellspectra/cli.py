"""Command-line front end for the shell-lattice spectral toolbox.

Every computation the library exposes is reachable as a subcommand with
CSV or JSON output, so plots and golden-file comparisons never need a
Python session.  Configuration comes from an optional TOML file plus flag
overrides (flags win); the effective configuration is echoed into a
``.meta.json`` sidecar next to ``--out`` so a result can always be
reproduced from its artifacts.

Output determinism: payloads contain no timestamps and floats are printed
with 17 significant digits (exact double round-trip), so identical inputs
give byte-identical files.  Run metadata, including the timestamp, lives
only in the sidecar.

Exit codes: 0 on success, 2 for configuration or parameter errors, 3 for
numerical failures.  Errors print a single line ``error: <category>:
<message>`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

import numpy as np

from .errors import ConfigError, NumericsError, ParameterError
from .interaction import (
    InteractionParams,
    LatticeGeometry,
    classify,
    make_interaction,
)
from .kronig1d import asymptotics_report, ground_state_symmetry
from .oracle import refine_eigenvalues
from .radial import ChannelSpec, count_wronskian_zeros, locate_eigenvalues
from .spectral_map import (
    build_spectrum_map,
    gap_eigenvalues,
    m_function_estimate,
    transfer_norm_profile,
)
from .welsh import find_welsh_eigenvalues

_INTERACTION_KEYS = ("alpha", "beta", "gamma", "delta", "chi")
_GEOMETRY_KEYS = ("d", "offset", "count_hint")

# command-specific [scan] keys; unknown keys are rejected, missing ones
# fall back to the defaults below
_SCAN_KEYS: dict[str, tuple[str, ...]] = {
    "bands": ("max_bands",),
    "classify": (),
    "ground-symmetry": (),
    "spectrum-map": ("nu", "e_cutoff", "l_max", "r_max"),
    "transfer-norm": ("nu", "l", "energy", "x0", "periods"),
    "gap-eigs": ("nu", "gap_index", "l_min", "l_max", "r_max"),
    "welsh": ("nu", "n_wanted", "r_max"),
    "m-function": ("nu", "l", "energy", "epsilon", "r_max"),
    "oracle-check": ("nu", "l", "window_lo", "window_hi", "grid_cells", "r_max", "trials"),
}

_SCAN_DEFAULTS: dict[str, object] = {
    "max_bands": 24,
    "nu": 3,
    "l": 0,
    "l_min": 0,
    "l_max": 8,
    "e_cutoff": None,
    "energy": None,
    "epsilon": "1e-3",
    "x0": None,
    "periods": 64,
    "gap_index": 0,
    "n_wanted": 4,
    "r_max": None,
    "window_lo": None,
    "window_hi": None,
    "grid_cells": 65,
    "trials": 0,
}


def _fmt(x: float) -> str:
    """17-significant-digit float text; exact round trip for doubles."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def _json_text(obj, indent: int = 0) -> str:
    """Deterministic JSON with the fixed float format and sorted keys."""
    pad = "  " * indent
    pad_in = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        body = ",\n".join(
            f"{pad_in}{json.dumps(str(k))}: {_json_text(v, indent + 1)}"
            for k, v in items
        )
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        body = ",\n".join(f"{pad_in}{_json_text(v, indent + 1)}" for v in seq)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


class RunConfig:
    """Effective configuration: file values overridden by flags.

    ``echo()`` returns the full merged configuration with every recognized
    key present, so a run is reproducible from the sidecar alone.
    """

    def __init__(self, command: str, args: argparse.Namespace):
        file_cfg = self._load_file(args.config) if args.config else {}
        self._check_sections(file_cfg)
        inter = dict(file_cfg.get("interaction", {}))
        geomc = dict(file_cfg.get("geometry", {}))
        scan = dict(file_cfg.get("scan", {}))
        self._check_keys("interaction", inter, _INTERACTION_KEYS)
        self._check_keys("geometry", geomc, _GEOMETRY_KEYS)
        self._check_keys("scan", scan, _SCAN_KEYS[command])

        for key in _INTERACTION_KEYS:
            flag = getattr(args, key, None)
            if flag is not None:
                inter[key] = flag
        for key in _GEOMETRY_KEYS:
            flag = getattr(args, key, None)
            if flag is not None:
                geomc[key] = flag
        for key in _SCAN_KEYS[command]:
            flag = getattr(args, key.replace("-", "_"), None)
            if flag is not None:
                scan[key] = flag

        self.command = command
        self.params = make_interaction(
            float(inter.get("alpha", 0.0)),
            float(inter.get("beta", 0.0)),
            float(inter.get("gamma", 1.0)),
            float(inter.get("delta", 1.0)),
            float(inter.get("chi", 0.0)),
        )
        d = float(geomc.get("d", 1.0))
        geom_kwargs = {"d": d}
        if "offset" in geomc:
            geom_kwargs["offset"] = float(geomc["offset"])
        if "count_hint" in geomc:
            geom_kwargs["count_hint"] = int(geomc["count_hint"])
        self.geometry = LatticeGeometry(**geom_kwargs)
        self.scan = {k: scan.get(k, _SCAN_DEFAULTS[k]) for k in _SCAN_KEYS[command]}
        self.jobs = int(args.jobs) if args.jobs else (os.cpu_count() or 1)
        self.seed = args.seed

    @staticmethod
    def _load_file(path: str) -> dict:
        try:
            with open(path, "rb") as fh:
                return tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad TOML in {path}: {exc}") from exc

    @staticmethod
    def _check_sections(cfg: dict) -> None:
        unknown = set(cfg) - {"interaction", "geometry", "scan"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    @staticmethod
    def _check_keys(section: str, mapping: dict, allowed: tuple[str, ...]) -> None:
        unknown = set(mapping) - set(allowed)
        if unknown:
            raise ConfigError(
                f"unknown keys in [{section}]: {sorted(unknown)} "
                f"(allowed: {sorted(allowed)})"
            )

    def channel(self) -> ChannelSpec:
        return ChannelSpec(int(self.scan["nu"]), int(self.scan["l"]))

    def r_max(self, default_factor: float = None) -> float:
        val = self.scan.get("r_max")
        if val is not None:
            return float(val)
        if default_factor is not None:
            return default_factor * self.geometry.d
        return self.geometry.r_max_default()

    def echo(self) -> dict:
        p = self.params
        return {
            "command": self.command,
            "interaction": {k: getattr(p, k) for k in _INTERACTION_KEYS},
            "geometry": {
                "d": self.geometry.d,
                "offset": self.geometry.offset,
                "count_hint": self.geometry.count_hint,
            },
            "scan": {k: v for k, v in sorted(self.scan.items())},
            "jobs": self.jobs,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# subcommand implementations: each returns (payload dict, csv header, csv rows)

def cmd_bands(cfg: RunConfig):
    rep = asymptotics_report(cfg.params, cfg.geometry, int(cfg.scan["max_bands"]))
    rows = [
        [r.index, r.e_lower, r.e_upper, r.width_e, r.width_k, r.gap_after_e, r.gap_after_k]
        for r in rep.rows
    ]
    payload = {
        "classification": rep.classification.kind.value,
        "predicted_asymptote": rep.classification.predicted_asymptote,
        "measured_constant": rep.measured_constant,
        "fitted_mu": rep.fitted_mu,
        "single_band": rep.single_band,
        "bands": [
            {
                "index": r.index,
                "e_lower": r.e_lower,
                "e_upper": r.e_upper,
                "width_e": r.width_e,
                "width_k": r.width_k,
                "gap_after_e": r.gap_after_e,
                "gap_after_k": r.gap_after_k,
            }
            for r in rep.rows
        ],
    }
    header = ["index", "e_lower", "e_upper", "width_e", "width_k", "gap_after_e", "gap_after_k"]
    return payload, header, rows


def cmd_classify(cfg: RunConfig):
    cls = classify(cfg.params, cfg.geometry)
    payload = {
        "kind": cls.kind.value,
        "predicted_asymptote": cls.predicted_asymptote,
        "mu_exponent": cls.mu_exponent,
        "quantity": cls.quantity,
    }
    header = ["kind", "predicted_asymptote", "mu_exponent", "quantity"]
    return payload, header, [[cls.kind.value, cls.predicted_asymptote, cls.mu_exponent, cls.quantity]]


def cmd_ground_symmetry(cfg: RunConfig):
    gs = ground_state_symmetry(cfg.params, cfg.geometry)
    payload = {
        "e0": gs.e0,
        "symmetry": gs.symmetry,
        "discriminant_value": gs.discriminant_value,
        "residual": gs.residual,
        "matches_sign_rule": gs.matches_sign_rule,
    }
    header = ["e0", "symmetry", "discriminant_value", "residual", "matches_sign_rule"]
    return payload, header, [[gs.e0, gs.symmetry, gs.discriminant_value, gs.residual, gs.matches_sign_rule]]


def cmd_spectrum_map(cfg: RunConfig):
    nu = _require_nu(int(cfg.scan["nu"]))
    d = cfg.geometry.d
    e_cutoff = cfg.scan["e_cutoff"]
    e_cutoff = float(e_cutoff) if e_cutoff is not None else (4.5 * math.pi / d) ** 2
    smap = build_spectrum_map(
        cfg.params,
        cfg.geometry,
        nu,
        e_cutoff,
        (0, int(cfg.scan["l_max"])),
        cfg.r_max(),
    )
    rows = [list(row) for row in smap.csv_rows()]
    return smap.as_dict(), ["record", "a", "b", "c"], rows


def cmd_transfer_norm(cfg: RunConfig):
    if cfg.scan["energy"] is None:
        raise ConfigError("transfer-norm needs an energy (--energy or scan.energy)")
    e = float(cfg.scan["energy"])
    d = cfg.geometry.d
    x0 = float(cfg.scan["x0"]) if cfg.scan["x0"] is not None else 4.0 * d
    prof = transfer_norm_profile(
        cfg.channel(), cfg.params, cfg.geometry, e, x0, int(cfg.scan["periods"])
    )
    payload = {
        "energy": prof.energy,
        "sup_norm": prof.sup_norm,
        "growth_rate": prof.growth_rate,
        "radii": list(prof.radii),
        "log_norms": list(prof.log_norms),
    }
    rows = [[r, ln] for r, ln in zip(prof.radii, prof.log_norms)]
    return payload, ["radius", "log_norm"], rows


def cmd_gap_eigs(cfg: RunConfig):
    nu = _require_nu(int(cfg.scan["nu"]))
    l_lo, l_hi = int(cfg.scan["l_min"]), int(cfg.scan["l_max"])
    if l_hi < l_lo:
        raise ConfigError(f"l_max {l_hi} below l_min {l_lo}")
    gap_index = int(cfg.scan["gap_index"])
    r_max = cfg.r_max()

    def one(l: int) -> tuple[int, list[float]]:
        found = gap_eigenvalues(
            cfg.params, cfg.geometry, nu, gap_index, (l, l), r_max
        )
        return l, found.get(l, [])

    ls = list(range(l_lo, l_hi + 1))
    if cfg.jobs > 1 and len(ls) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = dict(pool.map(one, ls))
    else:
        results = dict(one(l) for l in ls)
    payload = {
        "gap_index": gap_index,
        "eigenvalues": {str(l): results[l] for l in ls},
    }
    rows = [[l, e] for l in ls for e in results[l]]
    return payload, ["l", "eigenvalue"], rows


def cmd_welsh(cfg: RunConfig, trace_out: str | None = None):
    nu = int(cfg.scan["nu"])
    if nu != 2:
        raise ConfigError(
            f"welsh eigenvalues need nu = 2; for nu = {nu} the channel "
            "potentials are nonnegative and nothing lies below the band bottom"
        )
    rep = find_welsh_eigenvalues(
        cfg.params,
        cfg.geometry,
        int(cfg.scan["n_wanted"]),
        cfg.r_max(default_factor=1000.0),
    )
    evidence = dict(rep.unbounded_evidence)
    evidence["verdict"] = evidence["verdict"].value
    trace = evidence.pop("trace", None)
    payload = {
        "e0": rep.e0,
        "eigenvalues_found": rep.eigenvalues_found,
        "matching_defects": rep.matching_defects,
        "phase_drop": rep.phase_drop,
        "requested": rep.requested,
        "shortfall": rep.shortfall,
        "truncation_radius": rep.truncation_radius,
        "unbounded_evidence": evidence,
    }
    if trace_out and trace is not None:
        with open(trace_out, "w", encoding="utf-8") as fh:
            fh.write(_trace_csv(trace))
    rows = [[i, e, d] for i, (e, d) in enumerate(zip(rep.eigenvalues_found, rep.matching_defects))]
    return payload, ["index", "eigenvalue", "matching_defect"], rows


def _trace_csv(trace) -> str:
    rows = [
        [r, phi, gamma]
        for r, phi, gamma in zip(trace.radii, trace.phi, trace.gamma_phase)
    ]
    header = [f"# jump_sum = {_fmt(trace.jump_sum)}"]
    return "\n".join(header) + "\n" + _csv_text(["r", "phi", "gamma"], rows)


def cmd_m_function(cfg: RunConfig):
    if cfg.scan["energy"] is None:
        raise ConfigError("m-function needs an energy (--energy or scan.energy)")
    e = float(cfg.scan["energy"])
    eps_spec = cfg.scan["epsilon"]
    if isinstance(eps_spec, str):
        eps_list = [float(tok) for tok in eps_spec.split(",") if tok.strip()]
    elif isinstance(eps_spec, (list, tuple)):
        eps_list = [float(x) for x in eps_spec]
    else:
        eps_list = [float(eps_spec)]
    if not eps_list:
        raise ConfigError("empty epsilon list")
    ch = cfg.channel()
    r_max = cfg.r_max()
    ests = [
        m_function_estimate(ch, cfg.params, cfg.geometry, e, eps, r_max)
        for eps in eps_list
    ]
    payload = {
        "energy": e,
        "estimates": [
            {"epsilon": m.epsilon, "im_m": m.im_m, "abs_m": m.abs_m} for m in ests
        ],
    }
    rows = [[m.epsilon, m.im_m, m.abs_m] for m in ests]
    return payload, ["epsilon", "im_m", "abs_m"], rows


def cmd_oracle_check(cfg: RunConfig):
    trials = int(cfg.scan["trials"])
    if trials > 0:
        return _oracle_check_random(cfg, trials)
    if cfg.scan["window_lo"] is None or cfg.scan["window_hi"] is None:
        raise ConfigError("oracle-check needs window_lo and window_hi (or --trials)")
    lo, hi = float(cfg.scan["window_lo"]), float(cfg.scan["window_hi"])
    result = _oracle_check_one(
        cfg.channel(), cfg.params, cfg.geometry,
        (lo, hi), cfg.r_max(), int(cfg.scan["grid_cells"]),
    )
    rows = [
        [i, a, b, abs(a - b)]
        for i, (a, b) in enumerate(zip(result["radial"], result["oracle"]))
    ]
    return result, ["index", "radial", "oracle", "abs_diff"], rows


def _oracle_check_one(ch, p, geom, window, r_max, cells) -> dict:
    domain = (1e-3 * geom.d, r_max)
    n_radial = count_wronskian_zeros(ch, p, geom, window[0], window[1], domain)
    eig_radial = locate_eigenvalues(ch, p, geom, window, domain=domain)
    k = max(n_radial + 6, 10)
    extrap, _, _ = refine_eigenvalues(ch, p, geom, (0.0, r_max), k, base_cells=cells)
    eig_oracle = [float(e) for e in extrap if window[0] < e < window[1]]
    n_oracle = len(eig_oracle)
    diffs = [abs(a - b) for a, b in zip(eig_radial, eig_oracle)]
    return {
        "window": list(window),
        "count_radial": n_radial,
        "count_oracle": n_oracle,
        "counts_agree": n_radial == n_oracle,
        "radial": eig_radial,
        "oracle": eig_oracle,
        "max_position_diff": max(diffs) if diffs else 0.0,
    }


def _oracle_check_random(cfg: RunConfig, trials: int):
    from .kronig1d import band_structure

    rng = np.random.default_rng(cfg.seed if cfg.seed is not None else 0)
    geom = cfg.geometry
    reports = []
    for t in range(trials):
        p = _random_params(rng)
        nu = int(rng.integers(2, 4))
        l = int(rng.integers(0, 3))
        bs = band_structure(p, geom, e_max=(2.41 * math.pi / geom.d) ** 2 * 4)
        if not bs.gaps:
            reports.append({"trial": t, "skipped": "no open gap"})
            continue
        lo, hi = bs.gaps[0]
        margin = 1e-3 * (hi - lo)
        result = _oracle_check_one(
            ChannelSpec(nu, l), p, geom,
            (lo + margin, hi - margin), 40.25 * geom.d, 65,
        )
        result["trial"] = t
        result["nu"], result["l"] = nu, l
        reports.append(result)
    agree = all(r.get("counts_agree", True) for r in reports)
    payload = {"trials": trials, "all_counts_agree": agree, "reports": reports}
    rows = [
        [r["trial"], r.get("count_radial", ""), r.get("count_oracle", ""),
         r.get("max_position_diff", "")]
        for r in reports
    ]
    return payload, ["trial", "count_radial", "count_oracle", "max_position_diff"], rows


def _random_params(rng: np.random.Generator) -> InteractionParams:
    """Random valid parameters covering all three interaction families."""
    kind = rng.integers(0, 3)
    if kind == 0:
        return make_interaction(float(rng.uniform(-3, 3)), 0.0, 1.0, 1.0)
    if kind == 1:
        gamma = float(rng.choice([-1, 1]) * rng.uniform(1.3, 2.2))
        return make_interaction(0.0, 0.0, gamma, 1.0 / gamma)
    alpha = float(rng.uniform(-1, 1))
    beta = float(rng.choice([-1, 1]) * rng.uniform(0.3, 2.0))
    gamma = float(rng.uniform(0.7, 1.4))
    delta = (alpha * beta + 1.0) / gamma
    return make_interaction(alpha, beta, gamma, delta)


def _require_nu(nu: int) -> int:
    if nu < 2:
        raise ConfigError(f"dimension nu must be >= 2, got {nu}")
    return nu


_COMMANDS = {
    "bands": cmd_bands,
    "classify": cmd_classify,
    "ground-symmetry": cmd_ground_symmetry,
    "spectrum-map": cmd_spectrum_map,
    "transfer-norm": cmd_transfer_norm,
    "gap-eigs": cmd_gap_eigs,
    "welsh": cmd_welsh,
    "m-function": cmd_m_function,
    "oracle-check": cmd_oracle_check,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--out", help="write payload here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--jobs", type=int, help="worker threads (default: cores)")
    common.add_argument("--seed", type=int, help="seed for randomized sweeps")
    for key in _INTERACTION_KEYS:
        common.add_argument(f"--{key}", type=float)
    common.add_argument("--d", type=float, help="lattice period")
    common.add_argument("--offset", type=float, help="first shell position")
    common.add_argument("--count-hint", dest="count_hint", type=int)

    parser = argparse.ArgumentParser(
        prog="shellspectra",
        description="spectra of radially periodic singular-shell Hamiltonians",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    specs = {
        "bands": ("band/gap table with asymptotics", [("--max-bands", int)]),
        "classify": ("interaction family and predicted asymptote", []),
        "ground-symmetry": ("symmetry of the state at the spectral bottom", []),
        "spectrum-map": (
            "ac/dense-point decomposition up to a cutoff",
            [("--nu", int), ("--e-cutoff", float), ("--l-max", int), ("--r-max", float)],
        ),
        "transfer-norm": (
            "transfer-matrix norm profile at one energy",
            [("--nu", int), ("--l", int), ("--energy", float), ("--x0", float), ("--periods", int)],
        ),
        "gap-eigs": (
            "channel eigenvalues inside one gap",
            [("--nu", int), ("--gap-index", int), ("--l-min", int), ("--l-max", int), ("--r-max", float)],
        ),
        "welsh": (
            "eigenvalues below the band bottom (nu = 2 only)",
            [("--nu", int), ("--n-wanted", int), ("--r-max", float)],
        ),
        "m-function": (
            "boundary m-function estimates on an epsilon ladder",
            [("--nu", int), ("--l", int), ("--energy", float), ("--epsilon", str), ("--r-max", float)],
        ),
        "oracle-check": (
            "cross-check eigenvalue counts against the grid oracle",
            [("--nu", int), ("--l", int), ("--window-lo", float), ("--window-hi", float),
             ("--grid-cells", int), ("--r-max", float), ("--trials", int)],
        ),
    }
    for name, (help_text, extra) in specs.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        for flag, typ in extra:
            sp.add_argument(flag, type=typ, dest=flag.lstrip("-").replace("-", "_"))
        if name == "welsh":
            sp.add_argument("--trace-out", help="also write the Kepler trace CSV here")
    return parser


def _emit(args: argparse.Namespace, cfg: RunConfig, payload, header, rows) -> None:
    if args.format == "csv":
        text = _csv_text(header, rows)
    else:
        text = _json_text(payload) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        meta = {
            "config": cfg.echo(),
            "format": args.format,
            "written": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        with open(args.out + ".meta.json", "w", encoding="utf-8") as fh:
            fh.write(_json_text(meta) + "\n")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.command, args)
        if args.command == "welsh":
            payload, header, rows = cmd_welsh(cfg, trace_out=args.trace_out)
        else:
            payload, header, rows = _COMMANDS[args.command](cfg)
        _emit(args, cfg, payload, header, rows)
    except ParameterError as exc:
        print(f"error: parameter: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"error: numerics: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
