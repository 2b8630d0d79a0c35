"""Command line interface: ``qgland solve | bound | verify | spec | cases``.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import inspect
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .archive import (
    envelope_rows,
    load_eigen_archive,
    read_envelope_csv,
    save_eigen_archive,
    write_envelope_csv,
    write_manifest,
)
from .cases import _BUILDERS, CASES, build_case_study
from .exceptions import BadParameters, InputError, NumericalFailure
from .pipeline import CLI_METHODS, NEEDS_PSI, auto_envelopes, envelopes_for, stitch
from .specfile import GraphSpec, dump_spec, load_spec, spec_hash
from .spectral import solve

CONFIG_ENV = "QGLAND_CONFIG"
DEFAULTS = {"h": 0.02, "levels": 3, "k": 6, "n": 512, "out": "qgland-out"}
_INT_KEYS = {"k", "levels", "n", "index"}
_RUN_KEYS = {"k", "h", "levels", "E", "index", "n"}


def load_config(path=None):
    cfg = dict(DEFAULTS)
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise BadParameters(f"cannot read config {path}: {exc}") from None
        unknown = set(data) - set(DEFAULTS) - {"tau", "delta_t", "ratio", "shift"}
        if unknown:
            raise BadParameters(f"unknown config keys {sorted(unknown)}")
        cfg.update(data)
    return cfg


def _parse_pairs(pairs):
    out = {}
    for item in pairs:
        if "=" not in item:
            raise BadParameters(f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        try:
            if key in _INT_KEYS:
                out[key] = int(val)
            elif key == "mu":
                out[key] = tuple(float(x) for x in val.split(","))
            else:
                out[key] = float(val)
        except ValueError:
            raise BadParameters(f"bad value for {key}: {val!r}") from None
    return out


class Target:
    """A graph spec file or a named case study with its parameters."""

    def __init__(self, name, pairs):
        params = _parse_pairs(pairs)
        self.name = name
        self.case = None
        if name in CASES:
            accepted = set(inspect.signature(_BUILDERS[name]).parameters)
            build = {k: v for k, v in params.items() if k in accepted}
            if "n" in build:
                build["n"] = int(build["n"])
            unknown = set(params) - accepted - _RUN_KEYS
            if unknown:
                raise BadParameters(f"{name} does not take {sorted(unknown)}")
            self.case = build_case_study(name, **build)
            self.spec = GraphSpec(self.case.graph, self.case.potential,
                                  {"shift": self.case.shift} if self.case.shift else {})
            self.builder_params = build
        elif os.path.exists(name):
            self.spec = load_spec(name)
            unknown = set(params) - _RUN_KEYS
            if unknown:
                raise BadParameters(f"spec files take only {sorted(_RUN_KEYS)}, got {sorted(unknown)}")
            self.builder_params = {}
        else:
            raise BadParameters(f"{name!r} is neither a spec file nor a case study ({', '.join(CASES)})")
        self.run = {k: v for k, v in params.items() if k in _RUN_KEYS}

    @property
    def graph(self):
        return self.spec.graph

    @property
    def potential(self):
        return self.spec.potential

    @property
    def shift(self):
        return self.spec.shift

    def reference_pair(self):
        return None if self.case is None else self.case.reference.get("eigenpair")


def _opt(args, target, key, cfg):
    v = getattr(args, key, None)
    if v is None:
        v = target.run.get(key)
    if v is None:
        v = cfg.get(key)
    return v


def _resolve_eigenpair(args, target, cfg, required):
    """Eigenpair from an archive, a closed-form reference, or a fresh solve."""
    index = _opt(args, target, "index", {})
    E = _opt(args, target, "E", {})
    if getattr(args, "eigen", None):
        spec, pairs = load_eigen_archive(args.eigen)
        if spec_hash(spec) != spec_hash(target.spec):
            raise BadParameters("eigen archive was computed for a different graph spec")
        if index is not None:
            match = [p for p in pairs if p.index == index]
            if not match:
                raise BadParameters(f"archive has no eigenpair {index}")
            return match[0], {"source": "archive", "index": index}
        p = min(pairs, key=lambda p: abs(p.energy - E)) if E is not None else pairs[0]
        return p, {"source": "archive", "index": p.index}
    ref = target.reference_pair()
    if ref is not None and index is None and (E is None or math.isclose(E, ref.energy, rel_tol=1e-9)):
        return ref, {"source": "closed-form"}
    if not required and E is not None and index is None:
        return None, {"source": "none"}
    h, levels = float(_opt(args, target, "h", cfg)), int(_opt(args, target, "levels", cfg))
    if index is None and E is not None:
        pairs = solve(target.graph, target.potential, int(_opt(args, target, "k", cfg)), h=h, levels=levels)
        p = min(pairs, key=lambda p: abs(p.energy - E))
        return p, {"source": "solve", "index": p.index, "h": h, "levels": levels}
    idx = 0 if index is None else index
    pairs = solve(target.graph, target.potential, idx + 1, h=h, levels=levels)
    return pairs[idx], {"source": "solve", "index": idx, "h": h, "levels": levels}


def _manifest(command, target, extra):
    return {"command": command, "target": target.name, "builder_params": target.builder_params,
            "spec_sha256": spec_hash(target.spec), "shift": target.shift, "version": __version__, **extra}


# --------------------------------------------------------------------------

def cmd_solve(args, cfg):
    target = Target(args.target, args.params)
    k = int(_opt(args, target, "k", cfg))
    h = float(_opt(args, target, "h", cfg))
    levels = int(_opt(args, target, "levels", cfg))
    pairs = solve(target.graph, target.potential, k, h=h, levels=levels)
    out = args.out or cfg["out"]
    files = save_eigen_archive(out, target.spec, pairs)
    write_manifest(os.path.join(out, "manifest.json"), _manifest("solve", target, {
        "solver": {"k": k, "h": h, "levels": levels, "tol": 1e-8},
        "energies": [p.energy for p in pairs],
        "energies_unshifted": [p.energy - target.shift for p in pairs],
        "outputs": files}))
    for p in pairs:
        print(f"{p.index}\t{p.energy!r}")
    return 0


def cmd_bound(args, cfg):
    target = Target(args.target, args.params)
    method = args.method
    needs = method in NEEDS_PSI or method == "auto"
    pair, src = _resolve_eigenpair(args, target, cfg, required=needs or _opt(args, target, "E", {}) is None)
    E = _opt(args, target, "E", {})
    E = float(pair.energy if E is None else E)
    if method in NEEDS_PSI and not math.isclose(E, pair.energy, rel_tol=1e-6, abs_tol=1e-9):
        raise BadParameters(f"method {method} uses the eigenpair at E = {pair.energy:.10g}, not E = {E:g}; "
                            "pass --index or an energy from the spectrum")
    n = int(_opt(args, target, "n", cfg))
    shift = args.shift if args.shift is not None else float(cfg.get("shift", 0.0))
    kw = {"ell": args.ell, "delta": args.delta, "E_m": args.em, "tau": args.tau if args.tau is not None
          else cfg.get("tau")}
    if method == "auto":
        thresholds = {k: cfg[k] for k in ("delta_t", "ratio") if k in cfg}
        if kw["tau"] is not None:
            thresholds["tau"] = kw["tau"]
        labelled = auto_envelopes(target.graph, target.potential, E, pair, shift=shift, n=n,
                                  thresholds=thresholds, **kw)
        rows = stitch(labelled, target.graph, n)
    else:
        envs = envelopes_for(method, target.graph, target.potential, E, pair, shift=shift, **kw)
        rows = envelope_rows([(method, e) for e in envs], n)
        labelled = [(method, e) for e in envs]
    out = args.out or os.path.join(cfg["out"], f"envelope-{method}.csv")
    write_envelope_csv(out, rows)
    prov = [{"label": lab, **{k: v for k, v in env.provenance.items() if not callable(v)}} for lab, env in labelled]
    write_manifest(os.path.splitext(out)[0] + ".manifest.json", _manifest("bound", target, {
        "method": method, "energy": E, "energy_unshifted": E - target.shift, "eigenpair": src,
        "bound": {"n": n, "torsion_shift": shift, **kw}, "provenance": prov, "outputs": [os.path.basename(out)]}))
    print(f"{len(rows)} rows -> {out}")
    return 0


def cmd_verify(args, cfg):
    target = Target(args.target, args.params)
    pair, src = _resolve_eigenpair(args, target, cfg, required=True)
    tol = args.tol if args.tol is not None else 1e-6 * max(1.0, pair.sup_norm())
    failed = False
    report = []
    for path in args.envelope:
        data = read_envelope_csv(path, target.graph)
        worst, where, count = math.inf, None, 0
        for eid, (s, vals, _) in data.items():
            m = vals - np.abs(pair.values(eid, s))
            i = int(np.argmin(m))
            if m[i] < worst:
                worst, where = float(m[i]), (eid, float(s[i]))
            count += int(np.sum(m < -tol))
        ok = worst >= -tol
        failed |= not ok
        report.append({"envelope": path, "worst_margin": worst, "at": where, "violations": count, "pass": ok})
        print(f"{'PASS' if ok else 'FAIL'} {path}: worst margin {worst:.6e} at {where}, {count} violations")
    if args.report:
        write_manifest(args.report, _manifest("verify", target, {"eigenpair": src, "tol": tol, "results": report}))
    return 1 if failed else 0


def cmd_spec(args, cfg):
    target = Target(args.target, args.params)
    text = dump_spec(target.spec)
    if args.out:
        from .archive import atomic_write

        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_cases(args, cfg):
    for name in CASES:
        params = ", ".join(f"{k}={v.default!r}" for k, v in inspect.signature(_BUILDERS[name]).parameters.items()
                           if k != "n_samples")
        print(f"{name}\t{params}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="qgland", description=__doc__.splitlines()[0])
    p.add_argument("--config", help=f"JSON defaults (else ${CONFIG_ENV})")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("target", help="graph spec file or case-study name")
        sp.add_argument("params", nargs="*", help="key=value case parameters and run options")
        sp.add_argument("--h", type=float)
        sp.add_argument("--levels", type=int)
        sp.add_argument("--out")

    sp = sub.add_parser("solve", help="eigenpairs to an archive directory")
    common(sp)
    sp.add_argument("-k", type=int)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bound", help="envelope CSV for one method")
    common(sp)
    sp.add_argument("--method", choices=CLI_METHODS, default="auto")
    sp.add_argument("--energy", dest="E", type=float)
    sp.add_argument("--index", type=int)
    sp.add_argument("--eigen", help="eigen archive directory from 'solve'")
    sp.add_argument("--n", type=int)
    sp.add_argument("--ell", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--em", type=float, help="E_m for the davies/oscillation bounds")
    sp.add_argument("--tau", type=float)
    sp.add_argument("--shift", type=float, help="energy shift for the torsion landscape")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("verify", help="check envelope CSVs against |psi|")
    common(sp)
    sp.add_argument("--envelope", nargs="+", required=True)
    sp.add_argument("--eigen")
    sp.add_argument("--energy", dest="E", type=float)
    sp.add_argument("--index", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--report", help="write a JSON report here")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("spec", help="print the graph spec of a target")
    sp.add_argument("target")
    sp.add_argument("params", nargs="*")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_spec)

    sp = sub.add_parser("cases", help="list case studies")
    sp.set_defaults(func=cmd_cases)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
