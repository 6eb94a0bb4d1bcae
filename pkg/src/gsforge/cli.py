"""Command-line front end: gsforge <command> [flags].

Commands: compile, verify, estimate, sweep, budget, oracle. Flags can
also come from a flat JSON config (--config); explicit flags win.
Exit codes: 0 success, 1 validation/usage error, 2 verification failure
or analytic-vs-oracle band violation. Identical inputs produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .fidelity import (PRESETS, DeviceParams, FidelityReport, SweepSpec,
                       Axis, cluster_fidelity, tree_fidelity, rgs_fidelity,
                       error_budget, sweep)
from .oracle import ORACLE_BAND, band_check, noisy_state_fidelity
from .protocols import (compile_cluster, compile_tree, compile_rgs,
                        compile_shor_logical, lower, census,
                        shor_membership_failures, target_of)
from .simulator import verify


class CliError(Exception):
    """Validation problem; reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


_FLAG_SPECS = (
    ("protocol", str, ("cluster", "tree", "rgs", "shor")),
    ("k", int, None), ("n", int, None),
    ("b0", int, None), ("b1", int, None),
    ("flavor", str, ("ff", "tf")),
    ("strategy", str, ("parallel", "sequential")),
    ("preset", str, None),
    ("tau", float, None), ("fsq", float, None), ("fcr", float, None),
    ("fcnot", float, None), ("fcz", float, None), ("fm", float, None),
    ("femit", float, None),
    ("trials", int, None), ("seed", int, None),
    ("out", str, None),
    ("format", str, ("json", "csv", "text")),
    ("config", str, None),
    ("fig", str, ("3a", "3b", "3c", "3d", "6a", "6b")),
    ("method", str, ("dense", "pauli_mc")),
    ("metric", str, ("fidelity", "infidelity", "max_size")),
    ("fmin", float, None),
    ("axis1", str, None), ("axis2", str, None),
)

# config files may also set coherence times, which have no flags
_CONFIG_ONLY = (("t1", float), ("t2", float))
_CONVERTERS = {name: conv for name, conv, _ in _FLAG_SPECS}
_CONVERTERS.update(dict(_CONFIG_ONLY))
_CHOICES = {name: choices for name, _, choices in _FLAG_SPECS if choices}

COMMANDS = ("compile", "verify", "estimate", "sweep", "budget", "oracle")


def _build_parser() -> _Parser:
    parser = _Parser(prog="gsforge", description=__doc__)
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)
    for command in COMMANDS:
        sp = subs.add_parser(command)
        for name, conv, choices in _FLAG_SPECS:
            sp.add_argument(f"--{name}", type=conv, choices=choices,
                            default=None)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise CliError(f"config is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise CliError("config must be a flat JSON object")
    values = {}
    for key, value in raw.items():
        if key not in _CONVERTERS:
            raise CliError(f"unknown config key {key!r}")
        try:
            values[key] = _CONVERTERS[key](value)
        except (TypeError, ValueError):
            raise CliError(
                f"config key {key!r}: cannot read {value!r} as "
                f"{_CONVERTERS[key].__name__}")
        if key in _CHOICES and values[key] not in _CHOICES[key]:
            raise CliError(f"config key {key!r}: must be one of "
                           f"{', '.join(_CHOICES[key])}")
    return values


def _merge(ns: argparse.Namespace) -> dict:
    merged = dict(getattr(ns, "config_values", {}))
    if ns.config is not None:
        merged.update(_load_config(ns.config))
    for name, _, _ in _FLAG_SPECS:
        flag = getattr(ns, name)
        if flag is not None:
            merged[name] = flag
    return merged


def _need(m: dict, *keys) -> list:
    missing = [k for k in keys if m.get(k) is None]
    if missing:
        raise CliError("missing " + ", ".join(f"--{k}" for k in missing))
    return [m[k] for k in keys]


def _device_params(m: dict) -> DeviceParams:
    preset = m.get("preset")
    overrides = {}
    for src, dst in (("fsq", "f_sq"), ("fcr", "f_cr"), ("fcnot", "f_cnot"),
                     ("fcz", "f_cz"), ("fm", "f_m"), ("femit", "f_emit"),
                     ("tau", "tau"), ("t1", "t1"), ("t2", "t2")):
        if m.get(src) is not None:
            overrides[dst] = m[src]
    if preset is not None:
        if preset not in PRESETS:
            raise CliError(f"unknown preset {preset!r} (have: "
                           f"{', '.join(sorted(PRESETS))})")
        base = PRESETS[preset]
        if m.get("flavor") is not None and m["flavor"] != base.flavor:
            raise CliError(
                f"--flavor {m['flavor']} contradicts preset {preset}")
        return replace(base, **overrides) if overrides else base
    (flavor,) = _need(m, "flavor")
    overrides.setdefault("f_sq", 1.0)
    overrides.setdefault("f_m", 1.0)
    overrides.setdefault("t1", 1.0)
    overrides.setdefault("t2", 1.0)
    overrides.setdefault("tau", 0.0)
    return DeviceParams(flavor=flavor, **overrides)


def _flavor_of(m: dict) -> str | None:
    if m.get("flavor") is not None:
        return m["flavor"]
    if m.get("preset") in PRESETS:
        return PRESETS[m["preset"]].flavor
    return None


def _compiled(m: dict):
    (protocol,) = _need(m, "protocol")
    flavor = _flavor_of(m)
    strategy = m.get("strategy") or "parallel"
    if protocol == "shor":
        c = compile_shor_logical()
        return lower(c, flavor) if flavor is not None else c
    if flavor is None:
        raise CliError("missing --flavor (or a --preset implying one)")
    if protocol == "cluster":
        k, n = _need(m, "k", "n")
        return compile_cluster(k, n, flavor)
    if protocol == "tree":
        b0, b1 = _need(m, "b0", "b1")
        return compile_tree(b0, b1, flavor, strategy=strategy)
    b0, = _need(m, "b0")
    return compile_rgs(b0, flavor, strategy=strategy)


def _write(m: dict, content: str) -> None:
    if not content.endswith("\n"):
        content += "\n"
    out = m.get("out")
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
    else:
        sys.stdout.write(content)


def _format(m: dict, default: str = "text") -> str:
    return m.get("format") or default


def _factor_table(report: FidelityReport) -> str:
    lines = [f"{report.total:.3f}",
             f"{'source':<13}{'base':<13}exponent"]
    for f in report.factors:
        lines.append(f"{f.source:<13}{f.base:<13.6g}{f.exponent}")
    return "\n".join(lines)


def _cmd_compile(m: dict) -> int:
    c = _compiled(m)
    fmt = _format(m)
    if fmt == "text":
        _write(m, c.to_text())
    elif fmt == "json":
        _write(m, json.dumps({
            "name": c.name, "flavor": c.flavor, "n_qubits": c.n_qubits,
            "census": census(c), "text": c.to_text(),
        }, separators=(",", ":")))
    else:
        raise CliError("compile supports --format text or json")
    return 0


def _cmd_verify(m: dict) -> int:
    c = _compiled(m)
    if m.get("protocol") == "shor":
        failures = shor_membership_failures(c)
        ok = not failures
        fmt = _format(m)
        if fmt == "json":
            _write(m, json.dumps({"target": "shor-logical", "all_pass": ok,
                                  "failures": failures},
                                 separators=(",", ":")))
        else:
            if ok:
                _write(m, f"verified {c.name}: all expected stabilizer "
                          "rows present")
            else:
                _write(m, f"verification FAILED for {c.name}: missing rows\n"
                          + "\n".join(failures))
        return 0 if ok else 2
    report = verify(c, target_of(c))
    fmt = _format(m)
    if fmt == "json":
        _write(m, report.to_json())
    else:
        if report.all_pass:
            _write(m, f"verified {c.name}: {report.branches_checked} "
                      "measurement branches, all match the target")
        else:
            _write(m, f"verification FAILED for {c.name}: "
                      f"{report.first_failure}")
    return 0 if report.all_pass else 2


def _closed_form(m: dict, p: DeviceParams) -> FidelityReport:
    (protocol,) = _need(m, "protocol")
    strategy = m.get("strategy") or "parallel"
    if protocol == "cluster":
        k, n = _need(m, "k", "n")
        return cluster_fidelity(k, n, p)
    if protocol == "tree":
        b0, b1 = _need(m, "b0", "b1")
        return tree_fidelity(b0, b1, p, strategy=strategy)
    if protocol == "rgs":
        b0, = _need(m, "b0")
        return rgs_fidelity(b0, p, strategy=strategy)
    raise CliError(f"no closed-form estimate for protocol {protocol!r}")


def _cmd_estimate(m: dict) -> int:
    p = _device_params(m)
    report = _closed_form(m, p)
    fmt = _format(m)
    if fmt == "text":
        _write(m, _factor_table(report))
    elif fmt == "json":
        _write(m, report.to_json())
    else:
        lines = ["source,base,exponent"]
        lines += [f"{f.source},{f.base:.9g},{f.exponent}"
                  for f in report.factors]
        lines.append(f"total,{report.total:.9g},")
        _write(m, "\n".join(lines))
    return 0


_BUDGET_LABELS = ("baseline", "no-SQG-error", "no-2QG-error",
                  "no-measurement-error", "no-idle-error")


def _cmd_budget(m: dict) -> int:
    p = _device_params(m)
    b0, b1 = _need(m, "b0", "b1")
    strategy = m.get("strategy") or "parallel"
    reports = error_budget(b0, b1, p, strategy=strategy)
    fmt = _format(m)
    if fmt == "text":
        _write(m, "\n".join(f"{label:<22}{r.total:.3f}"
                            for label, r in zip(_BUDGET_LABELS, reports)))
    elif fmt == "json":
        _write(m, json.dumps({
            "variants": [{"label": label, **json.loads(r.to_json())}
                         for label, r in zip(_BUDGET_LABELS, reports)],
        }, separators=(",", ":")))
    else:
        lines = ["variant,total"]
        lines += [f"{label},{r.total:.9g}"
                  for label, r in zip(_BUDGET_LABELS, reports)]
        _write(m, "\n".join(lines))
    return 0


# figure presets: 41x41 grids over (two-qubit fidelity, emission window)
_FIG_SWEEPS = {
    "3a": ("cluster", {"k": 2, "n": 8}, "ff-tableIV", "fidelity",
           (("f_2qg", 0.92, 1.0), ("tau", 0.2e-6, 1.0e-6))),
    "3b": ("cluster", {"k": 2, "f_min": 0.8}, "ff-tableIV", "max_size",
           (("f_2qg", 0.92, 1.0), ("tau", 0.2e-6, 1.0e-6))),
    "3c": ("cluster", {"k": 2, "n": 8}, "tf-tableIV", "fidelity",
           (("f_2qg", 0.99, 1.0), ("tau", 0.1e-6, 1.0e-6))),
    "3d": ("cluster", {"k": 2, "f_min": 0.8}, "tf-tableIV", "max_size",
           (("f_2qg", 0.99, 1.0), ("tau", 0.1e-6, 1.0e-6))),
    "6a": ("tree", {"b0": 6, "b1": 1}, "ff-tableIV", "fidelity",
           (("f_2qg", 0.98, 0.999), ("tau", 0.1e-6, 0.9e-6))),
    "6b": ("tree", {"b0": 6, "b1": 1}, "tf-tableIV", "fidelity",
           (("f_2qg", 0.98, 0.999), ("tau", 0.1e-6, 0.9e-6))),
}


def _parse_axis(text: str) -> Axis:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise CliError(f"axis {text!r}: want name:lo:hi:steps[:log]")
    try:
        return Axis(parts[0], float(parts[1]), float(parts[2]),
                    int(parts[3]), parts[4] if len(parts) == 5 else "linear")
    except ValueError as exc:
        raise CliError(f"axis {text!r}: {exc}")


def _sweep_spec(m: dict) -> SweepSpec:
    if m.get("fig") is not None:
        fig = m["fig"]
        if fig not in _FIG_SWEEPS:
            raise CliError(f"unknown figure preset {fig!r}")
        protocol, sizes, preset, metric, axes = _FIG_SWEEPS[fig]
        params = _device_params(m) if m.get("preset") or m.get("flavor") \
            else PRESETS[preset]
        return SweepSpec(protocol, sizes,
                         tuple(Axis(name, lo, hi, 41) for name, lo, hi in axes),
                         params, metric)
    (protocol,) = _need(m, "protocol")
    sizes = {key: m[key] for key in ("k", "n", "b0", "b1")
             if m.get(key) is not None}
    if m.get("fmin") is not None:
        sizes["f_min"] = m["fmin"]
    if m.get("strategy") is not None:
        sizes["strategy"] = m["strategy"]
    axes = [_parse_axis(m[key]) for key in ("axis1", "axis2")
            if m.get(key) is not None]
    if not axes:
        raise CliError("missing --axis1 (or --fig preset)")
    return SweepSpec(protocol, sizes, tuple(axes), _device_params(m),
                     m.get("metric") or "fidelity")


def _sweep_csv(spec: SweepSpec, rows: list) -> str:
    header = "axis1,metric" if len(spec.axes) == 1 else "axis1,axis2,metric"
    lines = [header]
    lines += [",".join(f"{value:.9g}" for value in row) for row in rows]
    return "\n".join(lines)


def _cmd_sweep(m: dict) -> int:
    spec = _sweep_spec(m)
    rows = sweep(spec)
    fmt = _format(m, default="csv")
    if fmt == "csv":
        _write(m, _sweep_csv(spec, rows))
    elif fmt == "json":
        _write(m, json.dumps({
            "axes": [a.name for a in spec.axes], "metric": spec.metric,
            "rows": rows}, separators=(",", ":")))
    else:
        names = [a.name for a in spec.axes] + [spec.metric]
        lines = ["  ".join(f"{n:>12}" for n in names)]
        lines += ["  ".join(f"{v:>12.6g}" for v in row) for row in rows]
        _write(m, "\n".join(lines))
    if m.get("out") and fmt == "csv":
        from .plotting import render_sweep

        png = str(Path(m["out"]).with_suffix(".png"))
        render_sweep(rows, tuple(a.name for a in spec.axes), spec.metric,
                     png, title=f"{spec.protocol} {spec.metric}")
    return 0


def _cmd_oracle(m: dict) -> int:
    c = _compiled(m)
    p = _device_params(m)
    result = noisy_state_fidelity(
        c, p, method=m.get("method") or "dense",
        trials=m.get("trials") or 100_000, seed=m.get("seed") or 0)
    applies, worst, ops = band_check(c, p)
    fmt = _format(m)
    if fmt == "json":
        _write(m, result.to_json())
    else:
        lines = [f"method    {result.method}",
                 f"estimate  {result.estimate:.6f}"]
        if result.trials is not None:
            lines.insert(1, f"trials    {result.trials}")
            lines.append(f"std_err   {result.std_err:.6f}")
        lines.append(f"analytic  {result.analytic:.6f}")
        lines.append(f"delta     {result.delta:+.6f}")
        if applies:
            verdict = "within" if abs(result.delta) <= ORACLE_BAND else "OUTSIDE"
            lines.append(f"band      {verdict} {ORACLE_BAND} "
                         f"(worst infidelity {worst:.4g}, {ops} noisy ops)")
        else:
            lines.append(f"band      not applicable "
                         f"(worst infidelity {worst:.4g}, {ops} noisy ops)")
        _write(m, "\n".join(lines))
    if applies and abs(result.delta) > ORACLE_BAND:
        return 2
    return 0


_HANDLERS = {
    "compile": _cmd_compile, "verify": _cmd_verify,
    "estimate": _cmd_estimate, "sweep": _cmd_sweep,
    "budget": _cmd_budget, "oracle": _cmd_oracle,
}


def dispatch(argv: list) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise CliError("missing command "
                           f"(one of: {', '.join(COMMANDS)})")
        return _HANDLERS[ns.command](_merge(ns))
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse -h
        return int(exc.code or 0)


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
