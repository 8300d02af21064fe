"""
Command-line front end.

    optomagnon spectrum --preset fig2e --out runs/
    optomagnon spectrum --preset fig3a --sweep G_c2=0,2,4,8MHz
    optomagnon delay    --preset fig6b --step-check
    optomagnon windows  --preset fig2c
    optomagnon windows  --input runs/spectrum_fig2e.csv
    optomagnon verify   --seed 42 --out runs/

Spectrum CSV columns (UTF-8, header row, 17 significant digits):
delta_over_omega_b, re_eps_out, im_eps_out, re_T, im_T, phi_rad, tau_s.
Each CSV gets a ``.manifest.json`` sidecar.  Exit codes: 1 verification
failed, 2 bad config or arguments, 3 singular point on the grid.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, oracle
from .model import ConfigError, SweepSpec, build_params, emit_config, paper_preset, PRESETS
from .response import evaluate, step_halving_ratio, sweep_spectra
from .steady_state import BistabilityError, DegenerateDriveError

CSV_COLUMNS = ("delta_over_omega_b", "re_eps_out", "im_eps_out", "re_T", "im_T", "phi_rad", "tau_s")
_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}

EXIT_VERIFY_FAIL, EXIT_CONFIG, EXIT_SINGULAR = 1, 2, 3


def _fmt(v) -> str:
    return format(float(v), ".17g")


def parse_sweep(text: str) -> tuple[str, tuple[float, ...]]:
    """``name=v1,v2,...[unit]`` with an optional Hz/kHz/MHz/GHz suffix on the list."""
    if "=" not in text:
        raise ConfigError(f"--sweep expects name=values, got {text!r}")
    name, vals = text.split("=", 1)
    vals = vals.strip()
    scale = 1.0
    low = vals.lower()
    for unit in sorted(_UNITS, key=len, reverse=True):
        if low.endswith(unit):
            scale, vals = _UNITS[unit], vals[: -len(unit)]
            break
    try:
        values = tuple(float(v) * scale for v in vals.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad sweep values in {text!r}") from None
    if not values:
        raise ConfigError(f"sweep {name!r} has no values")
    return name.strip(), values


def _load(args):
    """Resolve (params, sweep, source label) from --preset/--config and grid flags."""
    if (args.preset is None) == (args.config is None):
        raise ConfigError("give exactly one of --preset or --config")
    if args.preset is not None:
        params, sweep = paper_preset(args.preset)
        source = args.preset
    else:
        with open(args.config, encoding="utf-8") as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: {exc}") from None
        params = build_params(cfg)
        sweep = SweepSpec()
        source = Path(args.config).stem
    lo, hi = sweep.delta_min, sweep.delta_max
    if args.range is not None:
        try:
            lo, hi = (float(v) for v in args.range.split(","))
        except ValueError:
            raise ConfigError(f"--range expects lo,hi, got {args.range!r}") from None
    n = sweep.n_points if args.points is None else args.points
    swept = sweep.swept_param if args.sweep is None else parse_sweep(args.sweep)
    return params, SweepSpec(lo, hi, n, swept), source


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
         else _dt.datetime.now(_dt.timezone.utc))
    return t.replace(microsecond=0).isoformat()


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


_DIMENSIONLESS = {"theta", "lambda_over_kappa_c", "eps_p"}


def _label(name, value) -> str:
    if name in _DIMENSIONLESS or name.endswith("_rad_s"):
        return f"{value:g}"
    return f"{value / 1e6:g}MHz"


def _stem(cmd, source, swept, value):
    stem = f"{cmd}_{source}"
    if swept is not None:
        stem += f"_{swept[0]}={_label(swept[0], value)}"
    return stem


def write_spectrum_csv(path: Path, spec, x=None) -> None:
    """``x`` overrides delta/omega_b (pass the nominal grid to avoid rescaling round-off)."""
    x = spec.x if x is None else x
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in zip(x, spec.eps_out.real, spec.eps_out.imag, spec.T.real, spec.T.imag,
                       spec.Phi, spec.tau):
            w.writerow([_fmt(v) for v in row])


def read_spectrum_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """(delta_over_omega_b, re_eps_out) columns of a spectrum CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "delta_over_omega_b" not in rows[0] or "re_eps_out" not in rows[0]:
        raise ConfigError(f"{path}: needs delta_over_omega_b and re_eps_out columns")
    x = np.array([float(r["delta_over_omega_b"]) for r in rows])
    y = np.array([float(r["re_eps_out"]) for r in rows])
    return x, y


def _manifest(cmd, args, params, sweep, value, files, ledger):
    return {
        "command": cmd,
        "arguments": {"points": args.points, "range": args.range, "sweep": args.sweep, "tol": args.tol},
        "preset": args.preset,
        "config_file": args.config,
        "parameters_hz": emit_config(params),
        "swept": None if sweep.swept_param is None else {"name": sweep.swept_param[0], "value": value},
        "grid": {"delta_min_over_omega_b": sweep.delta_min, "delta_max_over_omega_b": sweep.delta_max,
                 "n_points": sweep.n_points},
        "strict_paper_kappa": args.strict_paper_kappa,
        "files": files,
        "tool_version": __version__,
        "timestamp": _timestamp(),
        "discrepancy_ledger": ledger,
    }


def _run_spectra(cmd, args):
    params, sweep, source = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = sweep_spectra(params, sweep, args.strict_paper_kappa)
    singular = []
    written = []
    for value, spec in results:
        stem = _stem(cmd, source, sweep.swept_param, value)
        csv_path = out / f"{stem}.csv"
        write_spectrum_csv(csv_path, spec, sweep.grid())
        rep = oracle.verify_closed_form(spec.state, spec.delta, args.tol)
        ledger = {"max_rel_err": rep.max_rel_err, "pass": rep.passed, "tolerance": args.tol}
        p = spec.state.params
        _write_json(out / f"{stem}.manifest.json",
                    _manifest(cmd, args, p, sweep, value, [csv_path.name], ledger))
        written.append((value, spec, stem))
        for i, msg in sorted(spec.errors.items()):
            singular.append(f"{stem}: delta/omega_b = {spec.x[i]:.17g}: {msg}")
        print(f"wrote {csv_path} ({len(spec)} rows)")
    return written, singular, out, sweep


def cmd_spectrum(args) -> int:
    _, singular, _, _ = _run_spectra("spectrum", args)
    if singular:
        print("singular points:\n  " + "\n  ".join(singular), file=sys.stderr)
        return EXIT_SINGULAR
    return 0


def cmd_delay(args) -> int:
    written, singular, out, sweep = _run_spectra("delay", args)
    rows = []
    for value, spec, stem in written:
        wb = spec.state.params.omega_b1
        ext = analysis.delay_extrema(spec.state, spec.delta, args.strict_paper_kappa)
        for d, tau, kind in ext:
            row = {"swept_value": "" if value is None else _fmt(value),
                   "label": "-" if value is None else _label(sweep.swept_param[0], value),
                   "delta_over_omega_b": _fmt(d / wb), "tau_s": _fmt(tau), "kind": kind}
            if args.step_check:
                r = step_halving_ratio(spec.state, np.array([d]), strict_paper_kappa=args.strict_paper_kappa)
                row["step_halving_ratio"] = _fmt(r[0])
            rows.append(row)
    src = args.preset or Path(args.config).stem
    path = out / f"delay_{src}_extrema.csv"
    cols = ["label", "swept_value", "delta_over_omega_b", "tau_s", "kind"] + (
        ["step_halving_ratio"] if args.step_check else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    params = written[0][1].state.params
    _write_json(out / f"delay_{src}_extrema.manifest.json",
                _manifest("delay", args, params, sweep, None, [path.name], None))
    name = sweep.swept_param[0] if sweep.swept_param else "-"
    print(f"{name:>20} {'delta/omega_b':>14} {'tau [us]':>12} {'kind':>10}"
          + (f" {'step ratio':>11}" if args.step_check else ""))
    for r in rows:
        print(f"{r['label']:>20} {float(r['delta_over_omega_b']):14.6f} "
              f"{float(r['tau_s']) * 1e6:12.4f} {r['kind']:>10}"
              + (f" {float(r['step_halving_ratio']):11.2e}" if args.step_check else ""))
    if singular:
        print("singular points:\n  " + "\n  ".join(singular), file=sys.stderr)
        return EXIT_SINGULAR
    return 0


def cmd_windows(args) -> int:
    if args.input is not None:
        x, y = read_spectrum_csv(args.input)
        rep = analysis.find_windows((x, y), args.prominence)
        fano = analysis.fano_asymmetry((x, y), center=args.center, half_width=args.half_width)
        result = {"source": str(args.input), **rep.as_dict(), "fano_asymmetry": fano.asymmetry,
                  "fano_center_over_omega_b": fano.center}
    else:
        params, sweep, source = _load(args)
        results = []
        for value, spec in sweep_spectra(params, sweep, args.strict_paper_kappa):
            rep = analysis.find_windows((spec.x, spec.eps_out.real), args.prominence)
            fano = analysis.fano_asymmetry((spec.x, spec.eps_out.real),
                                           center=args.center, half_width=args.half_width)
            results.append({"swept_value": value, **rep.as_dict(), "fano_asymmetry": fano.asymmetry,
                            "fano_center_over_omega_b": fano.center})
        result = {"source": source, **results[0]} if len(results) == 1 else {
            "source": source, "swept_param": sweep.swept_param[0], "reports": results}
    text = json.dumps(result, indent=2, sort_keys=True)
    print(text)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = "windows_" + (Path(args.input).stem if args.input else result["source"])
        (out / f"{stem}.json").write_text(text + "\n", encoding="utf-8")
    return 0


def cmd_verify(args) -> int:
    ledger = oracle.discrepancy_ledger(args.tol, args.seed, args.draws)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "discrepancy_ledger.json", ledger)
    for r in ledger["presets"]:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {r['label']:<40} max_rel_err={r['max_rel_err']:.3e}")
    rnd = ledger["random"]
    print(f"{'PASS' if rnd['pass'] else 'FAIL'} random draws: {rnd['n_pass']}/{rnd['n_checked']} "
          f"(singular {rnd['n_singular']}), max_rel_err={rnd['max_rel_err']:.3e}")
    for a in ledger["coefficient_audit"]["readings"]:
        print(f"     'A.' read as {a['a_reading']:<13} first deviating coefficient: {a['first_deviating']}")
    status = "PASS" if ledger["pass"] else "FAIL"
    print(f"{status}: max_rel_err = {max(ledger['presets_max_rel_err'], rnd['max_rel_err']):.3e} "
          f"(tol {args.tol:g}); ledger in {out / 'discrepancy_ledger.json'}")
    return 0 if ledger["pass"] else EXIT_VERIFY_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optomagnon", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_default="."):
        p.add_argument("--preset", choices=list(PRESETS))
        p.add_argument("--config", help="JSON config file (Hz units)")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--points", type=int, help="grid points (default 4001)")
        p.add_argument("--range", help="lo,hi in units of omega_b (default 0,2)")
        p.add_argument("--sweep", help="name=v1,v2,...[Hz|kHz|MHz|GHz]")
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--strict-paper-kappa", action="store_true",
                       help="use kappa_a instead of kappa_c in the transmission")

    p = sub.add_parser("spectrum", help="absorption/dispersion, transmission, phase, delay on a grid")
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("delay", help="spectrum plus a table of group-delay extrema")
    common(p)
    p.add_argument("--step-check", action="store_true", help="print step-halving ratios")
    p.set_defaults(func=cmd_delay)

    p = sub.add_parser("windows", help="transparency-window report as JSON")
    common(p, out_default=None)
    p.add_argument("--input", help="spectrum CSV to analyse instead of a preset/config")
    p.add_argument("--prominence", type=float, default=0.05)
    p.add_argument("--center", type=float, default=1.0, help="Fano mirror point, delta/omega_b")
    p.add_argument("--half-width", type=float, default=0.5, help="Fano half width, delta/omega_b")
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("verify", help="closed form vs sideband-matrix oracle")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BistabilityError, DegenerateDriveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR


if __name__ == "__main__":
    sys.exit(main())
