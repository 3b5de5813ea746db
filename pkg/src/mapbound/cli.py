"""Batch command-line front end.

Four subcommands: `bounds` evaluates the theoretical accuracy bounds for a
support, `simulate` runs one Monte Carlo experiment, `sweep` produces the
standard figure tables or a generic one-parameter sweep, and `presets`
writes the canonical map files. Everything emits versioned CSV (leading
`# schema=1` line, comma separated, 15 significant digits) to stdout or a
file, and every random quantity is pinned by --seed, so reruns are
byte-identical.

Exit codes: 0 success, 2 invalid input, 3 numeric failure.
"""

from __future__ import annotations

import math
import sys

import click

from .bounds import (
    DEFAULT_JS,
    CondFim,
    PriorFim,
    bcrb,
    ezzb_1d,
    ezzb_2d,
    prior_fim_1d,
    prior_fim_2d,
    wwb_1d,
    wwb_2d,
)
from .errors import NumericError, ValidationError
from .estimators import GaussianObsModel, RangingObsModel
from .geometry import RectMap, SegmentUnion, load_map, save_map
from .montecarlo import ExperimentConfig, SweepRow, run_experiment, sweep
from .presets import (
    FIG4_RHO,
    FIG5_DX,
    FIG6_DX,
    FIG6_W,
    FIG7_AREA,
    FIG7_H2,
    FIG7_W1,
    FIG7_W2,
    FIG8_SIGMA,
    SIGMA_DEFAULT,
    FixedAreaLShape,
    LShapeGeometry,
    TwoSegmentGeometry,
    corner_anchors,
    floor_bounding_box,
    floor_map,
    map2_map,
)

EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

_FAMILIES = ("bcrb", "ezzb", "wwb")
_SEED_DEFAULT = 1729


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Map library errors onto the exit-code contract."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FileNotFoundError as exc:
            _fail(EXIT_VALIDATION, f"map file not found: {exc.filename}")
        except ValidationError as exc:
            _fail(EXIT_VALIDATION, str(exc))
        except (NumericError, FloatingPointError, OverflowError) as exc:
            _fail(EXIT_NUMERIC, str(exc))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.15g}"
    return str(value)


def _emit_csv(header, rows, output):
    lines = ["# schema=1", ",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


def _resolve_sigmas(sigma, sigma_x, sigma_y):
    if sigma is not None:
        if sigma_x is not None or sigma_y is not None:
            raise ValidationError("give either --sigma or --sigma-x/--sigma-y, not both")
        pairs = (("sigma", sigma),)
        sigma_x = sigma_y = sigma
    else:
        if sigma_x is None or sigma_y is None:
            raise ValidationError("sigma: provide --sigma or both --sigma-x and --sigma-y")
        pairs = (("sigma-x", sigma_x), ("sigma-y", sigma_y))
    for name, v in pairs:
        if not (v > 0.0 and math.isfinite(v)):
            raise ValidationError(f"{name} must be positive and finite, got {v}")
    return sigma_x, sigma_y


def _resolve_map(map_path, preset, w, dx, w1, w2, h1, h2, bounding_box):
    """Exactly one map source; returns (support, geometry or None)."""
    if (map_path is None) == (preset is None):
        raise ValidationError("map source: give exactly one of --map or --preset")
    if map_path is not None:
        return load_map(map_path), None
    if preset == "map1":
        geom = TwoSegmentGeometry(w, dx)
        return geom.build(), geom
    if preset == "map2":
        geom = LShapeGeometry(w1, w2, h1, h2)
        return geom.build(), geom
    if preset == "floor":
        return (floor_bounding_box() if bounding_box else floor_map()), None
    raise ValidationError(f"unknown preset {preset!r}")


def _parse_anchors(spec: str, support):
    if spec == "corners":
        if isinstance(support, SegmentUnion):
            raise ValidationError("anchors: corner anchors need a 2-D map")
        return corner_anchors(support)
    try:
        pairs = [
            tuple(float(v) for v in chunk.split(","))
            for chunk in spec.split(";")
            if chunk.strip()
        ]
    except ValueError:
        raise ValidationError(f"anchors: cannot parse {spec!r}")
    if any(len(p) != 2 for p in pairs):
        raise ValidationError("anchors: each entry needs exactly x,y")
    return tuple(pairs)


def _parse_values(spec: str):
    """Either 'start:step:stop' (inclusive) or a comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValidationError(f"values: expected start:step:stop, got {spec!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0.0:
            raise ValidationError("values: step must be positive")
        out = []
        k = 0
        while True:
            v = start + k * step
            if v > stop + 1e-9 * max(1.0, abs(stop)):
                break
            out.append(v)
            k += 1
        if not out:
            raise ValidationError(f"values: no values in {spec!r}")
        return out
    try:
        out = [float(p) for p in spec.split(",") if p.strip()]
    except ValueError:
        raise ValidationError(f"values: cannot parse {spec!r}")
    if not out:
        raise ValidationError(f"values: no values in {spec!r}")
    return out


_map_source_options = [
    click.option("--map", "map_path", type=str, default=None,
                 help="Map file (JSON) as produced by `presets`."),
    click.option("--preset", type=click.Choice(["map1", "map2", "floor"]),
                 default=None, help="Built-in geometry."),
    click.option("--w", type=float, default=1.0, show_default=True,
                 help="map1 segment width."),
    click.option("--dx", type=float, default=1.0, show_default=True,
                 help="map1 segment separation."),
    click.option("--w1", type=float, default=5.0, show_default=True),
    click.option("--w2", type=float, default=5.0, show_default=True),
    click.option("--h1", type=float, default=5.0, show_default=True),
    click.option("--h2", type=float, default=5.0, show_default=True),
    click.option("--bounding-box", is_flag=True,
                 help="Use the floor plan's bounding box instead of the rooms."),
]


def _add_options(options):
    def deco(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return deco


@click.group()
def main():
    """Accuracy bounds and Monte Carlo RMSE for map-aware positioning."""


@main.command("bounds")
@_add_options(_map_source_options)
@click.option("--sigma", type=float, default=None, help="Isotropic noise spread (m).")
@click.option("--sigma-x", type=float, default=None)
@click.option("--sigma-y", type=float, default=None)
@click.option("--js", type=float, default=DEFAULT_JS, show_default=True,
              help="Edge-smoothing information of the prior.")
@click.option("--bounds", "families", type=str, default="bcrb,ezzb,wwb",
              show_default=True, help="Comma list of bound families.")
@click.option("-o", "--output", type=str, default=None, help="CSV path (default stdout).")
@_guarded
def cmd_bounds(map_path, preset, w, dx, w1, w2, h1, h2, bounding_box,
               sigma, sigma_x, sigma_y, js, families, output):
    """Theoretical bounds for one support: one row per family per axis."""
    support, _ = _resolve_map(map_path, preset, w, dx, w1, w2, h1, h2, bounding_box)
    sx, sy = _resolve_sigmas(sigma, sigma_x, sigma_y)
    selected = tuple(f.strip().lower() for f in families.split(",") if f.strip())
    for f in selected:
        if f not in _FAMILIES:
            raise ValidationError(f"bounds: unknown family {f!r}")
    rows = []
    if isinstance(support, SegmentUnion):
        values = {}
        diag = {}
        if "bcrb" in selected:
            prior = PriorFim(j_x=prior_fim_1d(support, js))
            values["bcrb"] = bcrb(prior, CondFim(j_zx=1.0 / sx**2)).b_x
            diag["bcrb"] = ""
        if "ezzb" in selected:
            values["ezzb"] = ezzb_1d(support, sx)
            diag["ezzb"] = ""
        if "wwb" in selected:
            r = wwb_1d(support, sx)
            values["wwb"] = r.value
            diag["wwb"] = f"h_opt={_fmt(r.h_opt)};degenerate={r.degenerate}"
        for f in selected:
            rows.append((f, "x", values[f], math.sqrt(values[f]), diag[f]))
    else:
        pairs = {}
        diag = {}
        if "bcrb" in selected:
            prior = prior_fim_2d(support, js)
            cond = CondFim(j_zx=1.0 / sx**2, j_zy=1.0 / sy**2)
            pairs["bcrb"] = bcrb(prior, cond)
            diag["bcrb"] = ("", "")
        if "ezzb" in selected:
            pairs["ezzb"] = ezzb_2d(support, sx, sy)
            diag["ezzb"] = ("", "")
        if "wwb" in selected:
            bp = wwb_2d(support, sx, sy)
            pairs["wwb"] = bp
            d = bp.diagnostics or {}
            diag["wwb"] = (
                f"h_opt={_fmt(d.get('h_opt_x'))};degenerate={d.get('degenerate_x')}",
                f"h_opt={_fmt(d.get('h_opt_y'))};degenerate={d.get('degenerate_y')}",
            )
        for f in selected:
            bp = pairs[f]
            rows.append((f, "x", bp.b_x, math.sqrt(bp.b_x), diag[f][0]))
            rows.append((f, "y", bp.b_y, math.sqrt(bp.b_y), diag[f][1]))
    _emit_csv(
        ("family", "axis", "value_m2", "sqrt_value_m", "diagnostics"), rows, output
    )


def _build_model(model_name, support, sx, sy, anchors_spec):
    if model_name == "gaussian":
        return GaussianObsModel(sx, sy)
    return RangingObsModel(_parse_anchors(anchors_spec, support), sx)


@main.command("simulate")
@_add_options(_map_source_options)
@click.option("--sigma", type=float, default=None, help="Isotropic noise spread (m).")
@click.option("--sigma-x", type=float, default=None)
@click.option("--sigma-y", type=float, default=None)
@click.option("--model", "model_name", type=click.Choice(["gaussian", "ranging"]),
              default="gaussian", show_default=True)
@click.option("--estimator", type=click.Choice(["mmse", "map", "ml"]),
              default="mmse", show_default=True)
@click.option("--anchors", type=str, default="corners", show_default=True,
              help="'corners' or 'x1,y1;x2,y2;...' (ranging model).")
@click.option("--runs", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=_SEED_DEFAULT,
              show_default=True)
@click.option("--grid-step", type=float, default=None,
              help="Search lattice step for ranging estimators (default sigma/10).")
@click.option("-o", "--output", type=str, default=None, help="CSV path (default stdout).")
@_guarded
def cmd_simulate(map_path, preset, w, dx, w1, w2, h1, h2, bounding_box,
                 sigma, sigma_x, sigma_y, model_name, estimator, anchors,
                 runs, seed, grid_step, output):
    """One Monte Carlo experiment; emits a single result row."""
    support, _ = _resolve_map(map_path, preset, w, dx, w1, w2, h1, h2, bounding_box)
    sx, sy = _resolve_sigmas(sigma, sigma_x, sigma_y)
    model = _build_model(model_name, support, sx, sy, anchors)
    cfg = ExperimentConfig(
        map=support,
        model=model,
        estimator=estimator.upper(),
        n_runs=runs,
        master_seed=seed,
        grid_step=grid_step,
    )
    r = run_experiment(cfg)
    header = (
        "estimator", "model", "n_runs", "seed",
        "rmse_x_m", "stderr_x_m", "rmse_y_m", "stderr_y_m",
        "rmse_total_m", "stderr_total_m", "n_underflow",
    )
    rows = [(
        estimator, model_name, r.n_runs, r.master_seed,
        r.rmse_x, r.stderr_x, r.rmse_y, r.stderr_y,
        r.rmse_total, r.stderr_total, r.n_underflow,
    )]
    _emit_csv(header, rows, output)


def _sweep_header_1d(estimators):
    head = ["param", "value"]
    for f in _FAMILIES:
        head += [f"{f}_m2", f"sqrt_{f}_m"]
    head.append("wwb_h_opt_m")
    for e in estimators:
        head += [f"rmse_{e.lower()}_m", f"stderr_{e.lower()}_m"]
    return head


def _sweep_row_1d(row: SweepRow, estimators):
    out = [row.param, row.value]
    for f in _FAMILIES:
        v = row.bounds.get(f)
        v = float(v) if v is not None else None
        out += [v, math.sqrt(v) if v is not None else None]
    wwb = row.bounds.get("wwb")
    out.append(wwb.h_opt if wwb is not None else None)
    for e in estimators:
        r = row.results[e]
        out += [r.rmse_x, r.stderr_x]
    return out


def _sweep_header_2d(estimators):
    head = ["param", "value"]
    for f in _FAMILIES:
        head += [f"{f}_x_m2", f"{f}_y_m2", f"sqrt_trace_{f}_m"]
    for e in estimators:
        head += [
            f"rmse_{e.lower()}_x_m", f"rmse_{e.lower()}_y_m",
            f"rmse_{e.lower()}_total_m", f"stderr_{e.lower()}_total_m",
        ]
    return head


def _sweep_row_2d(row: SweepRow, estimators):
    out = [row.param, row.value]
    for f in _FAMILIES:
        bp = row.bounds.get(f)
        if bp is None:
            out += [None, None, None]
        else:
            out += [bp.b_x, bp.b_y, math.sqrt(bp.b_x + bp.b_y)]
    for e in estimators:
        r = row.results[e]
        out += [r.rmse_x, r.rmse_y, r.rmse_total, r.stderr_total]
    return out


def _mixed_seed(seed: int, salt: int) -> int:
    import numpy as np

    return int(np.random.SeedSequence([seed, salt]).generate_state(1, np.uint64)[0])


def _figure_table(figure: int, runs: int, seed: int):
    """Assemble the sweep table for one standard figure."""
    est3 = ("MMSE", "MAP", "ML")
    if figure == 4:
        geom = TwoSegmentGeometry(1.0, 1.0)
        cfg = ExperimentConfig(geom.build(), GaussianObsModel.isotropic(SIGMA_DEFAULT),
                               n_runs=runs, master_seed=seed, geometry=geom)
        rows = sweep(cfg, "rho", FIG4_RHO, estimators=est3)
        return _sweep_header_1d(est3), [_sweep_row_1d(r, est3) for r in rows]
    if figure == 5:
        geom = TwoSegmentGeometry(1.0, 1.0)
        cfg = ExperimentConfig(geom.build(), GaussianObsModel.isotropic(SIGMA_DEFAULT),
                               n_runs=runs, master_seed=seed, geometry=geom)
        rows = sweep(cfg, "dx", FIG5_DX, estimators=est3)
        return _sweep_header_1d(est3), [_sweep_row_1d(r, est3) for r in rows]
    if figure == 6:
        header = ["w_m"] + _sweep_header_1d(("MMSE",))
        table = []
        for i, wv in enumerate(FIG6_W):
            geom = TwoSegmentGeometry(wv, 1.0)
            cfg = ExperimentConfig(
                geom.build(), GaussianObsModel.isotropic(SIGMA_DEFAULT),
                n_runs=runs, master_seed=_mixed_seed(seed, i), geometry=geom,
            )
            for row in sweep(cfg, "dx", FIG6_DX, estimators=("MMSE",)):
                table.append([wv] + _sweep_row_1d(row, ("MMSE",)))
        return header, table
    if figure == 7:
        geom = FixedAreaLShape(FIG7_W1, FIG7_H2, FIG7_AREA, 5.0)
        cfg = ExperimentConfig(geom.build(), GaussianObsModel.isotropic(SIGMA_DEFAULT),
                               n_runs=runs, master_seed=seed, geometry=geom)
        rows = sweep(cfg, "w2", FIG7_W2, estimators=est3)
        return _sweep_header_2d(est3), [_sweep_row_2d(r, est3) for r in rows]
    if figure == 8:
        detailed = floor_map()
        bbox = floor_bounding_box()
        anchors = corner_anchors(detailed)
        variants = (
            ("map_gaussian", detailed, GaussianObsModel.isotropic(1.0)),
            ("map_ranging", detailed, RangingObsModel(anchors, 1.0)),
            ("map_ranging_bbox", bbox, RangingObsModel(anchors, 1.0)),
        )
        per_variant = {}
        bounds_by_sigma = {}
        for vi, (name, support, model) in enumerate(variants):
            cfg = ExperimentConfig(support, model, "MAP", runs,
                                   _mixed_seed(seed, vi))
            rows = sweep(cfg, "sigma", FIG8_SIGMA, estimators=("MAP",))
            per_variant[name] = rows
            if name == "map_gaussian":
                for row in rows:
                    bounds_by_sigma[row.value] = row.bounds
        header = ["sigma_m"]
        for f in _FAMILIES:
            header.append(f"sqrt_trace_{f}_m")
        for name, _, _ in variants:
            header += [f"rmse_{name}_m", f"stderr_{name}_m"]
        table = []
        for i, sv in enumerate(FIG8_SIGMA):
            out = [sv]
            bnd = bounds_by_sigma[sv]
            for f in _FAMILIES:
                bp = bnd[f]
                out.append(math.sqrt(bp.b_x + bp.b_y))
            for name, _, _ in variants:
                r = per_variant[name][i].results["MAP"]
                out += [r.rmse_total, r.stderr_total]
            table.append(out)
        return header, table
    raise ValidationError(f"unknown figure {figure}")


@main.command("sweep")
@_add_options(_map_source_options)
@click.option("--figure", type=click.Choice(["4", "5", "6", "7", "8"]), default=None,
              help="Standard figure preset; overrides the generic options.")
@click.option("--param", type=str, default=None,
              help="Sweep parameter: sigma, dx, w, w2, or rho.")
@click.option("--values", "values_spec", type=str, default=None,
              help="'start:step:stop' or comma list.")
@click.option("--sigma", type=float, default=SIGMA_DEFAULT, show_default=True,
              help="Base noise spread (m).")
@click.option("--model", "model_name", type=click.Choice(["gaussian", "ranging"]),
              default="gaussian", show_default=True)
@click.option("--estimators", type=str, default="mmse", show_default=True,
              help="Comma list from mmse, map, ml.")
@click.option("--anchors", type=str, default="corners", show_default=True)
@click.option("--runs", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=_SEED_DEFAULT,
              show_default=True)
@click.option("--plot-script", type=str, default=None,
              help="Also write a small matplotlib companion script.")
@click.option("-o", "--output", type=str, default=None, help="CSV path (default stdout).")
@_guarded
def cmd_sweep(map_path, preset, w, dx, w1, w2, h1, h2, bounding_box,
              figure, param, values_spec, sigma, model_name, estimators,
              anchors, runs, seed, plot_script, output):
    """Parameter sweep: one row per value with bounds and RMSEs."""
    if figure is not None:
        header, table = _figure_table(int(figure), runs, seed)
    else:
        if param is None or values_spec is None:
            raise ValidationError("sweep: give --figure or both --param and --values")
        support, geom = _resolve_map(map_path, preset, w, dx, w1, w2, h1, h2,
                                     bounding_box)
        model = _build_model(model_name, support, sigma, sigma, anchors)
        est = tuple(e.strip().upper() for e in estimators.split(",") if e.strip())
        if not est:
            raise ValidationError("estimators: empty selection")
        cfg = ExperimentConfig(support, model, est[0], runs, seed, geometry=geom)
        rows = sweep(cfg, param, _parse_values(values_spec), estimators=est)
        if isinstance(support, SegmentUnion):
            header = _sweep_header_1d(est)
            table = [_sweep_row_1d(r, est) for r in rows]
        else:
            header = _sweep_header_2d(est)
            table = [_sweep_row_2d(r, est) for r in rows]
    _emit_csv(header, table, output)
    if plot_script:
        _write_plot_script(plot_script, output or "sweep.csv", header)


def _write_plot_script(path, csv_path, header):
    rmse_cols = [h for h in header if h.startswith("rmse_")]
    body = f"""\
#!/usr/bin/env python3
\"\"\"Companion plot for {csv_path}; generated alongside the CSV.\"\"\"
import csv

import matplotlib.pyplot as plt

with open({csv_path!r}) as f:
    rows = [r for r in csv.reader(f) if r and not r[0].startswith("#")]
header, data = rows[0], rows[1:]
x = [float(r[1]) for r in data]
for col in {rmse_cols!r}:
    k = header.index(col)
    plt.plot(x, [float(r[k]) for r in data], label=col)
plt.xlabel(header[1])
plt.ylabel("RMSE (m)")
plt.legend()
plt.show()
"""
    with open(path, "w", encoding="utf-8") as f:
        f.write(body)


@main.command("presets")
@click.argument("name", type=click.Choice(["map1", "map2", "floor"]))
@click.option("--w", type=float, default=1.0, show_default=True)
@click.option("--dx", type=float, default=1.0, show_default=True)
@click.option("--w1", type=float, default=5.0, show_default=True)
@click.option("--w2", type=float, default=5.0, show_default=True)
@click.option("--h1", type=float, default=5.0, show_default=True)
@click.option("--h2", type=float, default=5.0, show_default=True)
@click.option("--bounding-box", is_flag=True,
              help="Write the floor plan's bounding box instead of the rooms.")
@click.option("-o", "--output", type=str, default=None,
              help="Output path (default <name>.json).")
@_guarded
def cmd_presets(name, w, dx, w1, w2, h1, h2, bounding_box, output):
    """Write a canonical map file."""
    if name == "map1":
        support = TwoSegmentGeometry(w, dx).build()
    elif name == "map2":
        support = map2_map(w1, w2, h1, h2)
    else:
        support = floor_bounding_box() if bounding_box else floor_map()
    path = output or f"{name}.json"
    save_map(support, path)
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
