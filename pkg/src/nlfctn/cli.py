"""Batch command line for the completion toolkit.

All tensor files are NPY v1.0 little-endian float64. Every run writes a JSON
manifest next to its primary output with the fully resolved parameters, so
passing that manifest back through ``--config`` reproduces the run exactly.
Parameter precedence: command-line flags, then the JSON config file, then
built-in defaults.
"""

from __future__ import annotations

import csv
import io
import json
import time
from datetime import datetime, timezone

import click
import numpy as np
from PIL import Image

from . import __version__
from .completion import PamConfig, pam_complete
from .fctn import FctnRank
from .metrics import METRIC_CONSTANTS, evaluate
from .pipeline import InpaintConfig, nl_fctn_inpaint
from .tensor_io import load_mask, load_tensor, make_mask, save_mask, save_tensor

COMPLETE_DEFAULTS = {
    "input": None,
    "mask": None,
    "mr": None,
    "seed": 0,
    "rank": 4,
    "rho": 0.01,
    "max_iters": 100,
    "tol": 1e-4,
    "init_seed": 0,
}

INPAINT_DEFAULTS = {
    **COMPLETE_DEFAULTS,
    "patch": 8,
    "group_size": 16,
    "interval": None,
    "overlap": 1,
    "group_rank_cap": 4,
    "group_tol": 1e-3,
    "group_max_iters": 100,
    "workers": 1,
}

BENCH_DEFAULTS = {
    k: v for k, v in INPAINT_DEFAULTS.items() if k not in ("mask", "mr", "seed")
}
BENCH_DEFAULTS.update({"mrs": "0.8,0.9", "seeds": "0", "method": "inpaint"})


def _fail(exc) -> click.ClickException:
    return click.ClickException(str(exc))


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _fail(f"cannot read config {path}: {exc}")
    if not isinstance(raw, dict):
        raise _fail(f"config {path} must hold a JSON object")
    params = raw.get("params", raw)
    if not isinstance(params, dict):
        raise _fail(f"config {path} has a non-object 'params' entry")
    return params


def _resolve(defaults: dict, config_path, cli_values: dict) -> dict:
    merged = dict(defaults)
    if config_path:
        cfg = _load_config(config_path)
        unknown = sorted(set(cfg) - set(defaults))
        if unknown:
            raise _fail(f"unknown config keys: {', '.join(unknown)}")
        merged.update(cfg)
    merged.update({k: v for k, v in cli_values.items() if v is not None})
    return merged


def _load_tensor_cli(path):
    try:
        return load_tensor(path)
    except (OSError, ValueError) as exc:
        raise _fail(exc)


def _resolve_mask(params: dict, shape):
    if params.get("mask"):
        try:
            m = load_mask(params["mask"])
        except (OSError, ValueError) as exc:
            raise _fail(exc)
        if m.shape != tuple(shape):
            raise _fail(f"mask shape {m.shape} does not match tensor shape {tuple(shape)}")
        return m
    if params.get("mr") is not None:
        try:
            return make_mask(shape, float(params["mr"]), int(params["seed"]))
        except ValueError as exc:
            raise _fail(exc)
    raise _fail("no observation mask: pass --mask FILE or --mr RATE")


def _write_manifest(output_path, command: str, params: dict, outputs: dict,
                    extra: dict | None = None) -> str:
    manifest = {
        "command": command,
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
        "params": params,
        "outputs": outputs,
    }
    if extra:
        manifest.update(extra)
    path = f"{output_path}.manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


@click.group()
@click.version_option(version=__version__, prog_name="nlfctn")
def main():
    """Tensor completion and nonlocal inpainting over NPY files."""


@main.command()
@click.option("--input", "input_path", default=None, help="Degraded tensor (.npy).")
@click.option("--mask", "mask_path", default=None, help="0/1 observation mask (.npy).")
@click.option("--mr", type=float, default=None, help="Synthesize a mask with this missing rate.")
@click.option("--seed", type=int, default=None, help="Mask synthesis seed [0].")
@click.option("--rank", type=int, default=None, help="Link cap: sizes are min(I_j, I_k, RANK) [4].")
@click.option("--rho", type=float, default=None, help="Proximal weight [0.01].")
@click.option("--max-iters", type=int, default=None, help="Sweep budget [100].")
@click.option("--tol", type=float, default=None, help="Relative-change stop [1e-4].")
@click.option("--init-seed", type=int, default=None, help="Factor initialization seed [0].")
@click.option("--output", "output_path", required=True, help="Completed tensor (.npy).")
@click.option("--config", "config_path", default=None, help="JSON config or manifest file.")
def complete(input_path, mask_path, mr, seed, rank, rho, max_iters, tol,
             init_seed, output_path, config_path):
    """Global FCTN completion of a masked tensor."""
    params = _resolve(COMPLETE_DEFAULTS, config_path, {
        "input": input_path, "mask": mask_path, "mr": mr, "seed": seed,
        "rank": rank, "rho": rho, "max_iters": max_iters, "tol": tol,
        "init_seed": init_seed,
    })
    if not params["input"]:
        raise _fail("missing --input")
    t = _load_tensor_cli(params["input"])
    mask = _resolve_mask(params, t.shape)
    x0 = np.where(mask, t, 0.0)
    pam = PamConfig(rho=float(params["rho"]), max_iters=int(params["max_iters"]),
                    tol=float(params["tol"]), seed=int(params["init_seed"]))
    start = time.perf_counter()
    try:
        x, _, trace = pam_complete(x0, mask, FctnRank.capped(t.shape, int(params["rank"])), pam)
    except ValueError as exc:
        raise _fail(exc)
    seconds = time.perf_counter() - start
    save_tensor(output_path, x)
    _write_manifest(output_path, "complete", params, {"tensor": str(output_path)},
                    {"iterations": trace.iterations, "seconds": seconds})
    click.echo(f"wrote {output_path} ({trace.iterations} sweeps, {seconds:.2f}s)")


@main.command()
@click.option("--input", "input_path", default=None, help="Degraded tensor (.npy).")
@click.option("--mask", "mask_path", default=None, help="0/1 observation mask (.npy).")
@click.option("--mr", type=float, default=None, help="Synthesize a mask with this missing rate.")
@click.option("--seed", type=int, default=None, help="Mask synthesis seed [0].")
@click.option("--rank", type=int, default=None, help="Global-stage link cap [4].")
@click.option("--rho", type=float, default=None, help="Proximal weight, both stages [0.01].")
@click.option("--max-iters", type=int, default=None, help="Global-stage sweep budget [100].")
@click.option("--tol", type=float, default=None, help="Global-stage relative-change stop [1e-4].")
@click.option("--init-seed", type=int, default=None, help="Factor initialization seed [0].")
@click.option("--patch", type=int, default=None, help="Patch side length [8].")
@click.option("--group-size", type=int, default=None, help="Patches per group [16].")
@click.option("--interval", type=int, default=None, help="Key lattice stride [patch - 1].")
@click.option("--overlap", type=int, default=None, help="Grid patch overlap [1].")
@click.option("--group-rank-cap", type=int, default=None, help="Group-stage link cap [4].")
@click.option("--workers", type=int, default=None, help="Parallel group solves [1].")
@click.option("--output", "output_path", required=True, help="Inpainted tensor (.npy).")
@click.option("--config", "config_path", default=None, help="JSON config or manifest file.")
def inpaint(input_path, mask_path, mr, seed, rank, rho, max_iters, tol, init_seed,
            patch, group_size, interval, overlap, group_rank_cap, workers,
            output_path, config_path):
    """Two-stage nonlocal inpainting: global completion, then group refinement."""
    params = _resolve(INPAINT_DEFAULTS, config_path, {
        "input": input_path, "mask": mask_path, "mr": mr, "seed": seed,
        "rank": rank, "rho": rho, "max_iters": max_iters, "tol": tol,
        "init_seed": init_seed, "patch": patch, "group_size": group_size,
        "interval": interval, "overlap": overlap,
        "group_rank_cap": group_rank_cap, "workers": workers,
    })
    if not params["input"]:
        raise _fail("missing --input")
    t = _load_tensor_cli(params["input"])
    mask = _resolve_mask(params, t.shape)
    try:
        cfg = InpaintConfig(
            patch=int(params["patch"]),
            group_size=int(params["group_size"]),
            interval=None if params["interval"] is None else int(params["interval"]),
            overlap=int(params["overlap"]),
            global_rank_cap=int(params["rank"]),
            group_rank_cap=int(params["group_rank_cap"]),
            pam_global=PamConfig(rho=float(params["rho"]), max_iters=int(params["max_iters"]),
                                 tol=float(params["tol"]), seed=int(params["init_seed"])),
            pam_group=PamConfig(rho=float(params["rho"]), max_iters=int(params["group_max_iters"]),
                                tol=float(params["group_tol"]), seed=int(params["init_seed"])),
            workers=int(params["workers"]),
        )
        x, report = nl_fctn_inpaint(t, mask, cfg)
    except ValueError as exc:
        raise _fail(exc)
    save_tensor(output_path, x)
    _write_manifest(output_path, "inpaint", params, {"tensor": str(output_path)}, {
        "group_count": report.group_count,
        "skipped_groups": report.skipped_groups,
        "seconds": report.stage_global_seconds + report.stage_nonlocal_seconds,
    })
    click.echo(
        f"wrote {output_path} ({report.group_count} groups, "
        f"{report.skipped_groups} skipped)"
    )


def _metrics_csv(report) -> str:
    buf = io.StringIO()
    consts = " ".join(f"{k}={v}" for k, v in METRIC_CONSTANTS.items())
    buf.write(f"# nlfctn {__version__} metrics; {consts}\n")
    writer = csv.writer(buf)
    writer.writerow(["metric", "value"])
    writer.writerow(["psnr", repr(report.psnr)])
    writer.writerow(["ssim", repr(report.ssim)])
    writer.writerow(["sam", repr(report.sam)])
    for b, v in enumerate(report.psnr_bands):
        writer.writerow([f"psnr_band_{b}", repr(v)])
    for b, v in enumerate(report.ssim_bands):
        writer.writerow([f"ssim_band_{b}", repr(v)])
    return buf.getvalue()


@main.command()
@click.option("--input", "input_path", required=True, help="Reconstruction (.npy).")
@click.option("--ref", "ref_path", required=True, help="Reference tensor (.npy).")
@click.option("--output", "output_path", default=None,
              help="Report file; .csv for CSV, anything else JSON. Default: print JSON.")
def metrics(input_path, ref_path, output_path):
    """PSNR, SSIM, and spectral angle between two tensors."""
    x = _load_tensor_cli(input_path)
    ref = _load_tensor_cli(ref_path)
    try:
        report = evaluate(x, ref)
    except ValueError as exc:
        raise _fail(exc)
    if output_path is None:
        click.echo(json.dumps(report.to_dict(), indent=2))
        return
    if str(output_path).endswith(".csv"):
        text = _metrics_csv(report)
    else:
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    with open(output_path, "w") as fh:
        fh.write(text)
    _write_manifest(output_path, "metrics",
                    {"input": input_path, "ref": ref_path},
                    {"report": str(output_path)})
    click.echo(f"wrote {output_path}")


@main.command("mask")
@click.option("--like", "like_path", default=None, help="Take the shape from this tensor (.npy).")
@click.option("--shape", "shape_text", default=None, help="Comma-separated shape, e.g. 64,64,8.")
@click.option("--mr", type=float, required=True, help="Missing rate in [0, 1).")
@click.option("--seed", type=int, default=0, show_default=True, help="Sampling seed.")
@click.option("--output", "output_path", required=True, help="Mask file (.npy, 0/1 floats).")
def mask_cmd(like_path, shape_text, mr, seed, output_path):
    """Emit a uniform random observation mask."""
    if (like_path is None) == (shape_text is None):
        raise _fail("pass exactly one of --like or --shape")
    if like_path:
        shape = _load_tensor_cli(like_path).shape
    else:
        try:
            shape = tuple(int(s) for s in shape_text.split(","))
        except ValueError:
            raise _fail(f"cannot parse shape {shape_text!r}")
    try:
        m = make_mask(shape, mr, seed)
    except ValueError as exc:
        raise _fail(exc)
    save_mask(output_path, m)
    params = {"like": like_path, "shape": list(shape), "mr": mr, "seed": seed}
    _write_manifest(output_path, "mask", params, {"mask": str(output_path)},
                    {"missing": int((~m).sum()), "total": int(m.size)})
    click.echo(f"wrote {output_path} ({int((~m).sum())} of {m.size} entries missing)")


def _pick_slice(x, selector: str) -> np.ndarray:
    want = x.ndim - 2
    try:
        idx = tuple(int(v) for v in str(selector).split(","))
    except ValueError:
        raise _fail(f"cannot parse slice selector {selector!r}")
    if len(idx) != want:
        raise _fail(
            f"selector {selector!r} has {len(idx)} indices, tensor needs {want} "
            f"(one per trailing mode)"
        )
    for axis, i in enumerate(idx):
        if not 0 <= i < x.shape[2 + axis]:
            raise _fail(f"slice index {i} out of range for mode {2 + axis} of size {x.shape[2 + axis]}")
    return x[(slice(None), slice(None)) + idx]


def _to_byte(plane: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(plane, 0.0, 1.0) * 255.0).astype(np.uint8)


@main.command("export-slice")
@click.option("--input", "input_path", required=True, help="Tensor (.npy).")
@click.option("--slice", "slice_sel", default=None,
              help="Band selector, one index per trailing mode, e.g. 3 or 3,1.")
@click.option("--rgb", "rgb_sel", default=None,
              help="Three selectors joined by ':' for an RGB composite, e.g. 28:13:4.")
@click.option("--output", "output_path", required=True, help="PNG file.")
def export_slice(input_path, slice_sel, rgb_sel, output_path):
    """Render one band (or an RGB composite) to PNG with the fixed
    [0,1] -> [0,255] clamp and round."""
    if (slice_sel is None) == (rgb_sel is None):
        raise _fail("pass exactly one of --slice or --rgb")
    x = _load_tensor_cli(input_path)
    if x.ndim < 3:
        raise _fail(f"export needs a tensor of order >= 3, got order {x.ndim}")
    if slice_sel is not None:
        img = Image.fromarray(_to_byte(_pick_slice(x, slice_sel)), mode="L")
        params = {"input": input_path, "slice": slice_sel}
    else:
        parts = rgb_sel.split(":")
        if len(parts) != 3:
            raise _fail(f"--rgb needs three ':'-separated selectors, got {rgb_sel!r}")
        channels = [_to_byte(_pick_slice(x, p)) for p in parts]
        img = Image.fromarray(np.stack(channels, axis=-1), mode="RGB")
        params = {"input": input_path, "rgb": rgb_sel}
    img.save(output_path, format="PNG")
    _write_manifest(output_path, "export-slice", params, {"image": str(output_path)})
    click.echo(f"wrote {output_path}")


def _parse_list(text, conv, label):
    try:
        values = [conv(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise _fail(f"cannot parse {label} list {text!r}")
    if not values:
        raise _fail(f"empty {label} list")
    return values


@main.command()
@click.option("--input", "input_path", default=None, help="Ground-truth tensor (.npy).")
@click.option("--mrs", default=None, help="Comma-separated missing rates [0.8,0.9].")
@click.option("--seeds", default=None, help="Comma-separated mask seeds [0].")
@click.option("--method", type=click.Choice(["inpaint", "complete"]), default=None,
              help="Pipeline to benchmark [inpaint].")
@click.option("--rank", type=int, default=None, help="Global-stage link cap [4].")
@click.option("--rho", type=float, default=None, help="Proximal weight [0.01].")
@click.option("--max-iters", type=int, default=None, help="Global sweep budget [100].")
@click.option("--tol", type=float, default=None, help="Global relative-change stop [1e-4].")
@click.option("--init-seed", type=int, default=None, help="Factor initialization seed [0].")
@click.option("--patch", type=int, default=None, help="Patch side length [8].")
@click.option("--group-size", type=int, default=None, help="Patches per group [16].")
@click.option("--interval", type=int, default=None, help="Key lattice stride [patch - 1].")
@click.option("--overlap", type=int, default=None, help="Grid patch overlap [1].")
@click.option("--group-rank-cap", type=int, default=None, help="Group-stage link cap [4].")
@click.option("--workers", type=int, default=None, help="Parallel group solves [1].")
@click.option("--output", "output_path", required=True,
              help="Table file; .csv for CSV, otherwise Markdown.")
@click.option("--config", "config_path", default=None, help="JSON config or manifest file.")
def bench(input_path, mrs, seeds, method, rank, rho, max_iters, tol, init_seed,
          patch, group_size, interval, overlap, group_rank_cap, workers,
          output_path, config_path):
    """Sweep missing rates and seeds over a ground truth; tabulate mean
    PSNR/SSIM/SAM per missing rate."""
    params = _resolve(BENCH_DEFAULTS, config_path, {
        "input": input_path, "mrs": mrs, "seeds": seeds, "method": method,
        "rank": rank, "rho": rho, "max_iters": max_iters, "tol": tol,
        "init_seed": init_seed, "patch": patch, "group_size": group_size,
        "interval": interval, "overlap": overlap,
        "group_rank_cap": group_rank_cap, "workers": workers,
    })
    if not params["input"]:
        raise _fail("missing --input")
    gt = _load_tensor_cli(params["input"])
    mr_list = _parse_list(params["mrs"], float, "missing-rate")
    seed_list = _parse_list(params["seeds"], int, "seed")
    pam = PamConfig(rho=float(params["rho"]), max_iters=int(params["max_iters"]),
                    tol=float(params["tol"]), seed=int(params["init_seed"]))
    cfg = InpaintConfig(
        patch=int(params["patch"]),
        group_size=int(params["group_size"]),
        interval=None if params["interval"] is None else int(params["interval"]),
        overlap=int(params["overlap"]),
        global_rank_cap=int(params["rank"]),
        group_rank_cap=int(params["group_rank_cap"]),
        pam_global=pam,
        pam_group=PamConfig(rho=float(params["rho"]), max_iters=int(params["group_max_iters"]),
                            tol=float(params["group_tol"]), seed=int(params["init_seed"])),
        workers=int(params["workers"]),
    )
    rows = []
    start = time.perf_counter()
    for mr_value in mr_list:
        scores = []
        for seed_value in seed_list:
            obs = make_mask(gt.shape, mr_value, seed_value)
            degraded = np.where(obs, gt, 0.0)
            try:
                if params["method"] == "inpaint":
                    x, _ = nl_fctn_inpaint(degraded, obs, cfg)
                else:
                    x, _, _ = pam_complete(
                        degraded, obs, FctnRank.capped(gt.shape, int(params["rank"])), pam)
                report = evaluate(x, gt)
            except ValueError as exc:
                raise _fail(exc)
            scores.append((report.psnr, report.ssim, report.sam))
        mean = np.mean(np.asarray(scores, dtype=float), axis=0)
        rows.append((mr_value, float(mean[0]), float(mean[1]), float(mean[2])))
    seconds = time.perf_counter() - start

    if str(output_path).endswith(".csv"):
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["mr", "psnr", "ssim", "sam"])
        for mr_value, p, s, a in rows:
            writer.writerow([mr_value, f"{p:.4f}", f"{s:.4f}", f"{a:.4f}"])
        text = buf.getvalue()
    else:
        lines = ["| mr | psnr | ssim | sam |", "|---:|---:|---:|---:|"]
        for mr_value, p, s, a in rows:
            lines.append(f"| {mr_value:.2f} | {p:.4f} | {s:.4f} | {a:.4f} |")
        text = "\n".join(lines) + "\n"
    with open(output_path, "w") as fh:
        fh.write(text)
    _write_manifest(output_path, "bench", params, {"table": str(output_path)},
                    {"seconds": seconds})
    click.echo(text.rstrip("\n"))
    click.echo(f"wrote {output_path}")


if __name__ == "__main__":
    main()
