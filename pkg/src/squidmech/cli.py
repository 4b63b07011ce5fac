"""Command-line client for the squidmech service.

Every command talks to the HTTP API: by default through an in-process
client around the bundled FastAPI app (no server needed, byte-identical
outputs for identical seeds), or against a running server via --url.
File outputs follow the package formats: trace CSV + JSON sidecar (or
single JSON with --format json) and report JSON.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from .fileio import write_fit_result, write_report, write_trace_csv, write_trace_json
from .pipelines import PIPELINE_IDS, REF

EXIT_OK = 0
EXIT_FAILED_VERDICT = 1
EXIT_USAGE = 2


class _InProcessTransport(httpx.BaseTransport):
    """Serve requests from the ASGI app inside this process.

    Keeps the CLI a genuine HTTP client of the service without needing a
    running server, and keeps outputs deterministic for fixed seeds.
    """

    def __init__(self, app):
        self._transport = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        import asyncio

        async def call():
            response = await self._transport.handle_async_request(request)
            await response.aread()
            return httpx.Response(
                status_code=response.status_code,
                headers=response.headers,
                content=response.content,
                request=request,
            )

        return asyncio.run(call())


def _make_client(url: str | None) -> httpx.Client:
    if url:
        return httpx.Client(base_url=url, timeout=300.0)
    from .service.app import create_app

    return httpx.Client(transport=_InProcessTransport(create_app()),
                        base_url="http://squidmech.local")


def _load_json_file(path: str | None, what: str) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise click.UsageError(f"{what} file {p} does not exist")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"{p}: line {exc.lineno}: invalid JSON ({exc.msg})")
    if not isinstance(doc, dict):
        raise click.UsageError(f"{p}: expected a JSON object at the top level")
    return doc


def _device_payload(device_path: str | None) -> dict | None:
    if device_path is None:
        return None
    doc = _load_json_file(device_path, "device")
    from .circuit import DEVICE_FIELDS
    missing = [k for k in DEVICE_FIELDS if k not in doc]
    extra = [k for k in doc if k not in DEVICE_FIELDS]
    if missing:
        raise click.UsageError(f"{device_path}: missing key(s) {', '.join(missing)}")
    if extra:
        raise click.UsageError(f"{device_path}: unknown key(s) {', '.join(extra)}")
    return doc


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code == 409:
        click.echo(f"rejected: {resp.json().get('detail', resp.text)}", err=True)
        sys.exit(EXIT_FAILED_VERDICT)
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        click.echo(f"error ({resp.status_code}): {detail}", err=True)
        sys.exit(EXIT_USAGE)
    return resp.json()


def _sweep_payload(config: dict, seed: int | None) -> dict:
    sweep = dict(config.get("sweep", {}))
    if seed is not None:
        sweep["seed"] = seed
    return sweep


def _write_traces(traces: dict, out: Path, fmt: str) -> list[Path]:
    from .service.schemas import TraceModel

    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, payload in sorted(traces.items()):
        trace = TraceModel.model_validate(payload).to_trace()
        if fmt == "csv":
            written.append(write_trace_csv(trace, out / f"{name}.csv"))
        else:
            written.append(write_trace_json(trace, out / f"{name}.json"))
    return written


def _default_coupled_params() -> dict:
    return {
        "omega_a_hz": REF["omega_a_bias_hz"],
        "omega_b_hz": REF["omega_b_hz"],
        "kappa_int_hz": REF["kappa_int_hz"],
        "kappa_ext_hz": REF["kappa_ext_hz"],
        "gamma_hz": REF["gamma_hz"],
        "g_hz": REF["g_crossing_hz"],
        "theta_rad": REF["theta_rad"],
    }


@click.group()
@click.option("--url", default=None, help="Base URL of a running service; "
              "default runs the service in-process.")
@click.pass_context
def main(ctx, url):
    """Simulate and fit coupled-resonator spectra through the squidmech service."""
    ctx.ensure_object(dict)
    ctx.obj["url"] = url


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service with uvicorn."""
    import uvicorn

    uvicorn.run("squidmech.service.app:app", host=host, port=port)


# ---------------------------------------------------------------------------
# simulate


@main.group()
def simulate():
    """Synthesize traces and write them to disk."""


@simulate.command("flux-sweep")
@click.option("--device", "device_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--out", type=click.Path(), default="out", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.pass_context
def simulate_flux_sweep(ctx, device_path, config_path, seed, out, fmt):
    """Bare-resonance traces across the applied-flux grid."""
    config = _load_json_file(config_path, "config")
    payload = {
        "device": _device_payload(device_path),
        "sweep": _sweep_payload(config, seed),
    }
    with _make_client(ctx.obj["url"]) as client:
        data = _post(client, "/simulate/flux-sweep", payload)
    written = _write_traces(data["traces"], Path(out), fmt)
    click.echo(f"wrote {len(written)} traces to {out}")


@simulate.command("crossing")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--out", type=click.Path(), default="out", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.pass_context
def simulate_crossing(ctx, config_path, seed, out, fmt):
    """Coupled transmission traces over a drive-frequency grid."""
    config = _load_json_file(config_path, "config")
    params = {**_default_coupled_params(), **config.get("params", {})}
    if "drive_freqs_hz" in config:
        drives = config["drive_freqs_hz"]
    else:
        res_hz = params["omega_a_hz"] - params["omega_b_hz"]
        g_hz = params["g_hz"]
        n = int(config.get("drive_count", 41))
        if n < 1:
            raise click.UsageError("drive_count must be at least 1")
        if n == 1:
            drives = [res_hz]
        else:
            drives = [res_hz - 10 * g_hz + 20 * g_hz * j / (n - 1) for j in range(n)]
    payload = {
        "params": params,
        "drive_freqs_hz": drives,
        "trace_points": int(config.get("trace_points", 401)),
        "trace_halfspan_linewidths": float(config.get("trace_halfspan_linewidths", 5.0)),
        "noise_sigma": float(config.get("noise_sigma", 0.0)),
        "seed": seed if seed is not None else int(config.get("seed", 0)),
    }
    with _make_client(ctx.obj["url"]) as client:
        data = _post(client, "/simulate/crossing", payload)
    written = _write_traces(data["traces"], Path(out), fmt)
    click.echo(f"wrote {len(written)} traces to {out}")


@simulate.command("upconversion")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--out", type=click.Path(), default="out", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.pass_context
def simulate_upconversion(ctx, config_path, seed, out, fmt):
    """Normalized upconversion band at fixed output frequency."""
    config = _load_json_file(config_path, "config")
    params = {**_default_coupled_params(), **config.get("params", {})}
    params.setdefault("g_hz", 120e3)
    center = params["omega_b_hz"]
    span = float(config.get("span_hz", 3.4e6))
    payload = {
        "params": params,
        "omega_out_hz": float(config.get("omega_out_hz", params["omega_a_hz"])),
        "freq_min_hz": float(config.get("freq_min_hz", center - span / 2)),
        "freq_max_hz": float(config.get("freq_max_hz", center + span / 2)),
        "trace_points": int(config.get("trace_points", 401)),
        "noise_sigma": float(config.get("noise_sigma", 0.0)),
        "seed": seed if seed is not None else int(config.get("seed", 0)),
        "drive_amp": config.get("drive_amp"),
    }
    with _make_client(ctx.obj["url"]) as client:
        data = _post(client, "/simulate/upconversion", payload)
    written = _write_traces(data["traces"], Path(out), fmt)
    click.echo(f"wrote {len(written)} traces to {out}")


# ---------------------------------------------------------------------------
# fit


@main.group()
def fit():
    """Fit measured or synthesized traces."""


def _read_trace_payload(path: Path) -> dict:
    from .fileio import read_trace_csv
    from .service.schemas import TraceModel

    try:
        if path.suffix == ".json":
            doc = json.loads(path.read_text())
            return TraceModel.model_validate(doc).model_dump()
        return TraceModel.from_trace(read_trace_csv(path)).model_dump()
    except (ValueError, KeyError) as exc:
        raise click.UsageError(f"{path}: {exc}")


def _finish_fit(data: dict, out: str | None, label: str) -> None:
    from .fitting.levmar import FitResult

    result = FitResult(**data)
    if out is not None:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_fit_result(result, out_dir / f"fit_{label}.json")
    for name, value in result.params.items():
        err = result.std_errors[name]
        click.echo(f"{name:>18s} = {value:.6g} +- {err:.3g}")
    click.echo(f"residual_norm = {result.residual_norm:.4g}  "
               f"iterations = {result.iterations}  converged = {result.converged}")
    if not result.converged:
        sys.exit(EXIT_FAILED_VERDICT)


@fit.command("resonance")
@click.argument("trace_file", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def fit_resonance_cmd(ctx, trace_file, config_path, out):
    """Fit a complex trace to the bare notch model."""
    config = _load_json_file(config_path, "config")
    payload = {"trace": _read_trace_payload(Path(trace_file))}
    if "fit" in config:
        payload["config"] = config["fit"]
    if "init" in config:
        payload["init"] = config["init"]
    with _make_client(ctx.obj["url"]) as client:
        data = _post(client, "/fit/resonance", payload)
    _finish_fit(data, out, "resonance")


@fit.command("lorentzian")
@click.argument("trace_file", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def fit_lorentzian_cmd(ctx, trace_file, config_path, out):
    """Fit a power trace to a Lorentzian peak."""
    config = _load_json_file(config_path, "config")
    payload = {"trace": _read_trace_payload(Path(trace_file))}
    if "fit" in config:
        payload["config"] = config["fit"]
    if "init" in config:
        payload["init"] = config["init"]
    with _make_client(ctx.obj["url"]) as client:
        data = _post(client, "/fit/lorentzian", payload)
    _finish_fit(data, out, "lorentzian")


@fit.command("crossing")
@click.argument("trace_files", type=click.Path(exists=True), nargs=-1, required=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def fit_crossing_cmd(ctx, trace_files, config_path, out):
    """Joint fit of the coupled model across drive-frequency traces."""
    config = _load_json_file(config_path, "config")
    payload = {"traces": [_read_trace_payload(Path(f)) for f in trace_files]}
    if "fit" in config:
        payload["config"] = config["fit"]
    for key in ("init", "mode", "use_trace_scales"):
        if key in config:
            payload[key] = config[key]
    with _make_client(ctx.obj["url"]) as client:
        data = _post(client, "/fit/crossing", payload)
    _finish_fit(data, out, "crossing")


@fit.command("power-laws")
@click.argument("points_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def fit_power_laws_cmd(ctx, points_file, out):
    """Linear/quadratic drive-power laws from a JSON points file.

    The file needs `coupling` and `stark` lists of {alpha_d, value_hz[,
    sigma_hz]} objects.
    """
    doc = _load_json_file(points_file, "points")
    for key in ("coupling", "stark"):
        if key not in doc:
            raise click.UsageError(f"{points_file}: missing key {key!r}")
    payload = {"coupling": doc["coupling"], "stark": doc["stark"]}
    with _make_client(ctx.obj["url"]) as client:
        data = _post(client, "/fit/power-laws", payload)
    _finish_fit(data, out, "power_laws")


# ---------------------------------------------------------------------------
# pipelines


@main.command()
@click.argument("which", type=click.Choice([*PIPELINE_IDS, "all"]))
@click.option("--device", "device_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--out", type=click.Path(), default="out", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--traces", "dump_traces", is_flag=True,
              help="Also write the synthesized traces.")
@click.pass_context
def pipeline(ctx, which, device_path, config_path, seed, out, fmt, dump_traces):
    """Run a reproduction pipeline (or all four) and write report files."""
    config = _load_json_file(config_path, "config")
    ids = list(PIPELINE_IDS) if which == "all" else [which]
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    device = _device_payload(device_path)
    sweep = _sweep_payload(config, seed)

    all_passed = True
    with _make_client(ctx.obj["url"]) as client:
        for pid in ids:
            payload = {"device": device, "sweep": sweep,
                       "include_traces": dump_traces}
            data = _post(client, f"/pipeline/{pid}", payload)
            report = data["report"]
            write_report(report, out_dir / f"report_{pid}.json")
            if dump_traces and data.get("traces"):
                _write_traces(data["traces"], out_dir / pid, fmt)
            ok = report["status"] == "ok" and all(q["pass"] for q in report["quantities"])
            all_passed = all_passed and ok
            dur = report.get("duration_s")
            click.echo(f"{pid}: status={report['status']} "
                       f"({sum(q['pass'] for q in report['quantities'])}/"
                       f"{len(report['quantities'])} quantities pass, "
                       f"{dur:.2f}s)" if dur is not None else f"{pid}: {report['status']}")
            for q in report["quantities"]:
                mark = "PASS" if q["pass"] else "FAIL"
                click.echo(f"  [{mark}] {q['name']}: {q['value_hz']:.6g} "
                           f"vs {q['target']:.6g} (tol {q['tolerance']:.3g}, "
                           f"{q['provenance']})")
    sys.exit(EXIT_OK if all_passed else EXIT_FAILED_VERDICT)


# ---------------------------------------------------------------------------
# device


@main.group()
def device():
    """Device-parameter utilities."""


@device.command("derive")
@click.option("--device", "device_path", type=click.Path(), default=None)
@click.option("--bias-hz", type=float, default=5.408e9, show_default=True,
              help="Bias frequency at which to evaluate gradient/coupling.")
@click.option("--drive-amp", type=float, default=19.2, show_default=True)
@click.pass_context
def device_derive(ctx, device_path, bias_hz, drive_amp):
    """Print zero-point, coupling and nonlinearity figures for a device."""
    payload = {"device": _device_payload(device_path),
               "bias_target_hz": bias_hz, "drive_amp": drive_amp}
    with _make_client(ctx.obj["url"]) as client:
        d = _post(client, "/device/derive", payload)
    click.echo(f"I_zpf                 = {d['i_zpf_a']:.4g} A")
    click.echo(f"B_zpf                 = {d['b_zpf_t']:.4g} T")
    click.echo(f"Phi_zpf               = {d['phi_zpf_wb']:.4g} Wb "
               f"({d['phi_zpf_uphi0']:.3f} uPhi0)")
    click.echo(f"omega_a_max/2pi       = {d['omega_a_max_hz']:.6g} Hz")
    click.echo(f"bias omega_a/2pi      = {d['bias_omega_a_hz']:.6g} Hz "
               f"(phi_ext = {d['bias_phi_ext_phi0']:.4f} Phi0)")
    click.echo(f"gradient at bias      = {d['bias_gradient_ghz_per_phi0']:.4g} GHz/Phi0")
    click.echo(f"Kerr/2pi at bias      = {d['bias_kerr_hz']:.4g} Hz")
    click.echo(f"g0/2pi at bias        = {d['g0_hz']:.5g} Hz")
    click.echo(f"g0/2pi (1.7 GHz/Phi0 reference gradient) = "
               f"{d['g0_reference_gradient_hz']:.5g} Hz")
    click.echo(f"g/2pi at alpha_d={drive_amp:g}  = {d['g_at_drive_hz']:.5g} Hz")
    click.echo(f"Stark shift/2pi       = {d['stark_shift_hz']:.5g} Hz")
    click.echo(f"cooperativity         = {d['cooperativity']:.4g}")


if __name__ == "__main__":
    main()
