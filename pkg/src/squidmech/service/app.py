"""FastAPI service wrapping the core package.

Simulation, fitting and pipeline execution are exposed as POST endpoints
with pydantic-validated payloads. Domain errors map to HTTP 422, rejected
fits to 409 with a structured detail.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..circuit import (
    FluxSingularityError,
    ScreeningConvergenceError,
    bare_coupling,
    bias_for_frequency,
    cooperativity,
    effective_coupling,
    paper_device,
    stark_shift,
    zero_point_current,
    zero_point_flux,
)
from ..constants import MU0, PHI0, TWO_PI
from ..fitting.models import (
    CrossingFitOptions,
    FitRejectedError,
    fit_avoided_crossing,
    fit_lorentzian,
    fit_power_laws,
    fit_resonance,
)
from ..pipelines import PIPELINE_IDS, run_pipeline
from ..spectra import NoiseSpec, synthesize_trace, synthesize_upconversion_trace
from . import schemas as sc


def _device_from(request_device: sc.DeviceModel | None):
    if request_device is None:
        return paper_device()
    try:
        return request_device.to_device()
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _domain_guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except FitRejectedError as exc:
        raise HTTPException(status_code=409, detail=f"fit rejected: {exc}") from exc
    except (ValueError, FluxSingularityError, ScreeningConvergenceError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="squidmech", version=__version__)

    @app.get("/health", response_model=sc.HealthResponse)
    def health():
        return sc.HealthResponse(status="ok", version=__version__)

    @app.post("/device/derive", response_model=sc.DeviceDerivation)
    def device_derive(req: sc.DeviceDeriveRequest):
        dev = _device_from(req.device)

        def derive():
            i_zpf = zero_point_current(dev)
            phi_zpf = zero_point_flux(dev)
            bias = bias_for_frequency(TWO_PI * req.bias_target_hz, dev)
            g0 = bare_coupling(bias, dev)
            g = effective_coupling(g0, req.drive_amp)
            ref_grad = TWO_PI * req.reference_gradient_hz_per_phi0 / PHI0
            return sc.DeviceDerivation(
                i_zpf_a=i_zpf,
                b_zpf_t=MU0 * i_zpf / (TWO_PI * dev.wire_distance),
                phi_zpf_wb=phi_zpf,
                phi_zpf_uphi0=phi_zpf / PHI0 * 1e6,
                omega_a_max_hz=dev.omega_a_max / TWO_PI,
                bias_omega_a_hz=bias.omega_a / TWO_PI,
                bias_phi_ext_phi0=bias.phi_ext / PHI0,
                bias_gradient_ghz_per_phi0=bias.gradient * PHI0 / TWO_PI / 1e9,
                bias_kerr_hz=bias.kerr / TWO_PI,
                g0_hz=g0 / TWO_PI,
                g0_reference_gradient_hz=phi_zpf * ref_grad / TWO_PI,
                g_at_drive_hz=g / TWO_PI,
                stark_shift_hz=stark_shift(bias.kerr, req.drive_amp) / TWO_PI,
                cooperativity=cooperativity(
                    g, TWO_PI * req.kappa_hz, TWO_PI * req.gamma_hz
                ),
            )

        return _domain_guard(derive)

    @app.post("/simulate/flux-sweep", response_model=sc.TraceSetResponse)
    def simulate_flux_sweep(req: sc.SimulateFluxSweepRequest):
        from ..pipelines import synthesize_flux_sweep

        dev = _device_from(req.device)

        def run():
            traces = synthesize_flux_sweep(dev, req.sweep.to_sweep())
            return sc.TraceSetResponse(
                traces={k: sc.TraceModel.from_trace(t) for k, t in traces.items()}
            )

        return _domain_guard(run)

    @app.post("/simulate/crossing", response_model=sc.TraceSetResponse)
    def simulate_crossing(req: sc.SimulateCrossingRequest):
        def run():
            p = req.params.to_params()
            grid = np.linspace(
                p.omega_a - req.trace_halfspan_linewidths * p.kappa,
                p.omega_a + req.trace_halfspan_linewidths * p.kappa,
                req.trace_points,
            )
            out = {}
            for j, f_d in enumerate(req.drive_freqs_hz):
                trace = synthesize_trace(
                    grid, TWO_PI * f_d, p,
                    NoiseSpec(sigma=req.noise_sigma,
                              seed=int(np.random.SeedSequence((req.seed, j)).generate_state(1)[0])),
                )
                out[f"drive_{j:03d}"] = sc.TraceModel.from_trace(trace)
            return sc.TraceSetResponse(traces=out)

        return _domain_guard(run)

    @app.post("/simulate/upconversion", response_model=sc.TraceSetResponse)
    def simulate_upconversion(req: sc.SimulateUpconversionRequest):
        def run():
            p = req.params.to_params()
            if not req.freq_min_hz < req.freq_max_hz:
                raise ValueError("freq_min_hz must be below freq_max_hz")
            grid = np.linspace(TWO_PI * req.freq_min_hz, TWO_PI * req.freq_max_hz,
                               req.trace_points)
            trace = synthesize_upconversion_trace(
                grid, p, omega_out_fixed=TWO_PI * req.omega_out_hz,
                noise=NoiseSpec(sigma=req.noise_sigma, seed=req.seed),
                drive_amp=req.drive_amp,
            )
            return sc.TraceSetResponse(
                traces={"upconversion": sc.TraceModel.from_trace(trace)}
            )

        return _domain_guard(run)

    @app.post("/fit/resonance", response_model=sc.FitResultModel)
    def fit_resonance_ep(req: sc.FitTraceRequest):
        result = _domain_guard(
            fit_resonance, req.trace.to_trace(), req.config.to_config(), init=req.init
        )
        return sc.FitResultModel.from_result(result)

    @app.post("/fit/lorentzian", response_model=sc.FitResultModel)
    def fit_lorentzian_ep(req: sc.FitTraceRequest):
        result = _domain_guard(
            fit_lorentzian, req.trace.to_trace(), req.config.to_config(), init=req.init
        )
        return sc.FitResultModel.from_result(result)

    @app.post("/fit/crossing", response_model=sc.FitResultModel)
    def fit_crossing_ep(req: sc.FitCrossingRequest):
        result = _domain_guard(
            fit_avoided_crossing,
            [t.to_trace() for t in req.traces],
            req.config.to_config(),
            CrossingFitOptions(mode=req.mode, use_trace_scales=req.use_trace_scales),
            init=req.init,
        )
        return sc.FitResultModel.from_result(result)

    @app.post("/fit/power-laws", response_model=sc.FitResultModel)
    def fit_power_laws_ep(req: sc.FitPowerLawsRequest):
        result = _domain_guard(
            fit_power_laws,
            [p.as_tuple() for p in req.coupling],
            [p.as_tuple() for p in req.stark],
        )
        return sc.FitResultModel.from_result(result)

    @app.post("/pipeline/{pipeline_id}", response_model=sc.PipelineResponse)
    def pipeline_ep(pipeline_id: str, req: sc.PipelineRequest):
        if pipeline_id not in PIPELINE_IDS:
            raise HTTPException(
                status_code=404,
                detail=f"unknown pipeline {pipeline_id!r}; expected one of {PIPELINE_IDS}",
            )
        dev = _device_from(req.device)

        def run():
            report, traces = run_pipeline(pipeline_id, dev, req.sweep.to_sweep())
            payload = sc.PipelineResponse(
                report=sc.PipelineReportModel.from_report(report))
            if req.include_traces:
                payload.traces = {
                    k: sc.TraceModel.from_trace(t) for k, t in traces.items()
                }
            return payload

        return _domain_guard(run)

    return app


app = create_app()
