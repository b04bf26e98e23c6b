"""Command-line client of the analysis service.

Runs in process by default; `--server URL` sends the same request to a
running service instance instead.  Machine-readable reports are JSON with
sorted keys; timing is omitted unless requested so that identical inputs
and seeds produce byte-identical artifacts.

Exit codes: 0 all verdicts pass, 1 verdict failure, 2 usage or schema error.
"""

from __future__ import annotations

import json
import sys
from typing import Callable

import click
from pydantic import ValidationError

from .service.models import (
    BatchReport,
    CurvatureRequest,
    EWRequest,
    InvariantsRequest,
    IsometryRequest,
    LiftRequest,
    MapSpec,
    Report,
    SelftestRequest,
    StructureDoc,
)
from .service import runner as local_runner

_ENDPOINTS = {
    "invariants": ("/invariants", local_runner.run_invariants),
    "curvature": ("/curvature", local_runner.run_curvature),
    "einstein-weyl": ("/einstein-weyl", local_runner.run_ew),
    "isometry": ("/isometry", local_runner.run_isometry),
    "lift": ("/lift", local_runner.run_lift),
    "selftest": ("/selftest", local_runner.run_selftest_task),
}


class CliError(click.ClickException):
    exit_code = 2


def _dispatch(kind: str, request, server: str | None) -> Report:
    path, fn = _ENDPOINTS[kind]
    if server is None:
        return fn(request)
    import httpx

    resp = httpx.post(
        server.rstrip("/") + path,
        json=request.model_dump(mode="json"),
        timeout=600.0,
    )
    if resp.status_code == 422:
        raise CliError(f"request rejected by server: {resp.text}")
    resp.raise_for_status()
    return Report.model_validate(resp.json())


def _load_doc(path: str) -> StructureDoc:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read structure document {path}: {exc}") from exc
    try:
        return StructureDoc.model_validate(data)
    except ValidationError as exc:
        raise CliError(f"invalid structure document: {exc}") from exc


def _selector_kwargs(structure: str | None, builtin: str | None, seed, samples, tol) -> dict:
    if (structure is None) == (builtin is None):
        raise CliError("provide exactly one of --structure FILE or --builtin NAME")
    kwargs = {"seed": seed, "samples": samples, "tol": tol}
    if structure is not None:
        kwargs["structure"] = _load_doc(structure).model_dump()
    else:
        kwargs["builtin"] = builtin
    return kwargs


def _build_request(model, **kwargs):
    try:
        return model(**kwargs)
    except ValidationError as exc:
        raise CliError(str(exc)) from exc


def _verdict_text(v: dict) -> str:
    kind = v.get("kind")
    if kind == "symbolic_zero":
        return "zero (symbolic)"
    if kind == "numeric_zero":
        return f"zero (numeric, max {v.get('max_abs'):.2e}, {v.get('samples_used')} samples)"
    return f"NONZERO value {v.get('witness_value'):.6e} at {v.get('witness_point')}"


def _is_verdict(value) -> bool:
    return isinstance(value, dict) and set(value) >= {"kind", "samples_used"}


def _render(value, indent: int, lines: list[str]):
    pad = "  " * indent
    if _is_verdict(value):
        lines.append(pad + _verdict_text(value))
        return
    if isinstance(value, dict):
        for key in sorted(value):
            sub = value[key]
            if isinstance(sub, (dict, list)) and sub and not _is_verdict(sub):
                lines.append(f"{pad}{key}:")
                _render(sub, indent + 1, lines)
            elif _is_verdict(sub):
                lines.append(f"{pad}{key}: {_verdict_text(sub)}")
            else:
                lines.append(f"{pad}{key}: {sub}")
        return
    if isinstance(value, list):
        if value and all(isinstance(r, list) for r in value):
            widths = [
                max(len(str(row[c])) for row in value) for c in range(len(value[0]))
            ]
            for row in value:
                cells = "  ".join(str(x).rjust(w) for x, w in zip(row, widths))
                lines.append(f"{pad}[ {cells} ]")
            return
        for item in value:
            if isinstance(item, (dict, list)):
                _render(item, indent + 1, lines)
            else:
                lines.append(f"{pad}- {item}")
        return
    lines.append(f"{pad}{value}")


def _emit(report, json_path: str | None, timings: bool):
    data = report.model_dump()
    if not timings:
        data.pop("timing_ms", None)
        if "reports" in data:
            for sub in data["reports"]:
                sub.pop("timing_ms", None)
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, sort_keys=True, indent=2, ensure_ascii=False)
            fh.write("\n")
    lines: list[str] = []
    task = data.get("task", "report")
    status = "PASS" if data.get("ok") else "FAIL"
    lines.append(f"== {task} [{status}] engine {data.get('engine_version')} ==")
    if "seed" in data:
        lines.append(
            f"seed {data['seed']}  samples {data['samples']}  tolerance {data['tolerance']}"
        )
    for failure in data.get("failures", []):
        lines.append(f"failure: {failure}")
    if "results" in data:
        _render(data["results"], 0, lines)
    if "reports" in data:
        for sub in data["reports"]:
            lines.append(f"-- task {sub['task']} [{'PASS' if sub['ok'] else 'FAIL'}] --")
            _render(sub.get("results", {}), 1, lines)
    click.echo("\n".join(lines))
    sys.exit(0 if data.get("ok") else 1)


def _common_options(fn: Callable) -> Callable:
    fn = click.option("--structure", type=click.Path(), help="structure document (JSON)")(fn)
    fn = click.option("--builtin", help="named builtin structure")(fn)
    fn = click.option("--seed", type=int, default=20240, show_default=True)(fn)
    fn = click.option("--samples", type=int, default=20, show_default=True)(fn)
    fn = click.option("--tol", type=float, default=1e-9, show_default=True)(fn)
    fn = click.option("--json", "json_path", type=click.Path(), help="write the JSON report here")(fn)
    fn = click.option("--server", help="URL of a running service; default is in-process")(fn)
    fn = click.option("--timings", is_flag=True, help="include wall-clock timing in the output")(fn)
    return fn


@click.group()
def main():
    """Contact sub-pseudo-Riemannian analysis engine."""


@main.command()
@_common_options
def invariants(structure, builtin, seed, samples, tol, json_path, server, timings):
    """Contact form, Reeb field, structural functions and invariants."""
    req = _build_request(
        InvariantsRequest, **_selector_kwargs(structure, builtin, seed, samples, tol)
    )
    _emit(_dispatch("invariants", req, server), json_path, timings)


@main.command()
@_common_options
@click.option("--c", "c_text", default="1", show_default=True, help="extension coefficient (expression)")
def curvature(structure, builtin, seed, samples, tol, json_path, server, timings, c_text):
    """Connections, curvature tensors and the sectional decomposition."""
    req = _build_request(
        CurvatureRequest,
        c=c_text,
        **_selector_kwargs(structure, builtin, seed, samples, tol),
    )
    _emit(_dispatch("curvature", req, server), json_path, timings)


@main.command()
@_common_options
@click.option("--epsilon", default="0", show_default=True, help="deformation parameter (rational)")
@click.option("--c", "c_text", default=None, help="extension coefficient; default is the predicted value")
def ew(structure, builtin, seed, samples, tol, json_path, server, timings, epsilon, c_text):
    """Einstein-Weyl verdicts for the deformation pairs."""
    kwargs = {"seed": seed, "samples": samples, "tol": tol}
    if builtin == local_runner.BERGER_BUILTIN:
        kwargs["builtin"] = builtin
    else:
        kwargs.update(_selector_kwargs(structure, builtin, seed, samples, tol))
    req = _build_request(EWRequest, epsilon=epsilon, c=c_text, **kwargs)
    _emit(_dispatch("einstein-weyl", req, server), json_path, timings)


@main.command()
@_common_options
@click.option("--map", "map_text", help="comma-separated target components")
@click.option("--inverse", "inverse_text", help="comma-separated inverse components")
@click.option("--translation", help="comma-separated translation parameters (dim 5)")
@click.option("--family", "family_case", type=click.Choice(["1", "2", "3"]), help="structure-group family case")
@click.option("--index", "family_index", help="family line index")
@click.option("--theta", default="1", show_default=True, help="family parameter (rational)")
def isometry(structure, builtin, seed, samples, tol, json_path, server, timings,
             map_text, inverse_text, translation, family_case, family_index, theta):
    """Verify candidate isometries, families, ranks and frequencies."""
    kwargs = _selector_kwargs(structure, builtin, seed, samples, tol)
    if map_text is not None:
        if inverse_text is None:
            raise CliError("--map requires --inverse")
        kwargs["map"] = MapSpec(
            components=[t.strip() for t in map_text.split(",")],
            inverse=[t.strip() for t in inverse_text.split(",")],
        ).model_dump()
    if translation is not None:
        kwargs["translation"] = [t.strip() for t in translation.split(",")]
    if family_case is not None:
        kwargs["family_case"] = int(family_case)
        kwargs["family_index"] = family_index
    kwargs["theta"] = theta
    req = _build_request(IsometryRequest, **kwargs)
    _emit(_dispatch("isometry", req, server), json_path, timings)


@main.command()
@click.option("--base-coords", required=True, help="comma-separated base coordinates")
@click.option("--base-frame", required=True, help="frame fields, ';' between fields, ',' between components")
@click.option("--signature", required=True, help="comma-separated +1/-1 per frame field")
@click.option("--theta", required=True, help="comma-separated potential one-form components")
@click.option("--domain", default=None, help="per-coordinate intervals, e.g. 'x=-1:1,y=0.5:2'")
@click.option("--excluded", default=None, help="comma-separated excluded-locus expressions")
@click.option("--fibre-coord", default="z", show_default=True)
@click.option("--seed", type=int, default=20240, show_default=True)
@click.option("--samples", type=int, default=20, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--json", "json_path", type=click.Path())
@click.option("--server", default=None)
@click.option("--timings", is_flag=True)
def lift(base_coords, base_frame, signature, theta, domain, excluded, fibre_coord,
         seed, samples, tol, json_path, server, timings):
    """Lift a base metric with symplectic potential to a contact structure."""
    coords = [c.strip() for c in base_coords.split(",")]
    frame = [[c.strip() for c in row.split(",")] for row in base_frame.split(";")]
    dom = {}
    if domain:
        for item in domain.split(","):
            name, _, rng = item.partition("=")
            lo, _, hi = rng.partition(":")
            dom[name.strip()] = (float(lo), float(hi))
    req = _build_request(
        LiftRequest,
        coords=coords,
        domain=dom,
        excluded=[e.strip() for e in excluded.split(",")] if excluded else [],
        frame=frame,
        signature=[int(s) for s in signature.split(",")],
        theta=[t.strip() for t in theta.split(",")],
        fibre_coord=fibre_coord,
        seed=seed,
        samples=samples,
        tol=tol,
    )
    _emit(_dispatch("lift", req, server), json_path, timings)


@main.command()
@click.option("--criteria", default=None, help="comma-separated criterion ids; default all")
@click.option("--seed", type=int, default=20240, show_default=True)
@click.option("--samples", type=int, default=20, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--json", "json_path", type=click.Path())
@click.option("--server", default=None)
@click.option("--timings", is_flag=True)
def selftest(criteria, seed, samples, tol, json_path, server, timings):
    """Run the acceptance suite and print one line per criterion."""
    req = _build_request(
        SelftestRequest,
        criteria=[c.strip() for c in criteria.split(",")] if criteria else None,
        seed=seed,
        samples=samples,
        tol=tol,
    )
    report = _dispatch("selftest", req, server)
    for item in report.results.get("criteria", []):
        status = "PASS" if item["passed"] else "FAIL"
        click.echo(f"{status} criterion {item['id']}: {item['description']}")
    _emit(report, json_path, timings)


@main.command()
@click.option("--structure", "structure_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=20240, show_default=True)
@click.option("--samples", type=int, default=20, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--json", "json_path", type=click.Path())
@click.option("--server", default=None)
@click.option("--timings", is_flag=True)
def run(structure_path, seed, samples, tol, json_path, server, timings):
    """Execute the tasks embedded in a structure document."""
    doc = _load_doc(structure_path)
    if not doc.tasks:
        raise CliError("the structure document declares no tasks")
    if server is not None:
        import httpx

        payload = {
            "structure": doc.model_dump(),
            "seed": seed,
            "samples": samples,
            "tol": tol,
        }
        resp = httpx.post(server.rstrip("/") + "/batch", json=payload, timeout=600.0)
        if resp.status_code == 422:
            raise CliError(f"request rejected by server: {resp.text}")
        resp.raise_for_status()
        report = BatchReport.model_validate(resp.json())
    else:
        settings = SelftestRequest(seed=seed, samples=samples, tol=tol)
        report = local_runner.run_batch(doc, settings)
    _emit(report, json_path, timings)


@main.command()
def builtins():
    """List the named builtin structures."""
    for name in local_runner.list_builtins():
        click.echo(name)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Start the analysis service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
