"""``nilm-meta`` command line.

Exit status: 0 valid, 1 validation errors, 2 usage, IO or parse failure.
Data goes to stdout and diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .canonical import canonical_dumps, export_dataset, prior_to_doc, resolved_appliance_to_doc
from .diagnostics import MetadataError
from .loader import bind, load_dataset
from .typedb import (
    TypeLibrary, ancestry, collect_all_priors, load_type_library, overlay_library,
    resolve_appliance, resolve_type, seed_library,
)
from .validate import validate_path
from .wiring import build_wiring_forest, render_forest

EXIT_OK, EXIT_INVALID, EXIT_FAILURE = 0, 1, 2
LIBRARY_ENV = "NILM_META_LIBRARY"


class _Failure(Exception):
    """Abort the command with EXIT_FAILURE after printing ``diagnostics``."""

    def __init__(self, exc: MetadataError):
        super().__init__(str(exc))
        self.diagnostics = exc.diagnostics


def _err(text: str) -> None:
    sys.stderr.write(text if text.endswith("\n") else text + "\n")


def _library(args) -> TypeLibrary:
    source = getattr(args, "library", None) or os.environ.get(LIBRARY_ENV)
    if not source:
        return seed_library()
    try:
        return overlay_library(seed_library(), load_type_library(source, check=False))
    except MetadataError as exc:
        raise _Failure(exc)


def _bound(path):
    """Load and bind; binding errors are printed and give None."""
    try:
        raw = load_dataset(path)
    except MetadataError as exc:
        raise _Failure(exc)
    dataset, diags = bind(raw)
    for d in diags:
        _err(d.to_text())
    return dataset


def cmd_validate(args) -> int:
    library = _library(args)
    try:
        _, report = validate_path(args.dir, library)
    except MetadataError as exc:
        raise _Failure(exc)
    if args.strict:
        report = report.strict()
    sys.stdout.write(report.to_json() if args.format == "json" else report.to_text())
    return EXIT_OK if report.valid else EXIT_INVALID


def cmd_resolve(args) -> int:
    library = _library(args)
    dataset = _bound(args.dir)
    if dataset is None:
        return EXIT_INVALID
    if args.building is None:
        meters = dataset.dataset_level_meters
        path = "elec_meters"
    else:
        building = dataset.building(args.building)
        if building is None:
            _err(f"error: no building {args.building}")
            return EXIT_FAILURE
        meters = building.elec_meters
        path = f"buildings/{args.building}/elec_meters"
    meter = next((m for m in meters if m.instance == args.meter), None)
    if meter is None:
        _err(f"error: no meter {args.meter} at {path}")
        return EXIT_FAILURE
    records = []
    try:
        for i, a in enumerate(meter.appliances):
            r = resolve_appliance(library, a, f"{path}/{meter.instance}/appliances/{i}")
            records.append(resolved_appliance_to_doc(r))
    except MetadataError as exc:
        for d in exc.diagnostics:
            _err(d.to_text())
        return EXIT_INVALID
    sys.stdout.write(canonical_dumps(records))
    return EXIT_OK


def cmd_tree(args) -> int:
    dataset = _bound(args.dir)
    if dataset is None:
        return EXIT_INVALID
    forest, diags = build_wiring_forest(dataset)
    sys.stdout.write(render_forest(forest))
    for d in diags:
        _err(d.to_text())
    return EXIT_INVALID if any(d.is_error for d in diags) else EXIT_OK


def cmd_types(args) -> int:
    library = _library(args)
    if args.name not in library:
        _err(f"error: E-TYPE-NOT-FOUND unknown appliance type {args.name!r}")
        return EXIT_FAILURE
    try:
        if args.action == "ancestry":
            sys.stdout.write("".join(name + "\n" for name in ancestry(library, args.name)))
        elif args.action == "show":
            resolved = resolve_type(library, args.name)
            sys.stdout.write(canonical_dumps({"name": resolved.name,
                                              "ancestry": list(resolved.ancestry),
                                              "properties": resolved.properties}))
        else:
            priors = collect_all_priors(library, args.name)
            sys.stdout.write(canonical_dumps({k: [prior_to_doc(p) for p in v]
                                              for k, v in priors.items()}))
    except MetadataError as exc:
        raise _Failure(exc)
    return EXIT_OK


def cmd_export(args) -> int:
    library = _library(args)
    try:
        dataset, report = validate_path(args.dir, library)
    except MetadataError as exc:
        raise _Failure(exc)
    if not report.valid:
        _err(report.to_text())
        return EXIT_INVALID
    text = export_dataset(dataset, library, resolved=args.resolved)
    if args.output in (None, "-"):
        sys.stdout.write(text)
        return EXIT_OK
    try:
        Path(args.output).write_bytes(text.encode("utf-8"))
    except OSError as exc:
        _err(f"error: E-IO cannot write {args.output}: {exc.strerror}")
        return EXIT_FAILURE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nilm-meta",
                                     description="Validate and inspect NILM dataset metadata.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text, needs_dir=True):
        p = sub.add_parser(name, help=help_text)
        if needs_dir:
            p.add_argument("dir", help="metadata folder or single YAML/JSON document")
        p.add_argument("--library", help=f"type library folder overlaid on the built-in one "
                                         f"(default: ${LIBRARY_ENV})")
        p.set_defaults(func=func)
        return p

    p = command("validate", cmd_validate, "validate a dataset")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--strict", action="store_true", help="treat warnings as errors")

    p = command("resolve", cmd_resolve, "print resolved appliances of one meter")
    p.add_argument("--building", type=int, help="building instance (omit for dataset-level meters)")
    p.add_argument("--meter", type=int, required=True)

    command("tree", cmd_tree, "print the mains wiring forest")

    p = command("types", cmd_types, "query the appliance type library", needs_dir=False)
    p.add_argument("action", choices=("show", "ancestry", "priors"))
    p.add_argument("name")

    p = command("export", cmd_export, "write the canonical JSON form")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.add_argument("--resolved", action="store_true", help="inline resolved appliance types")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Failure as exc:
        for d in exc.diagnostics:
            _err(d.to_text())
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
