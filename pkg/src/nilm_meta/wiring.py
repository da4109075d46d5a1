"""Mains wiring: the forest of meters formed by ``site_meter`` / ``submeter_of`` links."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from .diagnostics import Diagnostic, MetadataError, error, join_path, warning
from .model import Dataset, ElecMeter

DEFAULT_MAX_DEPTH = 6


@dataclass(frozen=True)
class MeterRef:
    """Meter identity: (building instance, meter instance).

    ``building`` is None for meters held directly by the dataset.
    """
    building: Optional[int]
    meter: int

    def sort_key(self):
        return (self.building is not None, self.building or 0, self.meter)

    @property
    def path(self) -> str:
        if self.building is None:
            return join_path("elec_meters", self.meter)
        return join_path("buildings", self.building, "elec_meters", self.meter)

    def __str__(self) -> str:
        owner = "dataset" if self.building is None else f"building{self.building}"
        return f"{owner}/meter{self.meter}"


@dataclass(frozen=True)
class WiringForest:
    nodes: frozenset[MeterRef]
    parents: Mapping[MeterRef, MeterRef]
    roots: frozenset[MeterRef]
    labels: Mapping[MeterRef, str] = field(default_factory=dict, compare=False)

    def children(self, ref: MeterRef) -> list[MeterRef]:
        return sorted((c for c, p in self.parents.items() if p == ref), key=MeterRef.sort_key)

    def path_to_root(self, ref: MeterRef) -> list[MeterRef]:
        out = [ref]
        while out[-1] in self.parents:
            out.append(self.parents[out[-1]])
        return out

    def levels(self, root: MeterRef) -> int:
        """Number of levels in the tree below ``root`` (a lone root has 1)."""
        kids = defaultdict(list)
        for c, p in self.parents.items():
            kids[p].append(c)
        depth, frontier = 0, [root]
        while frontier:
            depth += 1
            frontier = [c for n in frontier for c in kids[n]]
        return depth


def iter_meters(dataset: Dataset) -> Iterator[tuple[MeterRef, ElecMeter]]:
    """Every meter in document order: dataset-level meters, then per building."""
    for m in dataset.dataset_level_meters:
        yield MeterRef(None, m.instance), m
    for b in dataset.buildings:
        for m in b.elec_meters:
            yield MeterRef(b.instance, m.instance), m


def build_wiring_forest(dataset: Dataset) -> tuple[WiringForest, list[Diagnostic]]:
    """Build the meter forest and report dangling links, bad buildings and cycles.

    Meters are processed in sorted identity order, so the result and the
    diagnostics do not depend on the order meters were declared in.  The edge
    that closes a cycle is reported and left out of the forest.
    """
    meters: dict[MeterRef, ElecMeter] = {}
    for ref, m in iter_meters(dataset):
        meters.setdefault(ref, m)
    buildings = {b.instance for b in dataset.buildings}
    diags: list[Diagnostic] = []
    parents: dict[MeterRef, MeterRef] = {}
    roots = set()
    labels = {}
    order = sorted(meters, key=MeterRef.sort_key)

    for ref in order:
        m = meters[ref]
        if m.dominant_appliance is not None:
            labels[ref] = m.dominant_appliance.type
        if m.site_meter:
            roots.add(ref)
            continue
        if m.submeter_of is None:
            diags.append(error("E-WIRING-NO-PARENT-OR-ROOT", ref.path,
                               "a meter must set either site_meter: true or submeter_of",
                               m.span))
            continue
        upstream_building = ref.building
        if m.upstream_meter_in_building is not None:
            upstream_building = m.upstream_meter_in_building
            if upstream_building not in buildings:
                diags.append(error("E-WIRING-BAD-BUILDING",
                                   join_path(ref.path, "upstream_meter_in_building"),
                                   f"building {upstream_building} does not exist", m.span))
                continue
        target = MeterRef(upstream_building, m.submeter_of)
        if target not in meters:
            diags.append(error("E-WIRING-DANGLING", join_path(ref.path, "submeter_of"),
                               f"upstream meter {target} does not exist", m.span))
            continue
        parents[ref] = target

    done: set[MeterRef] = set()
    for start in order:
        trail: list[MeterRef] = []
        on_trail: set[MeterRef] = set()
        cur: Optional[MeterRef] = start
        while cur is not None and cur not in done and cur not in on_trail:
            trail.append(cur)
            on_trail.add(cur)
            cur = parents.get(cur)
        if cur is not None and cur in on_trail:
            closing = trail[-1]
            cycle = trail[trail.index(cur):] + [cur]
            diags.append(error("E-WIRING-CYCLE", join_path(closing.path, "submeter_of"),
                               "wiring cycle: " + " -> ".join(map(str, cycle)),
                               meters[closing].span))
            del parents[closing]
        done.update(trail)

    forest = WiringForest(frozenset(meters), parents, frozenset(roots), labels)
    return forest, diags


def _check_ref(forest: WiringForest, ref: MeterRef) -> None:
    if ref not in forest.nodes:
        raise MetadataError("E-REF-NOT-FOUND", f"no meter {ref}", ref.path)


def submeters_of(forest: WiringForest, ref: MeterRef) -> frozenset[MeterRef]:
    _check_ref(forest, ref)
    return frozenset(forest.children(ref))


def upstream_of(forest: WiringForest, ref: MeterRef) -> Optional[MeterRef]:
    _check_ref(forest, ref)
    return forest.parents.get(ref)


def validate_wiring(dataset: Dataset,
                    max_depth: int = DEFAULT_MAX_DEPTH) -> list[Diagnostic]:
    """Forest errors plus coverage warnings.

    W-NO-SITE-METER: a building has meters but none is a site meter.
    W-DEEP-TREE: a tree has more than ``max_depth`` levels.
    W-SHARED-APPLIANCE: one appliance instance is listed on several meters of
    a building (datasets that used two meters on a split-phase appliance).
    """
    forest, diags = build_wiring_forest(dataset)
    for b in dataset.buildings:
        if b.elec_meters and not any(m.site_meter for m in b.elec_meters):
            diags.append(warning("W-NO-SITE-METER", join_path("buildings", b.instance),
                                 f"building {b.instance} has meters but no site meter",
                                 b.span))
        seen = {}
        for m in b.elec_meters:
            for i, a in enumerate(m.appliances):
                first = seen.setdefault(a.ref, m.instance)
                if first != m.instance:
                    diags.append(warning(
                        "W-SHARED-APPLIANCE",
                        join_path("buildings", b.instance, "elec_meters", m.instance,
                                  "appliances", i),
                        f"{a.type},{a.instance} is also listed on meter {first}", a.span))
    for root in sorted(forest.roots, key=MeterRef.sort_key):
        levels = forest.levels(root)
        if levels > max_depth:
            diags.append(warning("W-DEEP-TREE", root.path,
                                 f"wiring tree under {root} has {levels} levels "
                                 f"(limit {max_depth})"))
    return diags


def render_forest(forest: WiringForest) -> str:
    """One meter per line, two spaces of indent per level, roots marked ``*``.

    Meters left without a parent by wiring errors are listed after the trees,
    unmarked.
    """
    lines: list[str] = []

    def emit(ref: MeterRef, depth: int, root: bool):
        label = str(ref)
        if ref in forest.labels:
            label += f" ({forest.labels[ref]})"
        lines.append(("* " if root else "  " * depth) + label)
        for child in forest.children(ref):
            emit(child, depth + 1, False)

    for root in sorted(forest.roots, key=MeterRef.sort_key):
        emit(root, 0, True)
    orphans = [r for r in forest.nodes if r not in forest.roots and r not in forest.parents]
    for ref in sorted(orphans, key=MeterRef.sort_key):
        emit(ref, 0, False)
    return "".join(line + "\n" for line in lines)
