"""Appliance type library: prototype inheritance, priors, components, categories.

Types live one per document under ``appliance_types/``; room names and
category terms live in ``vocab/rooms.yaml`` and ``vocab/taxonomies.yaml``.
The built-in seed library ships in ``central_metadata/`` next to this module.

Each type names a single ``parent``.  Resolving a type merges the documents
of its whole ancestor chain from the root down (see :mod:`.inheritance`).
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

from .canonical import appliance_to_doc
from .diagnostics import Diagnostic, MetadataError, error, join_path, warning
from .inheritance import merge_node
from .loader import bind_appliance, bind_appliance_type
from .model import (
    DISTRIBUTION_NAMES, Appliance, ApplianceType, Categories, DistributionSet, Prior,
    check_local_invariants,
)
from .nodes import FORMAT_BY_SUFFIX, MAPPING, Node, parse_file
from .schema import SchemaFragment, fragment_from_doc

logger = logging.getLogger(__name__)

SEED_DIR = Path(__file__).parent / "central_metadata"
TAXONOMIES = ("traditional", "size", "electrical", "google_shopping")

# keys that steer inheritance and never appear in a resolved type
_CONTROL_KEYS = ("parent", "do_not_inherit")


@dataclass(frozen=True)
class ResolvedApplianceType:
    name: str
    properties: Mapping[str, Any]
    ancestry: tuple[str, ...]
    node: Node = field(compare=False, repr=False)

    @property
    def subtypes(self) -> tuple[str, ...]:
        return tuple(self.properties.get("subtypes", ()))

    @property
    def categories(self) -> Categories:
        doc = self.properties.get("categories") or {}
        return Categories(doc.get("traditional"), doc.get("size"),
                          tuple(doc.get("electrical", ())),
                          tuple(doc.get("google_shopping", ())))

    @property
    def components(self) -> tuple[Mapping[str, Any], ...]:
        return tuple(self.properties.get("components", ()))

    @property
    def allowed_components(self) -> tuple[str, ...]:
        return tuple(self.properties.get("allowed_components", ()))


@dataclass(frozen=True)
class ResolvedAppliance:
    appliance: Appliance
    type: ResolvedApplianceType
    components: tuple["ResolvedAppliance", ...]
    categories: Categories
    priors: Mapping[str, tuple[Prior, ...]]


class TypeLibrary:
    """Immutable collection of appliance types plus controlled vocabularies.

    Resolution results are memoised behind a lock; the cache never changes
    what any call returns.
    """

    def __init__(self, types: Mapping[str, ApplianceType], nodes: Mapping[str, Node],
                 room_vocabulary: Iterable[str] = (),
                 taxonomies: Optional[Mapping[str, Iterable[str]]] = None):
        self.types = dict(types)
        self.nodes = dict(nodes)
        self.room_vocabulary = frozenset(room_vocabulary)
        self.taxonomies = ({k: frozenset(v) for k, v in taxonomies.items()}
                           if taxonomies is not None else None)
        self._resolved: dict[str, ResolvedApplianceType] = {}
        self._lock = threading.Lock()

    def __contains__(self, name: str) -> bool:
        return name in self.types

    def __len__(self) -> int:
        return len(self.types)

    def get(self, name: str) -> ApplianceType:
        try:
            return self.types[name]
        except KeyError:
            raise MetadataError("E-TYPE-NOT-FOUND", f"unknown appliance type {name!r}",
                                join_path("appliance_types", name)) from None

    def children(self, name: str) -> list[str]:
        return sorted(t.name for t in self.types.values() if t.parent == name)

    def is_a(self, name: str, ancestor: str) -> bool:
        """True when ``name`` is ``ancestor`` or descends from it."""
        return name == ancestor or (name in self and ancestor in ancestry(self, name))

    def clear_cache(self) -> None:
        with self._lock:
            self._resolved.clear()


# --------------------------------------------------------------------------
# building and loading


def _as_node(doc) -> Node:
    return doc if isinstance(doc, Node) else Node.from_python(doc)


def _vocab_list(node: Optional[Node], path: str, diags: list) -> list[str]:
    if node is None:
        return []
    out = []
    for item in node.value if node.kind == "sequence" else ():
        if item.value in out:
            diags.append(error("E-VOCAB-DUP", path, f"term {item.value!r} listed twice",
                               item.span))
        else:
            out.append(item.value)
    return out


def build_type_library(docs: Iterable, rooms: Iterable[str] = (),
                       taxonomies: Optional[Mapping[str, Iterable[str]]] = None,
                       check: bool = True) -> TypeLibrary:
    """Build a library from type documents (Nodes or plain mappings).

    When ``taxonomies`` is None category terms are not checked against a
    vocabulary.  Raises MetadataError carrying every error found.
    """
    diags: list[Diagnostic] = []
    types: dict[str, ApplianceType] = {}
    nodes: dict[str, Node] = {}
    for doc in docs:
        node = _as_node(doc)
        name_node = node.get("name") if node.kind == MAPPING else None
        label = name_node.value if name_node is not None else "?"
        t, bind_diags = bind_appliance_type(node, join_path("appliance_types", label))
        diags.extend(bind_diags)
        if t is None:
            continue
        if t.name in types:
            diags.append(error("E-VOCAB-DUP", join_path("appliance_types", t.name),
                               f"appliance type {t.name!r} defined more than once", t.span))
            continue
        types[t.name] = t
        nodes[t.name] = node
    rooms = list(rooms)
    for r in {r for r in rooms if rooms.count(r) > 1}:
        diags.append(error("E-VOCAB-DUP", "vocab/rooms", f"room {r!r} listed twice"))
    library = TypeLibrary(types, nodes, rooms, taxonomies)
    if check:
        diags.extend(check_library(library))
    errors = [d for d in diags if d.is_error]
    if errors:
        raise MetadataError.from_diagnostics(errors)
    return library


def load_type_library(source=None, check: bool = True) -> TypeLibrary:
    """Load the built-in seed library (``source=None``) or a library folder.

    A library folder holds ``appliance_types/*.yaml`` and optionally
    ``vocab/rooms.yaml`` and ``vocab/taxonomies.yaml``; a folder containing
    ``central_metadata/`` is accepted too.  Pass ``check=False`` for a partial
    library that is only meaningful once overlaid on another.
    """
    root = SEED_DIR if source is None else Path(source)
    if not root.is_dir():
        raise MetadataError("E-IO", f"{root} is not a library folder")
    if not (root / "appliance_types").is_dir() and (root / "central_metadata").is_dir():
        root = root / "central_metadata"
    type_dir = root / "appliance_types"
    if not type_dir.is_dir():
        raise MetadataError("E-IO", f"{root} has no appliance_types folder")
    docs = [parse_file(p) for p in sorted(type_dir.iterdir())
            if p.is_file() and p.suffix in FORMAT_BY_SUFFIX]
    rooms, taxonomies, diags = _load_vocab(root / "vocab")
    if diags:
        raise MetadataError.from_diagnostics(diags)
    library = build_type_library(docs, rooms, taxonomies, check=check)
    logger.debug("loaded %d appliance types from %s", len(library), root)
    return library


def _find_vocab(folder: Path, stem: str) -> Optional[Path]:
    for suffix in (".yaml", ".yml", ".json"):
        if (folder / (stem + suffix)).is_file():
            return folder / (stem + suffix)
    return None


def _load_vocab(folder: Path):
    diags: list[Diagnostic] = []
    rooms: list[str] = []
    taxonomies = None
    path = _find_vocab(folder, "rooms")
    if path is not None:
        node = parse_file(path)
        rooms = _vocab_list(node.get("rooms") if node.kind == MAPPING else node,
                            "vocab/rooms", diags)
    path = _find_vocab(folder, "taxonomies")
    if path is not None:
        node = parse_file(path)
        taxonomies = {name: _vocab_list(node.get(name), f"vocab/taxonomies/{name}", diags)
                      for name in TAXONOMIES}
    return rooms, taxonomies, diags


def overlay_library(base: TypeLibrary, top: TypeLibrary) -> TypeLibrary:
    """Types of ``top`` replace same-named types of ``base`` wholesale; vocabularies union."""
    types = {**base.types, **top.types}
    nodes = {**base.nodes, **top.nodes}
    taxonomies = base.taxonomies
    if top.taxonomies is not None:
        taxonomies = {k: set(base.taxonomies.get(k, ()) if base.taxonomies else ())
                      | set(top.taxonomies.get(k, ())) for k in TAXONOMIES}
    library = TypeLibrary(types, nodes, base.room_vocabulary | top.room_vocabulary, taxonomies)
    errors = [d for d in check_library(library) if d.is_error]
    if errors:
        raise MetadataError.from_diagnostics(errors)
    return library


def _walk_local(obj, path: str, out: list) -> None:
    """Local invariants of a type and of the objects nested in it."""
    out.extend(check_local_invariants(obj, path))
    if isinstance(obj, ApplianceType):
        _walk_local(obj.categories, join_path(path, "categories"), out)
        _walk_local(obj.distributions, join_path(path, "distributions"), out)
        for i, c in enumerate(obj.components):
            _walk_local(c, join_path(path, "components", i), out)
    elif isinstance(obj, Appliance):
        for i, c in enumerate(obj.components):
            _walk_local(c, join_path(path, "components", i), out)
        _walk_local(obj.distributions, join_path(path, "distributions"), out)
    elif isinstance(obj, DistributionSet):
        for name, priors in obj.distributions.items():
            for i, p in enumerate(priors):
                _walk_local(p, join_path(path, name, i), out)
    elif isinstance(obj, Prior):
        if obj.distribution_of_data is not None:
            _walk_local(obj.distribution_of_data, join_path(path, "distribution_of_data"), out)
        if obj.model is not None:
            _walk_local(obj.model, join_path(path, "model"), out)


def check_library(library: TypeLibrary) -> list[Diagnostic]:
    """Referential integrity and vocabulary checks over the whole library."""
    diags: list[Diagnostic] = []
    broken = set()
    for name in sorted(library.types):
        t = library.types[name]
        path = join_path("appliance_types", name)
        _walk_local(t, path, diags)
        if t.parent is not None and t.parent not in library.types:
            diags.append(error("E-TYPE-UNKNOWN-PARENT", join_path(path, "parent"),
                               f"parent {t.parent!r} is not a known type", t.span))
            broken.add(name)
        if library.taxonomies is not None:
            for taxonomy in TAXONOMIES:
                terms = getattr(t.categories, taxonomy)
                terms = (terms,) if isinstance(terms, str) else terms or ()
                for term in terms:
                    if term not in library.taxonomies.get(taxonomy, ()):
                        diags.append(error(
                            "E-VOCAB-UNKNOWN-TERM", join_path(path, "categories", taxonomy),
                            f"{term!r} is not in the {taxonomy} vocabulary", t.span))
        referenced = [(join_path(path, "components", i, "type"), c.type)
                      for i, c in enumerate(t.components)]
        referenced += [(join_path(path, "allowed_components"), c)
                       for c in t.allowed_components]
        for ref_path, ref in referenced:
            if ref not in library.types:
                diags.append(error("E-TYPE-UNKNOWN-COMPONENT", ref_path,
                                   f"component type {ref!r} is not a known type", t.span))
                broken.add(name)
        try:
            fragment_from_doc(t.additional_properties, join_path(path, "additional_properties"))
        except MetadataError as exc:
            diags.extend(exc.diagnostics)

    for name in sorted(library.types):
        if name in broken:
            continue
        seen = [name]
        parent = library.types[name].parent
        while parent is not None and parent in library.types:
            if parent in seen:
                diags.append(error("E-TYPE-CYCLE", join_path("appliance_types", name, "parent"),
                                   f"inheritance cycle: {' -> '.join(seen + [parent])}",
                                   library.types[name].span))
                broken.add(name)
                break
            seen.append(parent)
            parent = library.types[parent].parent
        else:
            if parent is not None:
                broken.add(name)

    for name in sorted(set(library.types) - broken):
        try:
            resolve_type(library, name)
        except MetadataError as exc:
            diags.extend(exc.diagnostics)
            broken.add(name)
    diags.extend(_component_cycles(library, broken))
    return diags


def _component_cycles(library: TypeLibrary, broken: set) -> list[Diagnostic]:
    """Default-component containment must be finite."""
    edges = {name: [c["type"] for c in resolve_type(library, name).components]
             for name in library.types if name not in broken}
    diags = []
    state: dict[str, int] = {}

    def visit(name: str, trail: list[str]):
        state[name] = 1
        for child in edges.get(name, ()):
            if state.get(child) == 1:
                cycle = trail[trail.index(child):] + [child]
                diags.append(error("E-COMPONENT-CYCLE",
                                   join_path("appliance_types", name, "components"),
                                   f"component containment cycle: {' -> '.join(cycle)}",
                                   library.types[name].span))
            elif state.get(child) is None and child in edges:
                visit(child, trail + [child])
        state[name] = 2

    for name in sorted(edges):
        if name not in state:
            visit(name, [name])
    return diags


# --------------------------------------------------------------------------
# inheritance


def ancestry(library: TypeLibrary, type_name: str) -> tuple[str, ...]:
    """Ancestor names from the direct parent up to the root."""
    out: list[str] = []
    parent = library.get(type_name).parent
    while parent is not None:
        if parent == type_name or parent in out:
            raise MetadataError("E-TYPE-CYCLE", f"inheritance cycle through {parent!r}",
                                join_path("appliance_types", type_name, "parent"))
        out.append(parent)
        parent = library.get(parent).parent
    return tuple(out)


def own_properties(library: TypeLibrary, type_name: str) -> Node:
    """The type's document without the inheritance control keys."""
    node = library.nodes[type_name]
    return Node({k: v for k, v in node.value.items() if k not in _CONTROL_KEYS}, node.span)


def resolve_type(library: TypeLibrary, type_name: str) -> ResolvedApplianceType:
    """Merge the type's own properties over its parent's resolved properties."""
    cached = library._resolved.get(type_name)
    if cached is not None:
        return cached
    t = library.get(type_name)
    chain = ancestry(library, type_name)
    own = own_properties(library, type_name)
    if t.parent is None:
        merged = own
    else:
        parent = resolve_type(library, t.parent)
        merged = merge_node(parent.node, own, t.do_not_inherit,
                            join_path("appliance_types", type_name))
    resolved = ResolvedApplianceType(type_name, merged.to_python(), chain, merged)
    with library._lock:
        library._resolved.setdefault(type_name, resolved)
    return resolved


def _chain(library: TypeLibrary, type_name: str, blocked_by: str) -> list[ApplianceType]:
    """[self] + ancestry, cut after the first type that lists ``blocked_by`` in do_not_inherit."""
    out = [library.get(type_name)]
    for name in ancestry(library, type_name):
        if blocked_by in out[-1].do_not_inherit:
            break
        out.append(library.get(name))
    return out


def merged_additional_schema(library: TypeLibrary, type_name: str) -> SchemaFragment:
    """Additional-property rules of the type and its ancestors; nearest declaration wins."""
    merged: dict[str, Any] = {}
    for t in _chain(library, type_name, "additional_properties"):
        for prop, rule in t.additional_properties.items():
            merged.setdefault(prop, rule)
    return fragment_from_doc(merged)


def collect_priors(library: TypeLibrary, type_name: str, distribution: str) -> tuple[Prior, ...]:
    """Priors for ``distribution`` from the type and its ancestors.

    Each prior is tagged with ``distance``: 0 for the type's own priors, 1 for
    its parent's, 2 for the grandparent's and so on.  Results are ordered by
    distance, then declaration order.
    """
    if distribution not in DISTRIBUTION_NAMES:
        raise MetadataError("E-BAD-DISTRIBUTION-NAME",
                            f"{distribution!r} is not a known distribution name")
    out = []
    for distance, t in enumerate(_chain(library, type_name, "distributions")):
        out.extend(replace(p, distance=distance) for p in t.distributions.get(distribution))
    return tuple(out)


def collect_all_priors(library: TypeLibrary, type_name: str) -> dict[str, tuple[Prior, ...]]:
    out = {}
    for name in DISTRIBUTION_NAMES:
        priors = collect_priors(library, type_name, name)
        if priors:
            out[name] = priors
    return out


# --------------------------------------------------------------------------
# appliances


def _component_allowed(library: TypeLibrary, resolved: ResolvedApplianceType,
                       component_type: str) -> bool:
    declared = [c["type"] for c in resolved.components] + list(resolved.allowed_components)
    return any(library.is_a(component_type, t) for t in declared)


def expand_components(library: TypeLibrary, appliance: Appliance) -> tuple[Appliance, ...]:
    """The appliance's components after applying its type's default components.

    Each default component absorbs the first declared component whose type is
    the default's type or one of its descendants; the declared entry is merged
    over the default.  Defaults with no match are kept as they are, and
    declared components matching no default are appended in order.
    """
    resolved = resolve_type(library, appliance.type)
    declared = list(appliance.components)
    used = [False] * len(declared)
    out = []
    for default in resolved.components:
        match = None
        for i, comp in enumerate(declared):
            if not used[i] and library.is_a(comp.type, default["type"]):
                match = i
                break
        if match is None:
            comp, diags = bind_appliance(default)
            if comp is None:
                raise MetadataError.from_diagnostics(diags)
            out.append(comp)
            continue
        used[match] = True
        comp = declared[match]
        # an instance that sets count or multiple replaces the default's choice
        blocked = ("count", "multiple") if comp.count is not None or comp.multiple is not None else ()
        merged = merge_node(Node.from_python(default), Node.from_python(appliance_to_doc(comp)),
                            blocked)
        bound, diags = bind_appliance(merged)
        if bound is None:
            raise MetadataError.from_diagnostics(diags)
        out.append(replace(bound, span=comp.span))
    out.extend(c for c, u in zip(declared, used) if not u)
    return tuple(out)


def _union(*groups: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set().union(*groups)))


def effective_categories(library: TypeLibrary, appliance: Appliance) -> Categories:
    """Categories of the appliance's type plus, for the set-valued taxonomies,
    those of every (recursively expanded) component."""
    if appliance.type not in library:
        raise MetadataError("E-TYPE-NOT-FOUND", f"unknown appliance type {appliance.type!r}")
    base = resolve_type(library, appliance.type).categories
    parts = [effective_categories(library, c) for c in expand_components(library, appliance)]
    return Categories(
        base.traditional, base.size,
        _union(base.electrical, *(p.electrical for p in parts)),
        _union(base.google_shopping, *(p.google_shopping for p in parts)),
    )


def appliance_diagnostics(library: TypeLibrary, appliance: Appliance,
                          path: str = "") -> list[Diagnostic]:
    """Type, subtype and component checks for one appliance (not recursive)."""
    if appliance.type not in library:
        return [error("E-UNKNOWN-APPLIANCE-TYPE", join_path(path, "type"),
                      f"{appliance.type!r} is not a known appliance type", appliance.span)]
    resolved = resolve_type(library, appliance.type)
    out = []
    if appliance.subtype is not None and appliance.subtype not in resolved.subtypes:
        out.append(error("E-BAD-SUBTYPE", join_path(path, "subtype"),
                         f"{appliance.subtype!r} is not a subtype of {appliance.type!r} "
                         f"(subtypes: {list(resolved.subtypes)})", appliance.span))
    if resolved.components or resolved.allowed_components:
        for i, comp in enumerate(appliance.components):
            if comp.type in library and not _component_allowed(library, resolved, comp.type):
                out.append(warning("W-UNEXPECTED-COMPONENT",
                                   join_path(path, "components", i),
                                   f"{appliance.type!r} is not expected to contain "
                                   f"{comp.type!r}", comp.span))
    return out


def resolve_appliance(library: TypeLibrary, appliance: Appliance,
                      path: str = "") -> ResolvedAppliance:
    """Join an appliance with its resolved type, components, categories and priors.

    Raises MetadataError with E-UNKNOWN-APPLIANCE-TYPE, E-BAD-SUBTYPE or
    E-COUNT-AND-MULTIPLE.
    """
    problems = [d for d in appliance_diagnostics(library, appliance, path) if d.is_error]
    if appliance.count is not None and appliance.multiple is not None:
        problems.append(error("E-COUNT-AND-MULTIPLE", path,
                              "count and multiple are mutually exclusive", appliance.span))
    if problems:
        raise MetadataError.from_diagnostics(problems)
    resolved = resolve_type(library, appliance.type)
    components = tuple(resolve_appliance(library, c, join_path(path, "components", i))
                       for i, c in enumerate(expand_components(library, appliance)))
    base = resolved.categories
    categories = Categories(
        base.traditional, base.size,
        _union(base.electrical, *(c.categories.electrical for c in components)),
        _union(base.google_shopping, *(c.categories.google_shopping for c in components)),
    )
    return ResolvedAppliance(appliance, resolved, components, categories,
                             collect_all_priors(library, appliance.type))


_SEED: Optional[TypeLibrary] = None
_SEED_LOCK = threading.Lock()


def seed_library() -> TypeLibrary:
    """The built-in library, loaded once per process."""
    global _SEED
    with _SEED_LOCK:
        if _SEED is None:
            _SEED = load_type_library()
        return _SEED
