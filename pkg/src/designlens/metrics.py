"""Design metrics over a validated code model.

Per class: WMC, DIT, NOC, CBO, LCOM.  Per package: afferent/efferent
coupling, instability, abstractness, and main-sequence distance.  Rational
values are exact Fractions; UNDEFINED is represented as None and is never
silently coerced to 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    INHERIT,
    ClassDef,
    CodeModel,
    DependencyGraph,
    PackageDef,
    QualifiedName,
    class_graph,
    resolve,
)


class UnknownPackageError(KeyError):
    """The named package is not declared in the model."""


@dataclass(frozen=True)
class ClassMetrics:
    name: QualifiedName
    wmc: int
    dit: int
    noc: int
    cbo: int
    lcom: int


@dataclass(frozen=True)
class PackageMetrics:
    name: str
    ca: int
    ce: int
    instability: Fraction | None
    abstractness: Fraction | None
    distance: Fraction | None


@dataclass(frozen=True)
class MetricsReport:
    """All metric values, keyed by class and by package, in name order."""

    per_class: dict[QualifiedName, ClassMetrics]
    per_package: dict[str, PackageMetrics]


def wmc(cls: ClassDef) -> int:
    """Weighted methods per class: the sum of every method's complexity weight."""
    return sum(method.weight for method in cls.methods)


def dit(model: CodeModel, name: QualifiedName) -> int:
    """Depth of inheritance tree: longest inherit path from the class to a root."""
    depth: dict[QualifiedName, int] = {}
    stack = [name]
    while stack:
        node = stack[-1]
        if node in depth:
            stack.pop()
            continue
        parents = resolve(model, node).parents
        pending = [p for p in parents if p not in depth]
        if pending:
            stack.extend(pending)
            continue
        depth[node] = (1 + max(depth[p] for p in parents)) if parents else 0
        stack.pop()
    return depth[name]


def noc(model: CodeModel, name: QualifiedName) -> int:
    """Number of children: classes anywhere in the model listing this class as a direct parent."""
    resolve(model, name)
    return sum(1 for _, cls in model.iter_classes() if name in cls.parents)


def cbo(model: CodeModel, name: QualifiedName) -> int:
    """Coupling between object classes: distinct other classes linked by a
    non-inherit edge in either direction."""
    resolve(model, name)
    coupled: set[QualifiedName] = set()
    for edge in class_graph(model).edges:
        if edge.kind == INHERIT or edge.source == edge.target:
            continue
        if edge.source == name:
            coupled.add(edge.target)
        elif edge.target == name:
            coupled.add(edge.source)
    return len(coupled)


def lcom(cls: ClassDef) -> int:
    """Lack of cohesion in methods: disjoint-read-set method pairs minus
    intersecting pairs, floored at zero."""
    read_sets = [method.reads for method in cls.methods]
    if len(read_sets) < 2:
        return 0
    disjoint = intersecting = 0
    for a, b in itertools.combinations(read_sets, 2):
        if a & b:
            intersecting += 1
        else:
            disjoint += 1
    return max(disjoint - intersecting, 0)


def afferent(model: CodeModel, package: str) -> int:
    """Ca: distinct classes outside the package with any edge into it (inherit included)."""
    _require_package(model, package)
    sources = {edge.source
               for edge in class_graph(model).edges
               if edge.target.package == package and edge.source.package != package}
    return len(sources)


def efferent(model: CodeModel, package: str) -> int:
    """Ce: distinct classes outside the package that its classes have any edge toward."""
    _require_package(model, package)
    targets = {edge.target
               for edge in class_graph(model).edges
               if edge.source.package == package and edge.target.package != package}
    return len(targets)


def instability(ca: int, ce: int) -> Fraction | None:
    """I = Ce / (Ca + Ce); None (UNDEFINED) for an isolated package."""
    if ca + ce == 0:
        return None
    return Fraction(ce, ca + ce)


def abstractness(package: PackageDef) -> Fraction | None:
    """A = Na / Nc; None (UNDEFINED) for an empty package."""
    if not package.classes:
        return None
    abstract = sum(1 for cls in package.classes if cls.is_abstract)
    return Fraction(abstract, len(package.classes))


def main_sequence_distance(a: Fraction, i: Fraction) -> Fraction:
    """Normalized distance from the main sequence A + I = 1."""
    return abs(Fraction(a) + Fraction(i) - 1)


def compute_all(model: CodeModel) -> MetricsReport:
    """Every metric for every class and package; identical to the individual calls."""
    graph = class_graph(model)
    depths = _dit_table(model)
    children = _noc_table(model)
    coupled = _cbo_table(graph)

    per_class: dict[QualifiedName, ClassMetrics] = {}
    for name in graph.nodes:
        cls = resolve(model, name)
        per_class[name] = ClassMetrics(
            name=name,
            wmc=wmc(cls),
            dit=depths[name],
            noc=children.get(name, 0),
            cbo=len(coupled.get(name, ())),
            lcom=lcom(cls),
        )

    incoming: dict[str, set[QualifiedName]] = {pkg.name: set() for pkg in model.packages}
    outgoing: dict[str, set[QualifiedName]] = {pkg.name: set() for pkg in model.packages}
    for edge in graph.edges:
        if edge.source.package != edge.target.package:
            incoming[edge.target.package].add(edge.source)
            outgoing[edge.source.package].add(edge.target)

    per_package: dict[str, PackageMetrics] = {}
    for pkg in sorted(model.packages, key=lambda p: p.name):
        ca, ce = len(incoming[pkg.name]), len(outgoing[pkg.name])
        i = instability(ca, ce)
        a = abstractness(pkg)
        d = main_sequence_distance(a, i) if a is not None and i is not None else None
        per_package[pkg.name] = PackageMetrics(pkg.name, ca, ce, i, a, d)
    return MetricsReport(per_class, per_package)


def _dit_table(model: CodeModel) -> dict[QualifiedName, int]:
    depths: dict[QualifiedName, int] = {}
    for name, _ in model.iter_classes():
        if name not in depths:
            stack = [name]
            while stack:
                node = stack[-1]
                if node in depths:
                    stack.pop()
                    continue
                parents = resolve(model, node).parents
                pending = [p for p in parents if p not in depths]
                if pending:
                    stack.extend(pending)
                    continue
                depths[node] = (1 + max(depths[p] for p in parents)) if parents else 0
                stack.pop()
    return depths


def _noc_table(model: CodeModel) -> dict[QualifiedName, int]:
    children: dict[QualifiedName, int] = {}
    for _, cls in model.iter_classes():
        for parent in dict.fromkeys(cls.parents):
            children[parent] = children.get(parent, 0) + 1
    return children


def _cbo_table(graph: DependencyGraph) -> dict[QualifiedName, set[QualifiedName]]:
    coupled: dict[QualifiedName, set[QualifiedName]] = {}
    for edge in graph.edges:
        if edge.kind == INHERIT or edge.source == edge.target:
            continue
        coupled.setdefault(edge.source, set()).add(edge.target)
        coupled.setdefault(edge.target, set()).add(edge.source)
    return coupled


def _require_package(model: CodeModel, package: str) -> None:
    if model.package(package) is None:
        raise UnknownPackageError(f"package '{package}' is not declared")


def format_rational(value: Fraction | int) -> str:
    """Render a rational with exactly 4 fractional digits, rounding half to even.

    Computed in exact integer arithmetic so output bytes never depend on
    platform float behavior.
    """
    fraction = Fraction(value)
    negative = fraction < 0
    scaled = abs(fraction) * 10000
    units, remainder = divmod(scaled.numerator, scaled.denominator)
    double = 2 * remainder
    if double > scaled.denominator or (double == scaled.denominator and units % 2):
        units += 1
    whole, frac = divmod(units, 10000)
    sign = "-" if negative and units else ""
    return f"{sign}{whole}.{frac:04d}"
