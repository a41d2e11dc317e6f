"""Principle checks over metrics and graphs.

Violations: package dependency cycles (ADP) and dependencies pointing toward
less stable packages (SDP).  Advisories: main-sequence zoning (SAP), low
cohesion (SRP), and abstract classes depending on concrete ones (DIP).
Checks skip UNDEFINED metric values instead of inventing numbers for them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .metrics import MetricsReport
from .model import INHERIT, CodeModel, DependencyGraph, class_graph, package_graph, resolve
from .tarjan import strongly_connected_components

RULE_ADP = "ADP"
RULE_SDP = "SDP"
RULE_SAP_PAIN = "SAP_PAIN"
RULE_SAP_USELESS = "SAP_USELESS"
RULE_SRP = "SRP"
RULE_DIP = "DIP"
RULE_EMPTY_PACKAGE = "EMPTY_PACKAGE"

VIOLATION = "violation"
ADVISORY = "advisory"
WARNING = "warning"

SEVERITY_BY_RULE = {
    RULE_ADP: VIOLATION,
    RULE_SDP: VIOLATION,
    RULE_SAP_PAIN: ADVISORY,
    RULE_SAP_USELESS: ADVISORY,
    RULE_SRP: ADVISORY,
    RULE_DIP: ADVISORY,
    RULE_EMPTY_PACKAGE: WARNING,
}


@dataclass(frozen=True)
class Finding:
    """One principle violation, advisory, or warning with its measured evidence."""

    rule: str
    severity: str
    locus: str
    evidence: dict


@dataclass(frozen=True)
class Thresholds:
    """Tunable detection thresholds; the defaults are conventions, not claims."""

    srp_lcom_min: int = 1
    srp_method_min: int = 3
    sap_distance_min: Fraction = Fraction(7, 10)
    sap_extreme: Fraction = Fraction(1, 5)

    def __post_init__(self) -> None:
        values = (self.srp_lcom_min, self.srp_method_min, self.sap_distance_min, self.sap_extreme)
        if any(v < 0 for v in values):
            raise ValueError("thresholds must be non-negative")
        if not self.sap_extreme < Fraction(1, 2):
            raise ValueError("sap_extreme must be below 0.5")


def _finding(rule: str, locus: str, evidence: dict) -> Finding:
    return Finding(rule, SEVERITY_BY_RULE[rule], locus, evidence)


def detect_cycles(graph: DependencyGraph) -> list[list[str]]:
    """ADP: strongly connected package groups of size >= 2.

    Members are sorted within each group; groups are sorted by their smallest
    member.
    """
    if graph.granularity != "package":
        raise ValueError("cycle detection runs on the package-granularity graph")
    successors: dict = {node: [] for node in graph.nodes}
    for edge in graph.edges:
        successors[edge.source].append(edge.target)
    groups = [sorted(node.package for node in component)
              for component in strongly_connected_components(sorted(graph.nodes), successors)
              if len(component) >= 2]
    return sorted(groups, key=lambda group: group[0])


def adp_violations(model: CodeModel) -> list[Finding]:
    return [_finding(RULE_ADP, ", ".join(group), {"members": group})
            for group in detect_cycles(package_graph(model))]


def sdp_violations(model: CodeModel, report: MetricsReport) -> list[Finding]:
    """SDP: a package must not depend on a strictly less stable package.

    Exact rational comparison; edges touching UNDEFINED instability are skipped.
    """
    findings = []
    for edge in package_graph(model).edges:
        source_i = report.per_package[edge.source.package].instability
        target_i = report.per_package[edge.target.package].instability
        if source_i is None or target_i is None:
            continue
        if target_i > source_i:
            findings.append(_finding(
                RULE_SDP, f"{edge.source.package}->{edge.target.package}",
                {"from_instability": source_i, "to_instability": target_i}))
    return findings


def sap_zones(report: MetricsReport, thresholds: Thresholds) -> list[Finding]:
    """SAP: flag packages far from the main sequence in either corner."""
    findings = []
    for name, pm in report.per_package.items():
        a, i, d = pm.abstractness, pm.instability, pm.distance
        if a is None or i is None or d is None:
            continue
        if d < thresholds.sap_distance_min:
            continue
        evidence = {"abstractness": a, "instability": i, "distance": d}
        if a <= thresholds.sap_extreme and i <= thresholds.sap_extreme:
            findings.append(_finding(RULE_SAP_PAIN, name, evidence))
        if a >= 1 - thresholds.sap_extreme and i >= 1 - thresholds.sap_extreme:
            findings.append(_finding(RULE_SAP_USELESS, name, evidence))
    return findings


def srp_advisories(model: CodeModel, report: MetricsReport, thresholds: Thresholds) -> list[Finding]:
    """SRP: low cohesion plus enough methods suggests more than one responsibility."""
    findings = []
    for name, cm in report.per_class.items():
        method_count = len(resolve(model, name).methods)
        if cm.lcom >= thresholds.srp_lcom_min and method_count >= thresholds.srp_method_min:
            findings.append(_finding(
                RULE_SRP, str(name), {"lcom": cm.lcom, "method_count": method_count}))
    return findings


def dip_advisories(model: CodeModel) -> list[Finding]:
    """DIP: an abstract class should not depend on a concrete one (non-inherit edges)."""
    findings = []
    for edge in class_graph(model).edges:
        if edge.kind == INHERIT:
            continue
        if resolve(model, edge.source).is_abstract and not resolve(model, edge.target).is_abstract:
            findings.append(_finding(
                RULE_DIP, f"{edge.source}->{edge.target}", {"kind": edge.kind}))
    return findings


def empty_package_warnings(model: CodeModel) -> list[Finding]:
    return [_finding(RULE_EMPTY_PACKAGE, pkg.name, {})
            for pkg in model.packages if not pkg.classes]


def run_all(model: CodeModel, report: MetricsReport,
            thresholds: Thresholds | None = None) -> list[Finding]:
    """Every check, merged and sorted by (rule, locus) for deterministic output."""
    thresholds = thresholds if thresholds is not None else Thresholds()
    findings = [
        *adp_violations(model),
        *sdp_violations(model, report),
        *sap_zones(report, thresholds),
        *srp_advisories(model, report, thresholds),
        *dip_advisories(model),
        *empty_package_warnings(model),
    ]
    findings.sort(key=lambda f: (f.rule, f.locus))
    return findings
