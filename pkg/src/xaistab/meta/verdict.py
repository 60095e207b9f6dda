"""Certification verdicts and their markdown rendering."""

from __future__ import annotations

from dataclasses import dataclass, field

from xaistab.errors import DomainError
from xaistab.meta.harness import TestOutcome
from xaistab.metrics.sensitivity import METRICS

ROT_DETECTED = "unrobust detected"
ROT_MISSED = "robustness reported"


@dataclass
class VerdictEntry:
    metric: str
    mode: str
    pet: TestOutcome | None = None
    rot: TestOutcome | None = None

    @property
    def certified(self) -> bool:
        return self.pet is not None and self.rot is not None and self.pet.passed and self.rot.passed

    @property
    def replicates_reference(self) -> bool:
        """PET passed while ROT failed: the reference outcome for these metrics."""
        return self.pet is not None and self.rot is not None and self.pet.passed and not self.rot.passed

    def to_dict(self) -> dict:
        out = {"metric": self.metric, "metric_name": METRICS.get(self.metric, self.metric), "mode": self.mode}
        for name, o in (("PET", self.pet), ("ROT", self.rot)):
            if o is None:
                out[name] = None
                continue
            out[name] = {
                "passed": o.passed,
                "expected_value": o.expected_value,
                "mean": o.mean,
                "std": o.std,
                "ci": [o.ci_low, o.ci_high],
            }
            if name == "ROT":
                out[name]["outcome"] = ROT_DETECTED if o.passed else ROT_MISSED
        out["certified"] = self.certified
        return out


@dataclass
class Verdict:
    entries: list[VerdictEntry] = field(default_factory=list)

    @property
    def all_certified(self) -> bool:
        return bool(self.entries) and all(e.certified for e in self.entries)

    @property
    def replicates_reference(self) -> bool:
        return bool(self.entries) and all(e.replicates_reference for e in self.entries)

    def entry(self, metric: str, mode: str = "raw") -> VerdictEntry:
        for e in self.entries:
            if e.metric == metric and e.mode == mode:
                return e
        raise KeyError((metric, mode))

    def to_dict(self) -> dict:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "all_certified": self.all_certified,
            "replicates_reference": self.replicates_reference,
        }


def judge(outcomes) -> Verdict:
    """Group outcomes per (metric, mode); certified only if both PET and ROT pass."""
    outcomes = list(outcomes)
    if not outcomes:
        raise DomainError("judge needs at least one test outcome")
    entries: dict[tuple[str, str], VerdictEntry] = {}
    for o in outcomes:
        e = entries.setdefault((o.metric, o.mode), VerdictEntry(o.metric, o.mode))
        if o.test == "PET":
            e.pet = o
        elif o.test == "ROT":
            e.rot = o
        else:
            raise DomainError(f"unknown test {o.test!r}")
    return Verdict(list(entries.values()))


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def outcome_table(outcomes: list[dict], test: str) -> list[str]:
    rows = [o for o in outcomes if o["test"] == test]
    if not rows:
        return []
    lines = [
        "| Metric | Mode | Expected Value | Actual value | CI (alpha = {}) | Result |".format(rows[0]["config"].get("alpha", 0.05)),
        "|---|---|---|---|---|---|",
    ]
    for o in rows:
        if test == "ROT":
            result = ROT_DETECTED if o["passed"] else ROT_MISSED
            result += " (passed)" if o["passed"] else " (failed)"
        else:
            result = "passed" if o["passed"] else "failed"
        low, high = o["ci"]
        lines.append(
            f"| {o.get('metric_name', o['metric'])} | {o['mode']} | {o['expected_value']:.1f} "
            f"| {_fmt(o['mean'])} ± {_fmt(o['std'])} | ({_fmt(low)}, {_fmt(high)}) | {result} |"
        )
    return lines


def verdict_table(verdict: dict) -> list[str]:
    lines = ["| Metric | Mode | PET | ROT | Certified |", "|---|---|---|---|---|"]
    for e in verdict["entries"]:
        pet = "-" if e["PET"] is None else ("passed" if e["PET"]["passed"] else "failed")
        rot = "-" if e["ROT"] is None else ("passed" if e["ROT"]["passed"] else "failed")
        lines.append(f"| {e['metric_name']} | {e['mode']} | {pet} | {rot} | {'yes' if e['certified'] else 'no'} |")
    return lines


def render_markdown(doc: dict) -> str:
    """Markdown report from a verdict document (as written to verdict.json)."""
    out = ["# Robustness metric meta-evaluation", ""]
    perf = doc.get("performance")
    if perf:
        out += [
            "## Model performance (validation)",
            "",
            "| MAE | MSE | Nodes | Depth |",
            "|---|---|---|---|",
            f"| {_fmt(perf['mae'])} | {_fmt(perf['mse'])} | {perf.get('n_nodes', '-')} | {perf.get('depth', '-')} |",
            "",
        ]
    outcomes = doc.get("outcomes", [])
    for test, title in (("PET", "Perfect Explanation Test"), ("ROT", "Random Output Test")):
        table = outcome_table(outcomes, test)
        if table:
            out += [f"## {title}", ""] + table + [""]
    if "verdict" in doc:
        out += ["## Verdict", ""] + verdict_table(doc["verdict"]) + [""]
    for probe in doc.get("probes", []):
        out += [f"## Probe: {probe['name']}", "", probe.get("description", ""), ""]
        out += outcome_table(probe["outcomes"], "PET") + [""]
        out += outcome_table(probe["outcomes"], "ROT") + [""]
        out += verdict_table(probe["verdict"]) + [""]
    rep = doc.get("replication")
    if rep:
        status = "reproduced" if rep["reproduced"] else "not reproduced"
        out += [
            "## Replication",
            "",
            f"Reference outcome (PET passed, ROT failed, not certified): **{status}**.",
        ]
        if rep.get("configurations"):
            out.append("Reproducing configurations: " + ", ".join(rep["configurations"]) + ".")
        out.append("")
    return "\n".join(out).rstrip() + "\n"
