"""Meta-evaluation: PET and ROT runs, confidence intervals, certification."""

from xaistab.meta.harness import (
    PET_TOLERANCE,
    ROT_NOMINAL_EXPECTED,
    ROT_THRESHOLD,
    TestOutcome,
    path_changes,
    pet_passed,
    rot_inputs,
    rot_passed,
    run_pet,
    run_rot,
    tree_explainer,
)
from xaistab.meta.randomness import RANDOM_MODES, RandomExplainer, RandomPredictor
from xaistab.meta.stats import confidence_interval, z_value
from xaistab.meta.verdict import ROT_DETECTED, ROT_MISSED, Verdict, VerdictEntry, judge, render_markdown

__all__ = [
    "PET_TOLERANCE",
    "RANDOM_MODES",
    "ROT_DETECTED",
    "ROT_MISSED",
    "ROT_NOMINAL_EXPECTED",
    "ROT_THRESHOLD",
    "RandomExplainer",
    "RandomPredictor",
    "TestOutcome",
    "Verdict",
    "VerdictEntry",
    "confidence_interval",
    "judge",
    "path_changes",
    "pet_passed",
    "render_markdown",
    "rot_inputs",
    "rot_passed",
    "run_pet",
    "run_rot",
    "tree_explainer",
    "z_value",
]
