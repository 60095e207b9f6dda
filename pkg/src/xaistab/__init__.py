"""Meta-evaluation of explanation robustness metrics with ground-truth-controlled tests."""

__version__ = "0.1.0"
