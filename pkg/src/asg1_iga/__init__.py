"""asg1-iga - C1 isogeometric spaces on analysis-suitable G1 two-patch geometries."""

__version__ = "0.1.0"
