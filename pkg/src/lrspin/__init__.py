"""Long-range q-state spin models: contours, energy bounds, Peierls checks."""

__version__ = "0.1.0"
