"""A small executable kernel for a predicative calculus of cumulative inductive constructions."""

import sys

# terms are traversed recursively; deep spines need more than the default
sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

__version__ = "0.1.0"
