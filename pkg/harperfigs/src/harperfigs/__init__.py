"""Figure rendering for harperdrift data exports.

Reads the CSV/JSON files the harperdrift CLI writes and turns them into
raster figures.  Strictly read-only on its inputs: all physics lives
upstream, this package only draws.
"""

__version__ = "0.1.0"
