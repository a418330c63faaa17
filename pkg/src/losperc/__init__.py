"""Line-of-sight percolation on planar street systems.

Simulation and analysis toolkit for a continuum percolation model living
on the edges of a Delaunay triangulation of a planar Poisson point
process: crossroads open independently, street users form a linear Cox
process along the edges, and devices connect along streets by
line-of-sight rules with exponential ranges.  The package provides exact
planar predicates, a deterministic Delaunay builder, the marked-process
samplers and connection graphs, cluster/crossing analyses, the
one-dimensional street-coverage calculus with its comparison inequalities,
and reproducible experiment drivers with a command-line interface.
"""

from .geometry import (
    AxisBox,
    Ball,
    DegenerateTriangle,
    Disk,
    HalfDiskStatus,
    Point2,
    circumdisk,
    empty_half_disk,
    in_disk,
)

__version__ = "0.1.0"

__all__ = [
    "AxisBox",
    "Ball",
    "DegenerateTriangle",
    "Disk",
    "HalfDiskStatus",
    "Point2",
    "circumdisk",
    "empty_half_disk",
    "in_disk",
    "__version__",
]
