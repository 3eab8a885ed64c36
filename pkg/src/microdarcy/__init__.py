"""Numerical homogenization of micropolar flow past periodic obstacle arrays.

Library layout:

* ``mesh``     perforated cell / macro meshes (structured, boundary-fitted)
* ``femcore``  constrained Taylor-Hood spaces, assembly, saddle solvers
* ``cell``     local problems on the unit cell and effective tensors
* ``analysis`` functional-constant estimation and the well-posedness gate
* ``darcy``    macroscopic pressure problem and limit-field reconstruction
* ``epsweep``  eps-resolved solves, cell averaging and unfolding diagnostics
* ``cli``      configuration-driven pipeline driver
"""

from .mesh import (
    CellMesh,
    MacroMesh,
    ObstacleSpec,
    build_macro_mesh,
    build_unit_cell_mesh,
    fluid_volume,
    write_vtk,
)

__version__ = "0.1.0"
