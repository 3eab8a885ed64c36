"""Constrained finite-element spaces on cell and macro meshes.

Constraints are realized through a sparse prolongation matrix ``P`` mapping
reduced (free) coefficients to the full nodal coefficient vector:

* ``periodic``            -- nodes identified across opposite cell faces,
* ``zero_exterior_trace`` -- all components eliminated on the outer boundary,
* ``zero_normal_on_obstacle`` -- nodal frame rotated to (n, t1, t2) with the
  exact sphere normal n at the node and the normal component eliminated,
* ``zero_mean``           -- not a dof elimination; flags one scalar Lagrange
  multiplier row added at the system level.

Assembled operators are reduced as ``P_test^T K P_trial``.
"""

import numpy as np
import scipy.sparse as sp

from ..errors import IncompatibleConstraints
from ..mesh import CellMesh, MacroMesh

VALID_CONSTRAINTS = {"periodic", "zero_exterior_trace", "zero_normal_on_obstacle", "zero_mean"}

_FAMILIES = {
    "vectorP2": (2, 3),
    "vectorP1": (1, 3),
    "scalarP1": (1, 1),
    "scalarP2": (2, 1),  # used only as an unstable-pair negative control
}


def tangent_frame(normals):
    """Deterministic orthonormal tangent pairs (t1, t2) for unit normals."""
    n = np.atleast_2d(normals)
    a = np.zeros_like(n)
    a[np.arange(len(n)), np.argmin(np.abs(n), axis=1)] = 1.0
    t1 = np.cross(n, a)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(n, t1)
    return t1, t2


class Space:
    """Nodal space of one family on a mesh with the constraints applied."""

    def __init__(self, mesh, family, constraints=()):
        constraints = frozenset(constraints)
        unknown = constraints - VALID_CONSTRAINTS
        if unknown:
            raise ValueError(f"unknown constraints {sorted(unknown)}")
        if family not in _FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        order, ncomp = _FAMILIES[family]
        is_cell = isinstance(mesh, CellMesh)
        is_macro = isinstance(mesh, MacroMesh)
        if "periodic" in constraints and not is_cell:
            raise IncompatibleConstraints("periodic constraints require a CellMesh")
        if "zero_exterior_trace" in constraints and not is_macro:
            raise IncompatibleConstraints("zero_exterior_trace requires a MacroMesh")
        if "zero_normal_on_obstacle" in constraints and ncomp != 3:
            raise IncompatibleConstraints("zero_normal_on_obstacle needs a vector space")
        if "zero_normal_on_obstacle" in constraints and (
            mesh.obstacle is None or len(mesh.obstacle_faces) == 0
        ):
            raise IncompatibleConstraints("mesh has no obstacle surface")
        if "zero_mean" in constraints and ncomp != 1:
            raise IncompatibleConstraints("zero_mean applies to scalar spaces")

        self.mesh = mesh
        self.family = family
        self.constraints = constraints
        self.order = order
        self.ncomp = ncomp

        if order == 2:
            p2 = mesh.p2
            self.node_coords = p2.coords
            self.n_nodes = p2.n_nodes
            self.element_nodes = p2.tet_nodes
            half_key = p2.half_key
        else:
            self.node_coords = mesh.vertices
            self.n_nodes = len(mesh.vertices)
            self.element_nodes = mesh.tets
            lk = mesh.vertex_lattice
            half_key = np.where(lk[:, :1] >= 0, 2 * lk, np.int64(-(2**62)))
        self._half_key = half_key

        en = self.element_nodes
        if ncomp == 1:
            self.element_dofs = en
        else:
            self.element_dofs = (3 * en[:, :, None] + np.arange(3)[None, None, :]).reshape(
                len(en), -1
            )
        self.ndof_full = ncomp * self.n_nodes
        self.n_multipliers = 1 if "zero_mean" in constraints else 0
        self._build_prolongation()

    # -- constraint assembly ------------------------------------------------

    def _node_rep(self):
        """Representative node per identification class (periodic), else identity."""
        rep = np.arange(self.n_nodes, dtype=np.int64)
        if "periodic" not in self.constraints:
            return rep
        two_n = 2 * self.mesh.resolution
        key = self._half_key
        valid = key[:, 0] >= 0
        canon = np.mod(key[valid], two_n)
        seen = {}
        nodes = np.nonzero(valid)[0]
        for node, ck in zip(nodes, map(tuple, canon)):
            r = seen.setdefault(ck, node)
            rep[node] = r
        return rep

    def _exterior_nodes(self):
        if "zero_exterior_trace" not in self.constraints:
            return np.empty(0, dtype=np.int64)
        if self.order == 2:
            return self.mesh.exterior_p2_nodes
        mn = self.mesh.m * self.mesh.ref_cell.resolution
        lk = self.mesh.vertex_lattice
        onb = (lk[:, 0] >= 0) & np.any((lk == 0) | (lk == mn), axis=1)
        return np.nonzero(onb)[0]

    def _build_prolongation(self):
        rep = self._node_rep()
        dropped = np.zeros(self.n_nodes, dtype=bool)
        dropped[self._exterior_nodes()] = True

        self.obstacle_nodes = np.empty(0, dtype=np.int64)
        self.obstacle_normals = np.empty((0, 3))
        frames = {}
        if "zero_normal_on_obstacle" in self.constraints:
            if self.order == 2:
                nodes = self.mesh.obstacle_p2_nodes()
            else:
                nodes = np.unique(self.mesh.obstacle_faces.ravel())
            normals = self.mesh.sphere_normal_at(self.node_coords[nodes])
            t1, t2 = tangent_frame(normals)
            self.obstacle_nodes = nodes
            self.obstacle_normals = normals
            for i, node in enumerate(nodes):
                frames[int(node)] = (t1[i], t2[i])

        ncomp = self.ncomp
        rows, cols, vals = [], [], []
        col_of_rep = {}
        next_col = 0
        own = np.nonzero(rep == np.arange(self.n_nodes))[0]
        for node in own:
            if dropped[node]:
                continue
            node = int(node)
            if node in frames:
                t1, t2 = frames[node]
                for c in range(3):
                    rows += [3 * node + c, 3 * node + c]
                    cols += [next_col, next_col + 1]
                    vals += [t1[c], t2[c]]
                col_of_rep[node] = next_col
                next_col += 2
            else:
                for c in range(ncomp):
                    rows.append(ncomp * node + c)
                    cols.append(next_col + c)
                    vals.append(1.0)
                col_of_rep[node] = next_col
                next_col += ncomp
        # identified (non-representative) nodes share the representative columns
        slaves = np.nonzero(rep != np.arange(self.n_nodes))[0]
        for node in slaves:
            r = int(rep[node])
            if dropped[r] or r not in col_of_rep:
                continue
            base = col_of_rep[r]
            for c in range(ncomp):
                rows.append(ncomp * int(node) + c)
                cols.append(base + c)
                vals.append(1.0)
        self.P = sp.csr_matrix(
            (vals, (rows, cols)), shape=(self.ndof_full, next_col)
        )
        self.n_dofs = next_col

    # -- field helpers --------------------------------------------------------

    def expand(self, reduced):
        """Full nodal coefficient vector from reduced coefficients."""
        return self.P @ np.asarray(reduced)

    def reduce_transpose(self, full):
        return self.P.T @ np.asarray(full)

    def field(self, reduced):
        return Field(self, np.asarray(reduced, dtype=float))

    def random_field(self, rng):
        return self.field(rng.standard_normal(self.n_dofs))


class Field:
    """A discrete field: a space plus reduced coefficients."""

    def __init__(self, space, coeffs):
        if len(coeffs) != space.n_dofs:
            raise ValueError("coefficient length does not match space")
        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=float)
        self._full = None

    @property
    def full(self):
        if self._full is None:
            self._full = self.space.expand(self.coeffs)
        return self._full

    @property
    def nodal(self):
        return self.full.reshape(self.space.n_nodes, self.space.ncomp)

    def normal_trace_at_obstacle_nodes(self):
        sp_ = self.space
        if len(sp_.obstacle_nodes) == 0:
            return np.empty(0)
        vals = self.nodal[sp_.obstacle_nodes]
        return np.einsum("ij,ij->i", vals, sp_.obstacle_normals)


def build_space(mesh, family, constraints=()):
    """Spec entry point; see :class:`Space`."""
    return Space(mesh, family, constraints)
