"""Boundary-fitted tetrahedral meshes of the perforated unit cell and macro domain.

Construction is a structured grid of cubes, each split into five tetrahedra
with the split mirrored on neighbouring cubes (parity alternation) so the
global mesh is conforming.  For even resolutions the mesh is invariant under
the full cubic symmetry group about the domain center, which the effective
tensors inherit.  Tetrahedra fully inside the obstacle are removed and the
remaining interface vertices are projected radially onto the exact sphere.

Stored obstacle normals point out of the obstacle into the fluid (radially
away from the sphere center); the surface terms in the weak forms are written
for this convention and it is pinned by the integration-by-parts oracle in
``femcore``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    MeshConstructionError,
    NonIntegerTiling,
    ObstacleTouchesBoundary,
    ResolutionTooCoarse,
)

_GEOM_TOL = 1e-12

# Cube corner c = (i, j, k) has local index i + 2j + 4k.  The two mirrored
# five-tet splits share face diagonals with their parity-opposite neighbours.
_SPLIT_EVEN = ((0, 3, 5, 6), (1, 0, 3, 5), (2, 0, 3, 6), (4, 0, 5, 6), (7, 3, 5, 6))
_SPLIT_ODD = ((1, 2, 4, 7), (0, 1, 2, 4), (3, 1, 2, 7), (5, 1, 4, 7), (6, 2, 4, 7))
_CORNER_OFFSETS = np.array(
    [[i, j, k] for k in (0, 1) for j in (0, 1) for i in (0, 1)], dtype=np.int64
)

_TET_FACES = ((1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1))  # opposite vertex 0..3

_EDGE_LOCAL = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class ObstacleSpec:
    """A spherical obstacle strictly inside the unit cell."""

    shape: str = "sphere"
    center: tuple = (0.5, 0.5, 0.5)
    radius: float = 0.25

    def __post_init__(self):
        if self.shape != "sphere":
            raise ValueError(f"unsupported obstacle shape {self.shape!r}")
        if not self.radius > 0:
            raise ValueError("obstacle radius must be positive")
        c = np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", tuple(float(x) for x in c))
        if np.any(c - self.radius <= 0) or np.any(c + self.radius >= 1):
            raise ObstacleTouchesBoundary(
                f"sphere(center={self.center}, r={self.radius}) is not strictly inside the unit cell"
            )


def _orient_tets(vertices, tets):
    """Swap two vertices wherever the signed volume is negative."""
    v = vertices[tets]
    vol = np.einsum(
        "ij,ij->i",
        np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]),
        v[:, 3] - v[:, 0],
    )
    flip = vol < 0
    tets[flip, 2], tets[flip, 3] = tets[flip, 3], tets[flip, 2].copy()
    return tets


def tet_volumes(vertices, tets):
    v = vertices[tets]
    return (
        np.einsum(
            "ij,ij->i",
            np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]),
            v[:, 3] - v[:, 0],
        )
        / 6.0
    )


class _P2Data:
    """P2 node bookkeeping shared by all spaces on one mesh."""

    def __init__(self, mesh):
        tets = mesh.tets
        edges = np.sort(
            tets[:, _EDGE_LOCAL].reshape(-1, 2), axis=1
        )  # (nt*6, 2) sorted pairs
        uniq, inverse = np.unique(edges, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        nv = len(mesh.vertices)
        self.n_vertices = nv
        self.edges = uniq.astype(np.int64)
        self.n_nodes = nv + len(uniq)
        # tet -> 10 node ids: 4 vertices then 6 edge midpoints
        self.tet_nodes = np.concatenate(
            [tets, nv + inverse.reshape(len(tets), 6)], axis=1
        ).astype(np.int64)
        self.coords = np.concatenate(
            [mesh.vertices, 0.5 * (mesh.vertices[uniq[:, 0]] + mesh.vertices[uniq[:, 1]])]
        )
        # integer half-lattice keys for unsnapped nodes; -2**62 marks non-lattice
        vk = mesh.vertex_lattice
        vkey = np.where(vk[:, :1] >= 0, 2 * vk, np.int64(-(2**62)))
        e0, e1 = vkey[uniq[:, 0]], vkey[uniq[:, 1]]
        ekey = np.where((e0[:, :1] >= 0) & (e1[:, :1] >= 0), (e0 + e1) // 2, np.int64(-(2**62)))
        self.half_key = np.concatenate([vkey, ekey])
        # edge id lookup for face node lists
        self._edge_index = {(int(a), int(b)): i for i, (a, b) in enumerate(uniq)}

    def face_nodes(self, faces):
        """(nf, 6) node ids [v0, v1, v2, m01, m02, m12] for vertex-triple faces."""
        nv = self.n_vertices
        out = np.empty((len(faces), 6), dtype=np.int64)
        for i, f in enumerate(faces):
            a, b, c = int(f[0]), int(f[1]), int(f[2])
            out[i, :3] = (a, b, c)
            out[i, 3] = nv + self._edge_index[tuple(sorted((a, b)))]
            out[i, 4] = nv + self._edge_index[tuple(sorted((a, c)))]
            out[i, 5] = nv + self._edge_index[tuple(sorted((b, c)))]
        return out


class CellMesh:
    """Tetrahedral mesh of the perforated unit cell Y* (or the full cube)."""

    def __init__(self, resolution, obstacle=None):
        if resolution < 4:
            raise ResolutionTooCoarse("resolution must be at least 4")
        if resolution % 2 != 0:
            raise ValueError(
                "resolution must be even: the mirrored five-tet split needs matching "
                "face diagonals across periodic boundaries"
            )
        self.resolution = int(resolution)
        self.obstacle = obstacle
        self._build()

    # -- construction -----------------------------------------------------

    def _build(self):
        n = self.resolution
        h = 1.0 / n
        obstacle = self.obstacle
        if obstacle is not None:
            c = np.asarray(obstacle.center)
            r = obstacle.radius
            lo = c.min() - r
            hi = c.max() + r
            if lo < h - _GEOM_TOL or hi > 1.0 - h + _GEOM_TOL:
                raise ResolutionTooCoarse(
                    f"obstacle within one cell layer of the boundary at resolution {n}"
                )

        idx = np.arange(n + 1, dtype=np.int64)
        I, J, K = np.meshgrid(idx, idx, idx, indexing="ij")
        lattice = np.stack([I.ravel(), J.ravel(), K.ravel()], axis=1)
        verts = lattice / float(n)

        def vid(ijk):
            return (ijk[..., 0] * (n + 1) + ijk[..., 1]) * (n + 1) + ijk[..., 2]

        ci = np.arange(n, dtype=np.int64)
        CI, CJ, CK = np.meshgrid(ci, ci, ci, indexing="ij")
        cubes = np.stack([CI.ravel(), CJ.ravel(), CK.ravel()], axis=1)
        corner_ids = vid(cubes[:, None, :] + _CORNER_OFFSETS[None, :, :])  # (nc, 8)
        parity = (cubes.sum(axis=1) % 2).astype(bool)

        tets = np.empty((len(cubes), 5, 4), dtype=np.int64)
        tets[~parity] = corner_ids[~parity][:, np.asarray(_SPLIT_EVEN)]
        tets[parity] = corner_ids[parity][:, np.asarray(_SPLIT_ODD)]
        tets = tets.reshape(-1, 4)

        snapped = np.zeros(len(verts), dtype=bool)
        if obstacle is not None:
            def project(mask):
                rad = verts[mask] - c
                dist = np.linalg.norm(rad, axis=1)
                if np.any(dist < 0.25 * h):
                    raise ResolutionTooCoarse(
                        f"obstacle radius {r} too close to mesh size at resolution {n}"
                    )
                verts[mask] = c + r * rad / dist[:, None]
                snapped[mask] = True

            # two-sided snap band: vertices near the sphere move onto it, which
            # keeps later interface snaps shallow and edge lengths bounded
            d = np.linalg.norm(verts - c, axis=1) - r
            band = np.abs(d) < 0.45 * h
            if np.any(band):
                project(band)
                d[band] = 0.0
            on = np.abs(d) <= _GEOM_TOL
            inside = d < -_GEOM_TOL
            keep = ~np.all((inside | on)[tets], axis=1)
            tets = tets[keep]
            to_snap = np.zeros(len(verts), dtype=bool)
            to_snap[tets.ravel()] = True
            to_snap &= inside
            if np.any(to_snap):
                project(to_snap)
            on_sphere = on | snapped
            # merge snapped vertices that landed on the same sphere point
            # (edge contraction of degenerate chordal slivers)
            remap = np.arange(len(verts), dtype=np.int64)
            sids = np.nonzero(on_sphere)[0]
            buckets = {}
            for v in sids:
                key = tuple(np.round(verts[v], 9))
                first = buckets.setdefault(key, v)
                remap[v] = first
            tets = remap[tets]
            tets = tets[np.array([len(set(t)) == 4 for t in tets.tolist()])]
        else:
            on_sphere = np.zeros(len(verts), dtype=bool)

        used = np.zeros(len(verts), dtype=bool)
        used[tets.ravel()] = True
        renum = -np.ones(len(verts), dtype=np.int64)
        renum[used] = np.arange(used.sum())
        self.vertices = np.ascontiguousarray(verts[used])
        self.tets = _orient_tets(self.vertices, renum[tets])
        self.on_sphere = on_sphere[used]
        self.vertex_lattice = np.where(
            snapped[used, None], np.int64(-1), lattice[used]
        )

        vols = tet_volumes(self.vertices, self.tets)
        tiny = vols < 1e-12 * h**3
        if np.any(tiny):
            self.tets = self.tets[~tiny]
            vols = vols[~tiny]
        self._classify_boundary()
        if obstacle is not None and len(self.obstacle_faces):
            self._relax_surface()
            self._classify_boundary()

        vols = tet_volumes(self.vertices, self.tets)
        if np.any(vols <= 0):
            raise MeshConstructionError("non-positive tet volume after snapping")
        self._volumes = vols
        self.fluid_volume = float(vols.sum())

    def _relax_surface(self):
        """Tangential relaxation of on-sphere vertices.

        The raw radial snap can leave skewed chordal triangles whose normals
        tilt well away from the radial direction.  Averaging each surface
        vertex over its surface neighbours and reprojecting onto the sphere
        keeps the interface exactly on the sphere while equalising the
        triangles.  Relaxed lattice vertices lose their lattice key (they are
        interior to the cell, so stitching and periodicity are unaffected).
        """
        c = np.asarray(self.obstacle.center)
        r = self.obstacle.radius
        faces = self.obstacle_faces
        surf = np.unique(faces.ravel())
        edges = np.unique(
            np.sort(faces[:, ((0, 1), (0, 2), (1, 2))].reshape(-1, 2), axis=1), axis=0
        )
        verts = self.vertices
        for _ in range(10):
            acc = np.zeros_like(verts)
            cnt = np.zeros(len(verts))
            np.add.at(acc, edges[:, 0], verts[edges[:, 1]])
            np.add.at(acc, edges[:, 1], verts[edges[:, 0]])
            np.add.at(cnt, edges[:, 0], 1.0)
            np.add.at(cnt, edges[:, 1], 1.0)
            avg = acc[surf] / cnt[surf, None]
            rad = avg - c
            target = c + r * rad / np.linalg.norm(rad, axis=1)[:, None]
            omega = 0.6
            for _try in range(4):
                trial = verts.copy()
                trial[surf] = verts[surf] + omega * (target - verts[surf])
                rad = trial[surf] - c
                trial[surf] = c + r * rad / np.linalg.norm(rad, axis=1)[:, None]
                if tet_volumes(trial, self.tets).min() > 0:
                    verts = trial
                    break
                omega *= 0.5
        self.vertices = np.ascontiguousarray(verts)
        moved = np.zeros(len(verts), dtype=bool)
        moved[surf] = True
        self.on_sphere |= moved
        self.vertex_lattice = np.where(
            moved[:, None], np.int64(-1), self.vertex_lattice
        )

    def _classify_boundary(self):
        n = self.resolution
        tets = self.tets
        faces = tets[:, _TET_FACES].reshape(-1, 3)  # oriented outward per tet
        key = np.sort(faces, axis=1)
        order = np.lexsort((key[:, 2], key[:, 1], key[:, 0]))
        sk = key[order]
        new = np.ones(len(sk), dtype=bool)
        new[1:] = np.any(sk[1:] != sk[:-1], axis=1)
        grp = np.cumsum(new) - 1
        counts = np.bincount(grp)
        boundary_rows = order[new.nonzero()[0][counts == 1]]
        bfaces = faces[boundary_rows]  # oriented: outward of owning tet

        lat = self.vertex_lattice[bfaces]  # (nf, 3, 3)
        tags = {}
        is_lattice = np.all(lat[:, :, 0] >= 0, axis=1)
        obstacle_mask = np.ones(len(bfaces), dtype=bool)
        for axis in range(3):
            for side, val in (("-", 0), ("+", n)):
                m = is_lattice & np.all(lat[:, :, axis] == val, axis=1)
                tags["xyz"[axis] + side] = bfaces[m]
                obstacle_mask &= ~m
        self.periodic_faces = tags
        obf = bfaces[obstacle_mask]
        v = self.vertices
        cross = np.cross(v[obf[:, 1]] - v[obf[:, 0]], v[obf[:, 2]] - v[obf[:, 0]])
        area2 = np.linalg.norm(cross, axis=1)
        # outward of the owning tet points into the obstacle; store the opposite
        normals = -cross / area2[:, None]
        self.obstacle_faces = obf
        self.obstacle_normals = normals
        self.obstacle_areas = 0.5 * area2

    # -- derived data -------------------------------------------------------

    @cached_property
    def p2(self):
        return _P2Data(self)

    @cached_property
    def obstacle_face_p2nodes(self):
        return self.p2.face_nodes(self.obstacle_faces)

    def obstacle_p2_nodes(self):
        """Unique P2 node ids lying on the discrete obstacle surface."""
        if len(self.obstacle_faces) == 0:
            return np.empty(0, dtype=np.int64)
        return np.unique(self.obstacle_face_p2nodes.ravel())

    def sphere_normal_at(self, points):
        c = np.asarray(self.obstacle.center)
        rad = np.asarray(points) - c
        return rad / np.linalg.norm(rad, axis=-1, keepdims=True)

    def periodic_partner_map(self):
        """Involution pairing each boundary face with its translated partner."""
        n = self.resolution
        pairs = {}
        for axis in range(3):
            minus = self.periodic_faces["xyz"[axis] + "-"]
            plus = self.periodic_faces["xyz"[axis] + "+"]
            lat_p = self.vertex_lattice[plus].copy()
            lat_p[:, :, axis] = 0
            lookup = {}
            for f, kf in zip(plus, lat_p):
                lookup[tuple(sorted(map(tuple, kf)))] = tuple(sorted(f.tolist()))
            for f in minus:
                kf = self.vertex_lattice[f]
                partner = lookup[tuple(sorted(map(tuple, kf)))]
                me = tuple(sorted(f.tolist()))
                pairs[me] = partner
                pairs[partner] = me
        return pairs

    def h_max(self):
        v = self.vertices[self.tets]
        emax = 0.0
        for a, b in _EDGE_LOCAL:
            emax = max(emax, float(np.linalg.norm(v[:, a] - v[:, b], axis=1).max()))
        return emax

    def contains_obstacle(self):
        return self.obstacle is not None and len(self.obstacle_faces) > 0

    def locate(self, points):
        """Locate points in an unperforated structured mesh.

        Returns (tet_ids, barycentric (npts, 4)).  Only valid when the mesh
        was built without an obstacle (used by the macroscopic Darcy field
        evaluation).
        """
        if self.obstacle is not None:
            raise ValueError("point location implemented for unperforated meshes only")
        n = self.resolution
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cube = np.clip((pts * n).astype(np.int64), 0, n - 1)
        cube_id = (cube[:, 0] * n + cube[:, 1]) * n + cube[:, 2]
        out_t = np.empty(len(pts), dtype=np.int64)
        out_b = np.empty((len(pts), 4))
        for p in range(len(pts)):
            best, best_b, best_m = -1, None, -np.inf
            for t in range(cube_id[p] * 5, cube_id[p] * 5 + 5):
                tv = self.vertices[self.tets[t]]
                T = (tv[1:] - tv[0]).T
                lam = np.linalg.solve(T, pts[p] - tv[0])
                b = np.concatenate([[1.0 - lam.sum()], lam])
                m = b.min()
                if m > best_m:
                    best, best_b, best_m = t, b, m
            if best_m < -1e-10:
                raise MeshConstructionError("point location failed")
            out_t[p] = best
            out_b[p] = best_b
        return out_t, out_b


class MacroMesh:
    """(1/epsilon)^3 scaled copies of a unit-cell mesh stitched conformingly."""

    def __init__(self, epsilon, per_cell_resolution, obstacle):
        m = 1.0 / epsilon
        if abs(m - round(m)) > 1e-9 or round(m) < 1:
            raise NonIntegerTiling(f"1/epsilon = {m} is not a positive integer")
        self.epsilon = float(epsilon)
        self.m = int(round(m))
        self.ref_cell = CellMesh(per_cell_resolution, obstacle)
        self._build()

    def _build(self):
        m, eps = self.m, self.epsilon
        ref = self.ref_cell
        n = ref.resolution
        nv_ref = len(ref.vertices)
        lat = ref.vertex_lattice
        is_lattice = lat[:, 0] >= 0

        cells = np.array(
            [(i, j, k) for i in range(m) for j in range(m) for k in range(m)],
            dtype=np.int64,
        )
        self.cells = cells

        # global integer keys (pitch 1/(m n)) dedupe shared lattice vertices
        key_map = {}
        vert_list = []
        lattice_list = []
        on_sphere_list = []
        cell_vertex_maps = np.empty((len(cells), nv_ref), dtype=np.int64)
        for ci, k in enumerate(cells):
            gk = lat + k * n  # (nv_ref, 3), valid where is_lattice
            ids = np.empty(nv_ref, dtype=np.int64)
            for v in range(nv_ref):
                if is_lattice[v]:
                    tkey = (int(gk[v, 0]), int(gk[v, 1]), int(gk[v, 2]))
                    gid = key_map.get(tkey)
                    if gid is None:
                        gid = len(vert_list)
                        key_map[tkey] = gid
                        vert_list.append(gk[v] / float(m * n))
                        lattice_list.append(gk[v])
                        on_sphere_list.append(bool(ref.on_sphere[v]))
                else:
                    gid = len(vert_list)
                    vert_list.append(eps * (k + ref.vertices[v]))
                    lattice_list.append((-1, -1, -1))
                    on_sphere_list.append(bool(ref.on_sphere[v]))
                ids[v] = gid
            cell_vertex_maps[ci] = ids
        self.vertices = np.asarray(vert_list)
        self.vertex_lattice = np.asarray(lattice_list, dtype=np.int64)
        self.on_sphere = np.asarray(on_sphere_list, dtype=bool)
        self.cell_vertex_maps = cell_vertex_maps

        nt_ref = len(ref.tets)
        tets = np.empty((len(cells), nt_ref, 4), dtype=np.int64)
        for ci in range(len(cells)):
            tets[ci] = cell_vertex_maps[ci][ref.tets]
        self.tets = tets.reshape(-1, 4)
        self.tet_cell = np.repeat(np.arange(len(cells)), nt_ref)
        self.n_ref_tets = nt_ref
        self._volumes = np.tile(ref._volumes * eps**3, len(cells))
        self.fluid_volume = float(self._volumes.sum())

        # obstacle faces: tile the reference faces; normals are scale invariant
        if ref.obstacle is not None:
            nf = len(ref.obstacle_faces)
            obf = np.empty((len(cells), nf, 3), dtype=np.int64)
            for ci in range(len(cells)):
                obf[ci] = cell_vertex_maps[ci][ref.obstacle_faces]
            self.obstacle_faces = obf.reshape(-1, 3)
            self.obstacle_normals = np.tile(ref.obstacle_normals, (len(cells), 1))
            self.obstacle_areas = np.tile(ref.obstacle_areas * eps**2, len(cells))
        else:
            self.obstacle_faces = np.empty((0, 3), dtype=np.int64)
            self.obstacle_normals = np.empty((0, 3))
            self.obstacle_areas = np.empty(0)

        mn = self.m * n
        lk = self.vertex_lattice
        onb = (lk[:, 0] >= 0) & np.any((lk == 0) | (lk == mn), axis=1)
        self.exterior_vertex = onb

    @property
    def obstacle(self):
        return self.ref_cell.obstacle

    @property
    def resolution(self):
        return self.ref_cell.resolution

    @cached_property
    def p2(self):
        return _P2Data(self)

    @cached_property
    def obstacle_face_p2nodes(self):
        return self.p2.face_nodes(self.obstacle_faces)

    def obstacle_p2_nodes(self):
        if len(self.obstacle_faces) == 0:
            return np.empty(0, dtype=np.int64)
        return np.unique(self.obstacle_face_p2nodes.ravel())

    def sphere_normal_at(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cell = np.clip((pts / self.epsilon).astype(np.int64), 0, self.m - 1)
        centers = self.epsilon * (cell + np.asarray(self.obstacle.center))
        rad = pts - centers
        return rad / np.linalg.norm(rad, axis=-1, keepdims=True)

    @cached_property
    def exterior_p2_nodes(self):
        """P2 node ids on the exterior boundary of the unit cube."""
        key = self.p2.half_key
        mn2 = 2 * self.m * self.ref_cell.resolution
        valid = key[:, 0] >= 0
        onb = valid & np.any((key == 0) | (key == mn2), axis=1)
        return np.nonzero(onb)[0]

    @cached_property
    def exterior_faces(self):
        tets = self.tets
        faces = tets[:, _TET_FACES].reshape(-1, 3)
        skey = np.sort(faces, axis=1)
        order = np.lexsort((skey[:, 2], skey[:, 1], skey[:, 0]))
        sk = skey[order]
        new = np.ones(len(sk), dtype=bool)
        new[1:] = np.any(sk[1:] != sk[:-1], axis=1)
        grp = np.cumsum(new) - 1
        counts = np.bincount(grp)
        brows = order[new.nonzero()[0][counts == 1]]
        bfaces = faces[brows]
        lk = self.vertex_lattice[bfaces]
        mn = self.m * self.ref_cell.resolution
        is_lat = np.all(lk[:, :, 0] >= 0, axis=1)
        ext = np.zeros(len(bfaces), dtype=bool)
        for axis in range(3):
            for val in (0, mn):
                ext |= is_lat & np.all(lk[:, :, axis] == val, axis=1)
        return bfaces[ext]


def build_unit_cell_mesh(resolution, obstacle):
    """Mesh of Y* = unit cell minus the closed obstacle."""
    return CellMesh(resolution, obstacle)


def build_macro_mesh(epsilon, per_cell_resolution, obstacle):
    """Mesh of the perforated unit cube with (1/epsilon)^3 scaled cells."""
    return MacroMesh(epsilon, per_cell_resolution, obstacle)


def fluid_volume(mesh):
    """Total volume of the fluid region (sum of signed tet volumes)."""
    return mesh.fluid_volume


def write_vtk(path, mesh, point_data=None, cell_data=None, title="microdarcy mesh"):
    """Legacy ASCII VTK export (UNSTRUCTURED_GRID, float64 points, cell type 10)."""
    v = mesh.vertices
    t = mesh.tets
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {len(v)} double",
    ]
    lines += [" ".join(format(x, ".17g") for x in p) for p in v]
    lines.append(f"CELLS {len(t)} {5 * len(t)}")
    lines += ["4 " + " ".join(str(i) for i in row) for row in t]
    lines.append(f"CELL_TYPES {len(t)}")
    lines += ["10"] * len(t)

    def emit(kind, data):
        out = [f"{kind} {len(next(iter(data.values())))}"]
        for name, arr in data.items():
            arr = np.asarray(arr)
            if arr.ndim == 1:
                out.append(f"SCALARS {name} double 1")
                out.append("LOOKUP_TABLE default")
                out += [format(x, ".17g") for x in arr]
            else:
                out.append(f"VECTORS {name} double")
                out += [" ".join(format(x, ".17g") for x in row) for row in arr]
        return out

    if point_data:
        lines += emit("POINT_DATA", point_data)
    if cell_data:
        lines += emit("CELL_DATA", cell_data)
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
