"""Assembly kernels for the rot-rot/div-div mixed systems.

Form kinds (trial u / test v, vector P2 unless noted):

* ``rot_rot``       int rot(u) . rot(v)
* ``div_div``       int div(u) div(v)
* ``mass``          int u . v
* ``rot_coupling``  int rot(v) . u          (rot acts on the *test* field)
* ``surface_cross`` int_{dF} (u x n) . v    (stored face normals, flat faces)
* ``pressure_div``  int p div(v)            (trial scalar P1, test vector)

All volume quadrature is exact for the P2 x P2 products that occur; surface
quadrature is exact for degree 4 on the flat boundary triangles.
"""

import numpy as np
import scipy.sparse as sp

from ..errors import MeshMismatch, ZeroDenominator
from ..quadrature import tet_rule, tri_rule

_CHUNK = 8000

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS3[_i, _j, _k] = 1.0
    _EPS3[_i, _k, _j] = -1.0

_FORM_DEGREE = {
    "rot_rot": 2,
    "div_div": 2,
    "mass": 4,
    "rot_coupling": 3,
    "pressure_div": 2,
}


# -- reference shape tables -------------------------------------------------

def _p2_shapes(pts):
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    lam = np.stack([1.0 - x - y - z, x, y, z])  # (4, nq)
    glam = np.array(
        [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    )
    N = np.empty((10, len(x)))
    G = np.empty((10, len(x), 3))
    for i in range(4):
        N[i] = lam[i] * (2.0 * lam[i] - 1.0)
        G[i] = (4.0 * lam[i] - 1.0)[:, None] * glam[i]
    from ..mesh import _EDGE_LOCAL

    for e, (i, j) in enumerate(_EDGE_LOCAL):
        N[4 + e] = 4.0 * lam[i] * lam[j]
        G[4 + e] = 4.0 * (lam[j][:, None] * glam[i] + lam[i][:, None] * glam[j])
    return N, G


def _p1_shapes(pts):
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    N = np.stack([1.0 - x - y - z, x, y, z])
    G = np.array(
        [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    )[:, None, :].repeat(len(x), axis=1)
    return N, G


def _shapes(order, pts):
    return _p2_shapes(pts) if order == 2 else _p1_shapes(pts)


def _tri_p2_shapes(pts):
    s, t = pts[:, 0], pts[:, 1]
    mu = np.stack([1.0 - s - t, s, t])
    N = np.empty((6, len(s)))
    for i in range(3):
        N[i] = mu[i] * (2.0 * mu[i] - 1.0)
    for e, (i, j) in enumerate(((0, 1), (0, 2), (1, 2))):
        N[3 + e] = 4.0 * mu[i] * mu[j]
    return N


def _geometry(mesh):
    cache = getattr(mesh, "_geom_cache", None)
    if cache is None:
        v = mesh.vertices[mesh.tets]
        J = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0], v[:, 3] - v[:, 0]], axis=2)
        detJ = np.linalg.det(J)
        invJT = np.linalg.inv(J).transpose(0, 2, 1)
        cache = {"detJ": detJ, "invJT": invJT, "v0": v[:, 0]}
        mesh._geom_cache = cache
    return cache


def _phys_grads(invJT, Gref):
    # (t,3,3) x (a,q,3) -> (t,a,q,3)
    return np.einsum("tij,aqj->taqi", invJT, Gref)


def _chunks(n):
    for lo in range(0, n, _CHUNK):
        yield lo, min(lo + _CHUNK, n)


# -- element kernels ----------------------------------------------------------

def _element_matrices(kind, mesh, order_trial, order_test, lo, hi, ncomp=3):
    deg = _FORM_DEGREE[kind]
    pts, w = tet_rule(deg)
    geom = _geometry(mesh)
    detJ = geom["detJ"][lo:hi]
    invJT = geom["invJT"][lo:hi]

    if kind == "mass":
        N, _ = _shapes(order_test, pts)
        M, _ = _shapes(order_trial, pts)
        Mref = np.einsum("q,aq,bq->ab", w, N, M)
        E = np.einsum("t,ab->tab", detJ, Mref)
        if ncomp == 1:
            return E
        nA, nB = N.shape[0], M.shape[0]
        out = np.zeros((hi - lo, nA, 3, nB, 3))
        for c in range(3):
            out[:, :, c, :, c] = E
        return out.reshape(hi - lo, 3 * nA, 3 * nB)

    if kind in ("rot_rot", "div_div"):
        _, Gref = _shapes(order_test, pts)
        G = _phys_grads(invJT, Gref)
        if order_trial == order_test:
            H = G
        else:
            _, Href = _shapes(order_trial, pts)
            H = _phys_grads(invJT, Href)
        if kind == "div_div":
            E = np.einsum("q,taqc,tbqd->tacbd", w, G, H)
        else:
            M1 = np.einsum("q,taqi,tbqi->tab", w, G, H)
            E2 = np.einsum("q,taqd,tbqc->tacbd", w, G, H)
            E = -E2
            for c in range(3):
                E[:, :, c, :, c] += M1
        E *= detJ[:, None, None, None, None]
        nA, nB = E.shape[1], E.shape[3]
        return E.reshape(hi - lo, 3 * nA, 3 * nB)

    if kind == "rot_coupling":
        # E[(a,c),(b,d)] = sum_q w N_b (grad N_a x e_c)_d
        _, Gref = _shapes(order_test, pts)
        G = _phys_grads(invJT, Gref)
        M, _ = _shapes(order_trial, pts)
        T = np.einsum("q,bq,taqj->tajb", w, M, G)
        E = np.einsum("djc,tajb->tacbd", _EPS3, T)
        E *= detJ[:, None, None, None, None]
        nA, nB = E.shape[1], E.shape[3]
        return E.reshape(hi - lo, 3 * nA, 3 * nB)

    if kind == "pressure_div":
        _, Gref = _shapes(order_test, pts)
        G = _phys_grads(invJT, Gref)
        M, _ = _shapes(order_trial, pts)
        E = np.einsum("q,bq,taqc->tacb", w, M, G)
        E *= detJ[:, None, None, None]
        nA, nB = E.shape[1], E.shape[3]
        return E.reshape(hi - lo, 3 * nA, nB)

    raise ValueError(f"unknown form kind {kind!r}")


def _scatter(blocks, shape):
    data, rows, cols = [], [], []
    for E, r, c in blocks:
        nA, nB = E.shape[1], E.shape[2]
        rows.append(np.repeat(r, nB, axis=1).ravel())
        cols.append(np.tile(c, (1, nA)).ravel())
        data.append(E.ravel())
    K = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=shape,
    ).tocsr()
    K.sum_duplicates()
    return K


def assemble_form(kind, trial, test, coefficient=1.0):
    """Reduced operator ``P_test^T K P_trial`` for one bilinear form kind."""
    if trial.mesh is not test.mesh:
        raise MeshMismatch("trial and test spaces live on different meshes")
    mesh = trial.mesh
    if kind == "surface_cross":
        K = _assemble_surface_cross(mesh, trial, test)
    else:
        _check_families(kind, trial, test)
        blocks = []
        for lo, hi in _chunks(len(mesh.tets)):
            E = _element_matrices(kind, mesh, trial.order, test.order, lo, hi, test.ncomp)
            blocks.append((E, test.element_dofs[lo:hi], trial.element_dofs[lo:hi]))
        K = _scatter(blocks, (test.ndof_full, trial.ndof_full))
    K = test.P.T @ K @ trial.P
    if coefficient != 1.0:
        K = K * coefficient
    K.sum_duplicates()
    return K.tocsr()


def _check_families(kind, trial, test):
    if kind == "pressure_div":
        if trial.ncomp != 1 or test.ncomp != 3:
            raise ValueError("pressure_div needs scalar trial and vector test")
    elif kind == "mass":
        if trial.ncomp != test.ncomp:
            raise ValueError("mass needs matching component counts")
    elif kind in ("rot_rot", "div_div", "rot_coupling", "surface_cross"):
        if trial.ncomp != 3 or test.ncomp != 3:
            raise ValueError(f"{kind} needs vector trial and test spaces")


def _assemble_surface_cross(mesh, trial, test):
    """int_{dF} (u x n) . v over the obstacle faces with stored normals."""
    _check_families("surface_cross", trial, test)
    if trial.order != 2 or test.order != 2:
        raise ValueError("surface_cross implemented for P2 traces")
    faces = mesh.obstacle_face_p2nodes  # (nf, 6)
    if len(faces) == 0:
        return sp.csr_matrix((test.ndof_full, trial.ndof_full))
    pts, w = tri_rule(4)
    N = _tri_p2_shapes(pts)  # (6, nq)
    Mref = np.einsum("q,aq,bq->ab", w, N, N) * 2.0  # x2: ref weights sum to 1/2
    n = mesh.obstacle_normals
    # (u x n) . v factor: T[c, d] = eps_{cdj} n_j  with u-component d, v-component c
    Tcd = np.einsum("cdj,fj->fcd", _EPS3, n)
    E = np.einsum("f,ab,fcd->facbd", mesh.obstacle_areas, Mref, Tcd)
    dofs = (3 * faces[:, :, None] + np.arange(3)[None, None, :]).reshape(len(faces), 18)
    K = _scatter(
        [(E.reshape(len(faces), 18, 18), dofs, dofs)],
        (test.ndof_full, trial.ndof_full),
    )
    return K


def assemble_load(space, f, degree=4):
    """Reduced load vector int f . v (or int f v for scalar spaces)."""
    mesh = space.mesh
    pts, w = tet_rule(degree)
    N, _ = _shapes(space.order, pts)
    geom = _geometry(mesh)
    out = np.zeros(space.ndof_full)
    for lo, hi in _chunks(len(mesh.tets)):
        v0 = geom["v0"][lo:hi]
        Jcols = _jacobian_cols(mesh, lo, hi)
        x = v0[:, None, :] + np.einsum("tic,qc->tqi", Jcols, pts)
        fv = _sample(f, x, space.ncomp)
        if space.ncomp == 1:
            L = np.einsum("q,aq,tq->ta", w, N, fv) * geom["detJ"][lo:hi, None]
            np.add.at(out, space.element_dofs[lo:hi], L)
        else:
            L = np.einsum("q,aq,tqc->tac", w, N, fv) * geom["detJ"][lo:hi, None, None]
            np.add.at(out, space.element_dofs[lo:hi], L.reshape(hi - lo, -1))
    return space.P.T @ out


def _jacobian_cols(mesh, lo, hi):
    v = mesh.vertices[mesh.tets[lo:hi]]
    return np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0], v[:, 3] - v[:, 0]], axis=2)


def _sample(f, x, ncomp):
    """Evaluate a constant vector / callable forcing at points x (t, q, 3)."""
    t, q, _ = x.shape
    if callable(f):
        vals = f(x.reshape(-1, 3))
        vals = np.asarray(vals, dtype=float)
        if ncomp == 1:
            return vals.reshape(t, q)
        return vals.reshape(t, q, 3)
    arr = np.asarray(f, dtype=float)
    if ncomp == 1:
        return np.full((t, q), float(arr))
    return np.broadcast_to(arr, (t, q, 3))


def mean_vector(space):
    """Reduced vector of int q_i, the zero-mean multiplier row for scalar spaces."""
    return assemble_load(space, 1.0, degree=space.order)


# -- field evaluation and norms ----------------------------------------------

def _field_at_quad(field, pts, lo, hi, need_grad):
    space = field.space
    mesh = space.mesh
    N, Gref = _shapes(space.order, pts)
    geom = _geometry(mesh)
    coef = field.nodal[space.element_nodes[lo:hi]]  # (t, a, ncomp)
    vals = np.einsum("aq,tac->tqc", N, coef)
    grads = None
    if need_grad:
        G = _phys_grads(geom["invJT"][lo:hi], Gref)
        grads = np.einsum("taqi,tac->tqci", G, coef)
    return vals, grads


def field_norms(field):
    """L2 norms of the field, its gradient, divergence and rot."""
    mesh = field.space.mesh
    pts, w = tet_rule(4)
    detJ = _geometry(mesh)["detJ"]
    l2 = grad = div = rot = 0.0
    for lo, hi in _chunks(len(mesh.tets)):
        vals, grads = _field_at_quad(field, pts, lo, hi, True)
        wq = w[None, :] * detJ[lo:hi, None]
        l2 += np.einsum("tq,tqc->", wq, vals**2)
        grad += np.einsum("tq,tqci->", wq, grads**2)
        dv = np.einsum("tqcc->tq", grads)
        div += np.einsum("tq,tq->", wq, dv**2)
        rv = np.einsum("ijk,tqkj->tqi", _EPS3, grads)
        rot += np.einsum("tq,tqi->", wq, rv**2)
    return {
        "l2": np.sqrt(l2),
        "grad_l2": np.sqrt(grad),
        "div_l2": np.sqrt(div),
        "rot_l2": np.sqrt(rot),
    }


def integrate_field(field):
    """Componentwise integral of the field over the mesh."""
    mesh = field.space.mesh
    pts, w = tet_rule(2 if field.space.order == 2 else 1)
    detJ = _geometry(mesh)["detJ"]
    total = np.zeros(field.space.ncomp)
    for lo, hi in _chunks(len(mesh.tets)):
        vals, _ = _field_at_quad(field, pts, lo, hi, False)
        total += np.einsum("q,t,tqc->c", w, detJ[lo:hi], vals)
    return total


def integrate_field_on_tets(field, tet_ids):
    """Integral of the field restricted to the given tets."""
    mesh = field.space.mesh
    pts, w = tet_rule(2 if field.space.order == 2 else 1)
    detJ = _geometry(mesh)["detJ"]
    space = field.space
    N, _ = _shapes(space.order, pts)
    coef = field.nodal[space.element_nodes[tet_ids]]
    vals = np.einsum("aq,tac->tqc", N, coef)
    return np.einsum("q,t,tqc->c", w, detJ[tet_ids], vals)


def evaluate_field(field, tet_ids, bary):
    """Field values at points given by owning tet and barycentric coordinates."""
    space = field.space
    lam = np.asarray(bary, dtype=float)  # (npts, 4)
    if space.order == 1:
        N = lam
    else:
        npts = len(lam)
        N = np.empty((npts, 10))
        N[:, :4] = lam * (2.0 * lam - 1.0)
        from ..mesh import _EDGE_LOCAL

        for e, (i, j) in enumerate(_EDGE_LOCAL):
            N[:, 4 + e] = 4.0 * lam[:, i] * lam[:, j]
    coef = field.nodal[space.element_nodes[tet_ids]]  # (npts, a, ncomp)
    return np.einsum("pa,pac->pc", N, coef)


# -- discrete vector-calculus oracles ------------------------------------------

def _pair_integrals(phi, psi):
    """(int rot(phi).psi, int rot(psi).phi) by direct quadrature."""
    mesh = phi.space.mesh
    deg = 4
    pts, w = tet_rule(deg)
    detJ = _geometry(mesh)["detJ"]
    r1 = r2 = 0.0
    for lo, hi in _chunks(len(mesh.tets)):
        pv, pg = _field_at_quad(phi, pts, lo, hi, True)
        sv, sg = _field_at_quad(psi, pts, lo, hi, True)
        wq = w[None, :] * detJ[lo:hi, None]
        rot_p = np.einsum("ijk,tqkj->tqi", _EPS3, pg)
        rot_s = np.einsum("ijk,tqkj->tqi", _EPS3, sg)
        r1 += np.einsum("tq,tqi,tqi->", wq, rot_p, sv)
        r2 += np.einsum("tq,tqi,tqi->", wq, rot_s, pv)
    return r1, r2


def surface_cross_integral(phi, psi):
    """int_{dF} (phi x n) . psi over the obstacle faces."""
    mesh = phi.space.mesh
    faces_phi = _face_nodes_for(phi.space)
    faces_psi = _face_nodes_for(psi.space)
    if len(mesh.obstacle_faces) == 0:
        return 0.0
    pts, w = tri_rule(4)
    Np = _face_tri_shapes(phi.space, pts)
    Ns = _face_tri_shapes(psi.space, pts)
    pv = np.einsum("aq,fac->fqc", Np, phi.nodal[faces_phi])
    sv = np.einsum("aq,fac->fqc", Ns, psi.nodal[faces_psi])
    n = mesh.obstacle_normals
    cross = np.cross(pv, n[:, None, :])
    return float(
        2.0 * np.einsum("f,q,fqc,fqc->", mesh.obstacle_areas, w, cross, sv)
    )


def _face_nodes_for(space):
    mesh = space.mesh
    if space.order == 2:
        return mesh.obstacle_face_p2nodes
    return mesh.obstacle_faces


def _face_tri_shapes(space, pts):
    if space.order == 2:
        return _tri_p2_shapes(pts)
    s, t = pts[:, 0], pts[:, 1]
    return np.stack([1.0 - s - t, s, t])


def ibp_residual(phi, psi):
    """Defect of int rot(phi).psi - int rot(psi).phi - int_{dF} (phi x n).psi.

    Exact (up to rounding) for conforming fields that are periodic or vanish
    on the exterior boundary, by the elementwise divergence theorem.
    """
    r1, r2 = _pair_integrals(phi, psi)
    s = surface_cross_integral(phi, psi)
    return abs(r1 - r2 - s)


def gaffney_ratio(v):
    """||Dv||^2 / (||div v||^2 + ||rot v||^2) for a constrained field."""
    norms = field_norms(v)
    denom = norms["div_l2"] ** 2 + norms["rot_l2"] ** 2
    if denom <= 1e-28 * max(norms["grad_l2"] ** 2, 1e-300):
        raise ZeroDenominator("field has (numerically) zero divergence and rot")
    return norms["grad_l2"] ** 2 / denom


def export_operator(op, path):
    """Coordinate-format text dump (row, col, value) with 17 significant digits."""
    coo = sp.coo_matrix(op)
    with open(path, "w") as f:
        f.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            f.write(f"{r} {c} {format(v, '.17g')}\n")
