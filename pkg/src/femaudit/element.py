"""Linear-elastic 4-node tetrahedron.

Constant-strain TET4: shape-function gradients, strain-displacement
matrix, element stiffness Ke = V * B^T D B, stress recovery and the
von Mises equivalent stress.

Voigt ordering is fixed throughout the toolkit as

    (xx, yy, zz, xy, yz, zx)

with *engineering* shear strains (gamma = 2 * eps). The 6x6 elasticity
matrix follows from the Lame constants

    lambda = E nu / ((1 + nu)(1 - 2 nu)),   mu = E / (2 (1 + nu)).

All functions are pure; vectorized variants operate on stacked element
arrays and are the ones the assembler uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DegenerateElement

# Relative volume threshold below which a tetrahedron has no usable
# gradients. Relative to the element's own edge scale, not the mesh.
_DEGENERATE_REL_TOL = 1e-12


@dataclass(frozen=True)
class Material:
    """Isotropic linear-elastic material.

    Attributes:
        name: Label echoed into reports.
        E: Young's modulus [Pa].
        nu: Poisson ratio, 0 <= nu < 0.5.
        rho: Density [kg/m^3].
        yield_strength: Yield strength [Pa], used for report context only.
    """

    name: str
    E: float
    nu: float
    rho: float = 7850.0
    yield_strength: float = 355e6

    def __post_init__(self):
        if not (np.isfinite(self.E) and self.E > 0):
            raise ValueError(f"material {self.name!r}: E must be > 0, got {self.E}")
        if not (0.0 <= self.nu < 0.5):
            raise ValueError(f"material {self.name!r}: nu must be in [0, 0.5), got {self.nu}")
        if not (np.isfinite(self.rho) and self.rho >= 0):
            raise ValueError(f"material {self.name!r}: rho must be >= 0, got {self.rho}")
        if not (np.isfinite(self.yield_strength) and self.yield_strength > 0):
            raise ValueError(
                f"material {self.name!r}: yield strength must be > 0, got {self.yield_strength}"
            )


#: Default structural steel used when the model file omits properties.
#: The audit report echoes whichever values were actually used.
DEFAULT_STEEL = Material(name="structural steel (default)", E=210e9, nu=0.3,
                         rho=7850.0, yield_strength=355e6)


def elasticity_matrix(mat: Material) -> NDArray[np.float64]:
    """6x6 isotropic elasticity matrix D in Voigt order (xx,yy,zz,xy,yz,zx).

    Normal block: lambda + 2 mu on the diagonal, lambda off-diagonal.
    Shear block: mu on the diagonal (engineering shear strains).
    """
    lam = mat.E * mat.nu / ((1.0 + mat.nu) * (1.0 - 2.0 * mat.nu))
    mu = mat.E / (2.0 * (1.0 + mat.nu))
    d = np.zeros((6, 6))
    d[:3, :3] = lam
    d[0, 0] = d[1, 1] = d[2, 2] = lam + 2.0 * mu
    d[3, 3] = d[4, 4] = d[5, 5] = mu
    return d


def shape_gradients(coords: NDArray[np.float64]) -> tuple[NDArray[np.float64], float]:
    """Constant shape-function gradients and volume of one tetrahedron.

    Args:
        coords: (4, 3) vertex coordinates.

    Returns:
        (grads, volume): grads is (4, 3) with row i = grad N_i; the four
        rows sum to the zero vector. volume is the signed volume (positive
        for canonically oriented elements).

    Raises:
        DegenerateElement: if the vertices are (nearly) coplanar.
    """
    coords = np.asarray(coords, dtype=float)
    grads, vol = _gradients_stacked(coords[np.newaxis, :, :])
    v = float(vol[0])
    scale = float(np.max(np.abs(coords - coords[0]))) or 1.0
    if abs(v) <= _DEGENERATE_REL_TOL * scale**3:
        raise DegenerateElement(f"tetrahedron volume {v:g} is degenerate")
    return grads[0], v


def _gradients_stacked(
    coords: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Gradients and signed volumes for stacked elements, (m,4,3) -> ((m,4,3), (m,)).

    Uses the adjugate of the edge matrix E = [p1-p0, p2-p0, p3-p0] (columns):
    the barycentric coordinates are N_123 = E^{-1} (x - p0), so grad N_i is
    row i-1 of E^{-1}, and grad N_0 closes the partition of unity.
    """
    p0 = coords[:, 0, :]
    e = np.stack([coords[:, 1, :] - p0, coords[:, 2, :] - p0, coords[:, 3, :] - p0],
                 axis=2)  # (m, 3, 3), columns are edge vectors
    c01, c11, c21 = e[:, 0, 0], e[:, 1, 0], e[:, 2, 0]
    c02, c12, c22 = e[:, 0, 1], e[:, 1, 1], e[:, 2, 1]
    c03, c13, c23 = e[:, 0, 2], e[:, 1, 2], e[:, 2, 2]
    # adjugate rows of E (cofactor expansion); det via first column
    adj = np.empty_like(e)
    adj[:, 0, 0] = c12 * c23 - c13 * c22
    adj[:, 0, 1] = c03 * c22 - c02 * c23
    adj[:, 0, 2] = c02 * c13 - c03 * c12
    adj[:, 1, 0] = c13 * c21 - c11 * c23
    adj[:, 1, 1] = c01 * c23 - c03 * c21
    adj[:, 1, 2] = c03 * c11 - c01 * c13
    adj[:, 2, 0] = c11 * c22 - c12 * c21
    adj[:, 2, 1] = c02 * c21 - c01 * c22
    adj[:, 2, 2] = c01 * c12 - c02 * c11
    det = c01 * adj[:, 0, 0] + c02 * adj[:, 1, 0] + c03 * adj[:, 2, 0]
    vol = det / 6.0
    grads = np.empty_like(coords)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = adj / det[:, None, None]
        grads[:, 1:, :] = inv
        grads[:, 0, :] = -inv.sum(axis=1)
    return grads, vol


def strain_displacement(grads: NDArray[np.float64]) -> NDArray[np.float64]:
    """6x12 B matrix from (4, 3) gradients, Voigt order (xx,yy,zz,xy,yz,zx)."""
    return _b_stacked(grads[np.newaxis, :, :])[0]


def _b_stacked(grads: NDArray[np.float64]) -> NDArray[np.float64]:
    """(m, 4, 3) gradients -> (m, 6, 12) strain-displacement matrices."""
    m = grads.shape[0]
    b = np.zeros((m, 6, 12))
    gx, gy, gz = grads[:, :, 0], grads[:, :, 1], grads[:, :, 2]
    cols = np.arange(4) * 3
    b[:, 0, cols + 0] = gx
    b[:, 1, cols + 1] = gy
    b[:, 2, cols + 2] = gz
    b[:, 3, cols + 0] = gy
    b[:, 3, cols + 1] = gx
    b[:, 4, cols + 1] = gz
    b[:, 4, cols + 2] = gy
    b[:, 5, cols + 0] = gz
    b[:, 5, cols + 2] = gx
    return b


def element_stiffness(coords: NDArray[np.float64], mat: Material) -> NDArray[np.float64]:
    """12x12 stiffness Ke = V * B^T D B of one tetrahedron.

    Symmetric positive semidefinite with a six-dimensional nullspace
    (three translations, three infinitesimal rotations).
    """
    grads, vol = shape_gradients(coords)
    b = strain_displacement(grads)
    d = elasticity_matrix(mat)
    ke = vol * (b.T @ d @ b)
    return 0.5 * (ke + ke.T)


def stiffness_stacked(
    grads: NDArray[np.float64],
    vols: NDArray[np.float64],
    d: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Stacked Ke for elements sharing one material: (m,4,3),(m,),(6,6) -> (m,12,12)."""
    b = _b_stacked(grads)
    ke = np.einsum("e,eji,jk,ekl->eil", vols, b, d, b, optimize=True)
    return 0.5 * (ke + ke.transpose(0, 2, 1))


def recover_stress(
    coords: NDArray[np.float64],
    mat: Material,
    u_e: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Constant element stress (xx,yy,zz,xy,yz,zx) [Pa] from 12 nodal displacements."""
    grads, _ = shape_gradients(coords)
    b = strain_displacement(grads)
    return elasticity_matrix(mat) @ b @ np.asarray(u_e, dtype=float).reshape(12)


def stress_stacked(
    grads: NDArray[np.float64],
    d: NDArray[np.float64],
    u_e: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Stacked stress recovery: (m,4,3) grads, (6,6) D, (m,12) u -> (m,6)."""
    b = _b_stacked(grads)
    return np.einsum("ij,ejk,ek->ei", d, b, u_e, optimize=True)


def von_mises(stress: NDArray[np.float64]) -> NDArray[np.float64] | float:
    """Von Mises equivalent stress of one tensor (6,) or a stack (m, 6).

    sqrt(1/2 [(sxx-syy)^2 + (syy-szz)^2 + (szz-sxx)^2] + 3 (txy^2+tyz^2+tzx^2))
    """
    s = np.asarray(stress, dtype=float)
    sxx, syy, szz = s[..., 0], s[..., 1], s[..., 2]
    txy, tyz, tzx = s[..., 3], s[..., 4], s[..., 5]
    vm2 = 0.5 * ((sxx - syy) ** 2 + (syy - szz) ** 2 + (szz - sxx) ** 2) \
        + 3.0 * (txy**2 + tyz**2 + tzx**2)
    vm = np.sqrt(np.maximum(vm2, 0.0))
    return float(vm) if vm.ndim == 0 else vm
