"""Voxel density maps: synthesis from atoms, filtering, cross-correlation,
Fourier resampling.

Conventions
-----------
A map is a regular 3D grid of voxel values.  Voxel (ix, iy, iz) is centered
at ``origin + (ix, iy, iz) * voxel_size`` (world coordinates in Angstrom).
Values are stored as a C-contiguous float64 array of shape (nx, ny, nz);
the flat serialization order is x-fastest.

Maps synthesized here always have their origin on the global lattice
(integer multiples of an anchor plus the voxel size), so any two maps with
equal voxel size are lattice-commensurate and can be cross-correlated
without interpolation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from mapfit import _backend

SIGMA_PER_RESOLUTION = 0.187  # blur sigma = 0.187 * map resolution


@dataclass(frozen=True)
class Resolution:
    """Nominal map resolution in Angstrom."""

    value: float

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError(f"resolution must be > 0, got {self.value}")

    @property
    def sigma(self):
        """Gaussian blur sigma in Angstrom for this resolution."""
        return SIGMA_PER_RESOLUTION * self.value


@dataclass(frozen=True)
class AtomRecord:
    """One atom: element symbol, atomic number, world position, owner protein.

    Hydrogens (atomic_number 1) are kept in atom lists but skipped by
    voxelization and RMSD.
    """

    element: str
    atomic_number: int
    position: np.ndarray
    protein_id: int = 0

    def __post_init__(self):
        if self.atomic_number < 1:
            raise ValueError(f"atomic_number must be >= 1, got {self.atomic_number}")
        pos = np.asarray(self.position, dtype=np.float64)
        if pos.shape != (3,):
            raise ValueError(f"position must be a 3-vector, got shape {pos.shape}")
        object.__setattr__(self, "position", pos)

    @property
    def is_hydrogen(self):
        return self.atomic_number == 1


@dataclass(frozen=True)
class DensityMap:
    """3D scalar voxel grid with origin and uniform voxel size.

    ``values`` has shape ``dims`` = (nx, ny, nz) and is made read-only on
    construction, so instances are safe to share across threads.
    """

    dims: tuple
    origin: np.ndarray
    voxel_size: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ValueError(f"dims must be 3 positive integers, got {self.dims}")
        if self.voxel_size <= 0:
            raise ValueError(f"voxel_size must be > 0, got {self.voxel_size}")
        origin = np.asarray(self.origin, dtype=np.float64)
        if origin.shape != (3,):
            raise ValueError(f"origin must be a 3-vector, got shape {origin.shape}")
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != dims:
            if values.size != dims[0] * dims[1] * dims[2]:
                raise ValueError(
                    f"values size {values.size} != nx*ny*nz = "
                    f"{dims[0] * dims[1] * dims[2]}"
                )
            values = values.reshape(dims)
        origin.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "voxel_size", float(self.voxel_size))
        object.__setattr__(self, "values", values)

    @property
    def n_voxels(self):
        return self.values.size

    def total_mass(self):
        return float(self.values.sum())

    def with_values(self, values):
        """New map on the same grid with different values."""
        return DensityMap(self.dims, self.origin, self.voxel_size, values)

    def nearest_index(self, position):
        """Grid index of the voxel whose center is nearest to a world point."""
        rel = (np.asarray(position, dtype=np.float64) - self.origin) / self.voxel_size
        return np.rint(rel).astype(np.int64)


def lattice_offset(a, b, tol=1e-6):
    """Integer voxel offset of map b's origin relative to map a's origin.

    Raises ValueError if the voxel sizes differ or the origins are not
    separated by integer multiples of the voxel size.
    """
    if not math.isclose(a.voxel_size, b.voxel_size, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(
            f"voxel size mismatch: {a.voxel_size} vs {b.voxel_size}"
        )
    rel = (b.origin - a.origin) / a.voxel_size
    off = np.rint(rel)
    if np.any(np.abs(rel - off) > tol):
        raise ValueError(
            f"origins are not lattice-commensurate: offset {rel} is not integer"
        )
    return off.astype(np.int64)


def voxelize(atoms, voxel_size, resolution, padding=None, *,
             origin_anchor=(0.0, 0.0, 0.0), origin_spacing=None):
    """Scatter atoms onto a grid: each non-hydrogen atom adds its atomic
    number to the voxel nearest its position.  No blurring is applied.

    The grid covers the atoms' bounding box expanded by ``padding`` (in
    Angstrom; default 2*ceil(2*sigma_vox) voxels, wide enough that a
    subsequent blur to ``resolution`` never clips mass).  The origin is
    snapped down onto the lattice ``origin_anchor + k * origin_spacing``
    (spacing defaults to ``voxel_size``), which makes all maps of equal
    voxel size mutually lattice-commensurate.
    """
    if voxel_size <= 0:
        raise ValueError(f"voxel_size must be > 0, got {voxel_size}")
    if not isinstance(resolution, Resolution):
        resolution = Resolution(float(resolution))
    heavy = [a for a in atoms if not a.is_hydrogen]
    if not heavy:
        raise ValueError("no non-hydrogen atoms to voxelize")

    sigma_vox = resolution.sigma / voxel_size
    if padding is None:
        padding = 2 * math.ceil(2 * sigma_vox) * voxel_size
    if origin_spacing is None:
        origin_spacing = voxel_size

    positions = np.array([a.position for a in heavy])
    weights = np.array([float(a.atomic_number) for a in heavy])
    lo = positions.min(axis=0) - padding
    hi = positions.max(axis=0) + padding
    anchor = np.asarray(origin_anchor, dtype=np.float64)
    origin = anchor + np.floor((lo - anchor) / origin_spacing) * origin_spacing
    dims = tuple(int(np.rint((hi[i] - origin[i]) / voxel_size)) + 1
                 for i in range(3))

    values = np.zeros(dims)
    idx = np.rint((positions - origin) / voxel_size).astype(np.int64)
    np.add.at(values, (idx[:, 0], idx[:, 1], idx[:, 2]), weights)
    return DensityMap(dims, origin, voxel_size, values)


def synthesize_map(atoms, voxel_size, resolution, padding=None, *,
                   origin_anchor=(0.0, 0.0, 0.0), origin_spacing=None):
    """Voxelize atoms onto a grid and blur to the requested resolution.

    Every non-hydrogen atom adds its atomic number to its nearest voxel
    (see :func:`voxelize`); the result is blurred with a Gaussian of
    sigma = 0.187 * resolution.
    """
    if not isinstance(resolution, Resolution):
        resolution = Resolution(float(resolution))
    raw = voxelize(atoms, voxel_size, resolution, padding,
                   origin_anchor=origin_anchor, origin_spacing=origin_spacing)
    return gaussian_blur(raw, resolution.sigma)


def gaussian_kernel(sigma_vox):
    """Normalized 1D Gaussian taps of length 2*ceil(2*sigma_vox) + 1."""
    if sigma_vox <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma_vox}")
    radius = math.ceil(2 * sigma_vox)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-0.5 * (x / sigma_vox) ** 2)
    return taps / taps.sum()


def gaussian_blur(density_map, sigma):
    """Separable Gaussian blur with zero-padded boundaries; dims unchanged.

    ``sigma`` is in Angstrom; the kernel is built in voxel units with
    length 2*ceil(2*sigma_vox) + 1 and normalized to unit sum per axis.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    taps = gaussian_kernel(sigma / density_map.voxel_size)
    blurred = _backend.blur_3d(density_map.values, taps)
    return density_map.with_values(blurred)


def laplacian_filter(density_map, kernel=None):
    """Discrete 3D Laplacian with zero-padded boundaries; output may be signed.

    The default is the 7-point stencil (center -6, six face neighbors +1).
    A custom 3x3x3 kernel may be supplied for experimentation.
    """
    if any(d < 3 for d in density_map.dims):
        raise ValueError(
            f"map too small for Laplacian filtering: dims {density_map.dims}"
        )
    if kernel is None:
        out = _backend.laplacian_3d(density_map.values)
        return density_map.with_values(out)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape != (3, 3, 3):
        raise ValueError(f"custom kernel must be 3x3x3, got {kernel.shape}")
    v = density_map.values
    out = np.zeros_like(v)
    n = v.shape
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                w = kernel[dx + 1, dy + 1, dz + 1]
                if w == 0.0:
                    continue
                dst = tuple(slice(max(0, -d), min(s, s - d))
                            for d, s in zip((dx, dy, dz), n))
                src = tuple(slice(max(0, d), min(s, s + d))
                            for d, s in zip((dx, dy, dz), n))
                out[dst] += w * v[src]
    return density_map.with_values(out)


def cross_correlate(a, b):
    """Voxel-wise dot product of two maps over their world-space overlap.

    Requires equal voxel sizes and lattice-commensurate origins; grid
    regions that do not overlap contribute zero, so disjoint maps
    correlate to 0.  Symmetric in its arguments.
    """
    offset = lattice_offset(a, b)
    return _backend.overlap_dot(a.values, b.values, offset)


def resample_fourier(density_map, target_voxel_size):
    """Resample to a new voxel size via FFT zero-padding / cropping.

    The voxel count per axis becomes round(n * voxel_size / target); the
    spectrum is center-cropped or zero-padded and amplitudes are rescaled
    so a constant map stays constant.  If the target equals the current
    voxel size the input map is returned unchanged.
    """
    if target_voxel_size <= 0:
        raise ValueError(
            f"target voxel size must be > 0, got {target_voxel_size}"
        )
    if target_voxel_size == density_map.voxel_size:
        return density_map

    old = density_map.dims
    scale = density_map.voxel_size / target_voxel_size
    new = tuple(max(1, int(np.rint(n * scale))) for n in old)

    spectrum = np.fft.fftshift(np.fft.fftn(density_map.values))
    # When cropping an axis to an even length, the +Nyquist and -Nyquist
    # planes of the target alias onto the same frequency: fold them
    # together before cropping so the spectrum stays Hermitian.
    for ax, (n_old, n_new) in enumerate(zip(old, new)):
        if n_new < n_old and n_new % 2 == 0:
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[ax] = n_old // 2 - n_new // 2
            hi[ax] = n_old // 2 + n_new // 2
            spectrum[tuple(lo)] = spectrum[tuple(lo)] + spectrum[tuple(hi)]

    out = np.zeros(new, dtype=complex)
    src, dst = [], []
    for n_old, n_new in zip(old, new):
        w = min(n_old, n_new)
        src.append(slice(n_old // 2 - w // 2, n_old // 2 - w // 2 + w))
        dst.append(slice(n_new // 2 - w // 2, n_new // 2 - w // 2 + w))
    out[tuple(dst)] = spectrum[tuple(src)]

    # When zero-padding an axis of even length, the source's unpaired
    # -Nyquist plane becomes representable at both ends: split it so the
    # padded spectrum is Hermitian (and the round trip folds it back).
    for ax, (n_old, n_new) in enumerate(zip(old, new)):
        if n_new > n_old and n_old % 2 == 0:
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[ax] = n_new // 2 - n_old // 2
            hi[ax] = n_new // 2 + n_old // 2
            out[tuple(lo)] *= 0.5
            out[tuple(hi)] = out[tuple(lo)]

    amp = np.prod(new) / np.prod(old)
    values = np.real(np.fft.ifftn(np.fft.ifftshift(out))) * amp
    return DensityMap(new, density_map.origin, float(target_voxel_size), values)


def regrid_onto(density_map, reference):
    """Copy a map's values onto the reference's exact grid (crop / zero-pad).

    Both maps must be lattice-commensurate with equal voxel size.  Voxels
    outside the source map are zero.
    """
    offset = lattice_offset(reference, density_map)
    out = np.zeros(reference.dims)
    lo = np.maximum(0, offset)
    hi = np.minimum(reference.dims, np.asarray(density_map.dims) + offset)
    if np.all(hi > lo):
        out[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = density_map.values[
            lo[0] - offset[0]:hi[0] - offset[0],
            lo[1] - offset[1]:hi[1] - offset[1],
            lo[2] - offset[2]:hi[2] - offset[2],
        ]
    return DensityMap(reference.dims, reference.origin,
                      reference.voxel_size, out)
