"""Binary and text file formats: DMAP v1 (density map), PROB v1 (problem
dump), PLAC v1 (placement list).

DMAP v1 (little-endian): magic "DMAP", u32 version=1, u32 nx ny nz,
f64 origin[3], f64 voxel_size, then nx*ny*nz f64 values, x-fastest.

PROB v1 (little-endian): magic "PROB", u32 version=1, u32 m, u32 N,
u32 score-kind tag, Q row-major f64 (n*n, n = m*N), b f64 (n).

PLAC v1 (text): header "PLAC 1 m N voxel_size"; per placement one line
"i k" followed by atom lines "element x y z"; '#' starts a comment.

All binary round-trips are bit-exact.
"""

import struct

import numpy as np

from mapfit.grid import AtomRecord, DensityMap
from mapfit.pdbio import atomic_number

DMAP_MAGIC = b"DMAP"
PROB_MAGIC = b"PROB"


def write_dmap(density_map, path):
    with open(path, "wb") as fh:
        fh.write(DMAP_MAGIC)
        fh.write(struct.pack("<4I", 1, *density_map.dims))
        fh.write(struct.pack("<3d", *density_map.origin))
        fh.write(struct.pack("<d", density_map.voxel_size))
        flat = np.ascontiguousarray(density_map.values.ravel(order="F"),
                                    dtype="<f8")
        fh.write(flat.tobytes())


def read_dmap(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != DMAP_MAGIC:
            raise ValueError(f"{path}: not a DMAP file (magic {magic!r})")
        version, nx, ny, nz = struct.unpack("<4I", fh.read(16))
        if version != 1:
            raise ValueError(f"{path}: unsupported DMAP version {version}")
        origin = np.array(struct.unpack("<3d", fh.read(24)))
        (voxel_size,) = struct.unpack("<d", fh.read(8))
        count = nx * ny * nz
        raw = fh.read(8 * count)
        if len(raw) != 8 * count:
            raise ValueError(f"{path}: truncated DMAP payload")
        flat = np.frombuffer(raw, dtype="<f8")
    values = flat.reshape((nx, ny, nz), order="F")
    return DensityMap((nx, ny, nz), origin, voxel_size, values)


def write_prob(path, m, N, kind_tag, Q, b):
    n = m * N
    Q = np.ascontiguousarray(Q, dtype="<f8")
    b = np.ascontiguousarray(b, dtype="<f8")
    if Q.shape != (n, n):
        raise ValueError(f"Q must be {n}x{n}, got {Q.shape}")
    if b.shape != (n,):
        raise ValueError(f"b must have length {n}, got {b.shape}")
    with open(path, "wb") as fh:
        fh.write(PROB_MAGIC)
        fh.write(struct.pack("<4I", 1, m, N, kind_tag))
        fh.write(Q.tobytes())
        fh.write(b.tobytes())


def read_prob(path):
    """Returns (m, N, kind_tag, Q, b)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != PROB_MAGIC:
            raise ValueError(f"{path}: not a PROB file (magic {magic!r})")
        version, m, N, kind_tag = struct.unpack("<4I", fh.read(16))
        if version != 1:
            raise ValueError(f"{path}: unsupported PROB version {version}")
        n = m * N
        qraw = fh.read(8 * n * n)
        braw = fh.read(8 * n)
        if len(qraw) != 8 * n * n or len(braw) != 8 * n:
            raise ValueError(f"{path}: truncated PROB payload")
    Q = np.frombuffer(qraw, dtype="<f8").reshape(n, n)
    b = np.frombuffer(braw, dtype="<f8")
    return m, N, kind_tag, Q.copy(), b.copy()


def write_plac(path, placements, m, N, voxel_size):
    with open(path, "w") as fh:
        fh.write(f"PLAC 1 {m} {N} {voxel_size!r}\n")
        for p in placements:
            fh.write(f"{p.protein_id} {p.position_id}\n")
            for atom in p.atoms:
                x, y, z = (float(v) for v in atom.position)
                fh.write(f"{atom.element} {x!r} {y!r} {z!r}\n")


def read_plac(path):
    """Returns (placement_atom_table, m, N, voxel_size).

    The table maps (protein_id, position_id) to a list of AtomRecord.
    Placement maps are not stored in the file; synthesize them as needed.
    """
    header = None
    table = {}
    current_key = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            fields = text.split()
            if header is None:
                if len(fields) != 5 or fields[0] != "PLAC" or fields[1] != "1":
                    raise ValueError(f"{path}:{lineno}: bad PLAC header")
                header = (int(fields[2]), int(fields[3]), float(fields[4]))
                continue
            if len(fields) == 2:
                current_key = (int(fields[0]), int(fields[1]))
                table[current_key] = []
            elif len(fields) == 4:
                if current_key is None:
                    raise ValueError(
                        f"{path}:{lineno}: atom line before any placement line"
                    )
                element = fields[0]
                pos = np.array([float(fields[1]), float(fields[2]),
                                float(fields[3])])
                table[current_key].append(AtomRecord(
                    element=element,
                    atomic_number=atomic_number(element),
                    position=pos,
                    protein_id=current_key[0],
                ))
            else:
                raise ValueError(f"{path}:{lineno}: unrecognized line: {text}")
    if header is None:
        raise ValueError(f"{path}: empty PLAC file")
    m, N, voxel_size = header
    if len(table) != m * N:
        raise ValueError(
            f"{path}: expected {m * N} placements, found {len(table)}"
        )
    return table, m, N, voxel_size
