"""ASCII PCD / PLY point-cloud files and binary PPM rasters."""

from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .errors import InputError


def _fmt(values):
    # repr-precision floats so coordinates survive a write/read round trip
    return " ".join(repr(float(v)) for v in values)


def pack_rgb(colors):
    """Pack uint8 RGB triples into the float32 ``rgb`` field used by PCD."""
    c = np.asarray(colors, dtype=np.uint32)
    packed = (c[:, 0] << 16) | (c[:, 1] << 8) | c[:, 2]
    return packed.astype(np.uint32).view(np.float32)


def unpack_rgb(values, as_float=True):
    raw = np.asarray(values)
    if as_float:
        raw = raw.astype(np.float32).view(np.uint32)
    else:
        raw = raw.astype(np.uint64).astype(np.uint32)
    return np.stack([(raw >> 16) & 255, (raw >> 8) & 255, raw & 255], axis=1).astype(np.uint8)


def write_pcd(path, cloud):
    """Write ``cloud`` as PCD v0.7 ASCII (``rgb`` packed into a float when colored)."""
    n = len(cloud)
    has_rgb = cloud.colors is not None
    fields = "x y z rgb" if has_rgb else "x y z"
    size = "8 8 8 4" if has_rgb else "8 8 8"
    types = "F F F F" if has_rgb else "F F F"
    count = "1 1 1 1" if has_rgb else "1 1 1"
    lines = [
        "# .PCD v0.7 - Point Cloud Data file format",
        "VERSION 0.7",
        f"FIELDS {fields}",
        f"SIZE {size}",
        f"TYPE {types}",
        f"COUNT {count}",
        f"WIDTH {n}",
        "HEIGHT 1",
        "VIEWPOINT 0 0 0 1 0 0 0",
        f"POINTS {n}",
        "DATA ascii",
    ]
    rgb = pack_rgb(cloud.colors) if has_rgb else None
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
        for i, p in enumerate(cloud.points):
            row = _fmt(p)
            if has_rgb:
                row += " " + repr(float(rgb[i]))
            fh.write(row + "\n")


def read_pcd(path):
    """Read an ASCII PCD file; rows with NaN coordinates are dropped."""
    with open(path, "r", errors="replace") as fh:
        text = fh.read()
    lines = text.splitlines()
    header = {}
    body_start = None
    for lineno, line in enumerate(lines):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        header[key.upper()] = rest.split()
        if key.upper() == "DATA":
            body_start = lineno + 1
            break
    if body_start is None or "FIELDS" not in header:
        raise InputError(f"{path}: not a PCD file (missing FIELDS/DATA)")
    if header["DATA"][0].lower() != "ascii":
        raise InputError(f"{path}: only ASCII PCD is supported, got DATA {header['DATA'][0]}")
    fields = header["FIELDS"]
    counts = [int(c) for c in header.get("COUNT", ["1"] * len(fields))]
    types = header.get("TYPE", ["F"] * len(fields))
    for axis in "xyz":
        if axis not in fields:
            raise InputError(f"{path}: missing field {axis!r}")
    columns = {}
    col = 0
    for name, cnt, typ in zip(fields, counts, types):
        columns[name] = (col, typ)
        col += cnt
    rows = [ln.split() for ln in lines[body_start:] if ln.strip()]
    n_expected = int(header.get("POINTS", [len(rows)])[0])
    if len(rows) < n_expected:
        raise InputError(f"{path}: expected {n_expected} points, found {len(rows)}")
    rows = rows[:n_expected]
    if not rows:
        return PointCloud.empty()
    try:
        data = np.array([r[:col] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise InputError(f"{path}: malformed data row: {exc}") from exc
    if data.shape[1] < col:
        raise InputError(f"{path}: data rows have fewer than {col} values")
    xyz = data[:, [columns[a][0] for a in "xyz"]]
    colors = None
    for name in ("rgb", "rgba"):
        if name in columns:
            c, typ = columns[name]
            colors = unpack_rgb(data[:, c], as_float=(typ.upper() == "F"))
            break
    return PointCloud.from_raw(xyz, colors)


_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def write_ply(path, cloud, faces=None, scalars=None):
    """Write ``cloud`` as ASCII PLY.

    ``faces`` is an optional (m, 3) integer array of triangles; ``scalars`` maps
    extra per-vertex property names to arrays (ints written as ``int``, others
    as ``double``).
    """
    n = len(cloud)
    scalars = dict(scalars or {})
    header = ["ply", "format ascii 1.0", f"element vertex {n}",
              "property double x", "property double y", "property double z"]
    if cloud.colors is not None:
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    kinds = {}
    for name, values in scalars.items():
        values = np.asarray(values)
        if len(values) != n:
            raise ValueError(f"scalar {name!r} has {len(values)} values for {n} vertices")
        kinds[name] = "int" if np.issubdtype(values.dtype, np.integer) else "double"
        header.append(f"property {kinds[name]} {name}")
    faces = None if faces is None else np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if faces is not None:
        header += [f"element face {len(faces)}", "property list uchar int vertex_indices"]
    header.append("end_header")
    with open(path, "w") as fh:
        fh.write("\n".join(header) + "\n")
        for i in range(n):
            parts = [_fmt(cloud.points[i])]
            if cloud.colors is not None:
                parts.append(" ".join(str(int(c)) for c in cloud.colors[i]))
            for name, values in scalars.items():
                v = values[i]
                parts.append(str(int(v)) if kinds[name] == "int" else repr(float(v)))
            fh.write(" ".join(parts) + "\n")
        if faces is not None:
            for f in faces:
                fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def read_ply_vertices(path):
    """Read the vertex element of an ASCII PLY file.

    Returns a dict mapping property names to arrays (list properties skipped).
    """
    with open(path, "r", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise InputError(f"{path}: not a PLY file")
    elements = []
    fmt = None
    body = None
    for lineno, line in enumerate(lines[1:], start=1):
        tokens = line.split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        if tokens[0] == "format":
            fmt = tokens[1]
        elif tokens[0] == "element":
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise InputError(f"{path}: property before element")
            if tokens[1] == "list":
                elements[-1][2].append((tokens[4], None))
            else:
                if tokens[1] not in _PLY_TYPES:
                    raise InputError(f"{path}: unknown property type {tokens[1]!r}")
                elements[-1][2].append((tokens[2], tokens[1]))
        elif tokens[0] == "end_header":
            body = lineno + 1
            break
    if body is None:
        raise InputError(f"{path}: missing end_header")
    if fmt != "ascii":
        raise InputError(f"{path}: only ASCII PLY is supported, got {fmt}")
    cursor = body
    for name, count, props in elements:
        rows = lines[cursor:cursor + count]
        if len(rows) < count:
            raise InputError(f"{path}: element {name!r} truncated")
        cursor += count
        if name != "vertex":
            continue
        if any(t is None for _, t in props):
            raise InputError(f"{path}: list properties on vertices are not supported")
        if count == 0:
            return {p: np.zeros(0) for p, _ in props}
        try:
            data = np.array([r.split()[:len(props)] for r in rows], dtype=np.float64)
        except ValueError as exc:
            raise InputError(f"{path}: malformed vertex row: {exc}") from exc
        if data.ndim != 2 or data.shape[1] != len(props):
            raise InputError(f"{path}: vertex rows do not match the header")
        return {p: data[:, j].astype(_PLY_TYPES[t]) for j, (p, t) in enumerate(props)}
    raise InputError(f"{path}: no vertex element")


def read_ply(path):
    """Read an ASCII PLY file as a :class:`PointCloud` (unknown properties ignored)."""
    props = read_ply_vertices(path)
    for axis in "xyz":
        if axis not in props:
            raise InputError(f"{path}: missing vertex property {axis!r}")
    xyz = np.stack([props[a].astype(np.float64) for a in "xyz"], axis=1)
    colors = None
    if all(c in props for c in ("red", "green", "blue")):
        colors = np.stack([props[c] for c in ("red", "green", "blue")], axis=1)
        colors = np.clip(colors, 0, 255).astype(np.uint8)
    return PointCloud.from_raw(xyz, colors)


def read_cloud(path):
    """Read a ``.pcd`` or ``.ply`` file by extension."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: no such file")
    suffix = path.suffix.lower()
    if suffix == ".pcd":
        return read_pcd(path)
    if suffix == ".ply":
        return read_ply(path)
    raise InputError(f"{path}: unsupported extension {suffix!r} (expected .pcd or .ply)")


def write_cloud(path, cloud):
    suffix = Path(path).suffix.lower()
    if suffix == ".pcd":
        write_pcd(path, cloud)
    elif suffix == ".ply":
        write_ply(path, cloud)
    else:
        raise InputError(f"{path}: unsupported extension {suffix!r}")


def write_ppm(path, image):
    """Write an (h, w, 3) uint8 raster as binary PPM (P6)."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) raster, got shape {image.shape}")
    h, w, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def _ppm_tokens(data):
    # header tokens with '#' comments stripped; returns tokens and body offset
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise InputError("truncated PPM header")
        tokens.append(data[start:pos].decode("ascii"))
    return tokens, pos + 1


def read_ppm(path):
    """Read a P6 (binary) or P3 (ASCII) PPM as an (h, w, 3) uint8 array."""
    data = Path(path).read_bytes()
    tokens, offset = _ppm_tokens(data)
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise InputError(f"{path}: only maxval 255 is supported")
    if magic == "P6":
        body = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=offset)
    elif magic == "P3":
        body = np.array(data[offset - 1:].split()[:w * h * 3], dtype=np.int64).astype(np.uint8)
    else:
        raise InputError(f"{path}: unsupported PPM magic {magic!r}")
    if body.size != w * h * 3:
        raise InputError(f"{path}: truncated PPM body")
    return body.reshape(h, w, 3).copy()


def read_image(path):
    """Read a PPM, or a PNG when Pillow is available."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: no such file")
    if path.suffix.lower() == ".png":
        try:
            from PIL import Image
        except ImportError as exc:
            raise InputError("reading PNG requires Pillow") from exc
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    return read_ppm(path)


def write_labels_csv(path, labels):
    """Labels sidecar: one ``index,label`` row per point."""
    with open(path, "w") as fh:
        fh.write("index,label\n")
        for i, lab in enumerate(np.asarray(labels)):
            fh.write(f"{i},{int(lab)}\n")


def read_labels_csv(path):
    rows = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    out = np.full(len(rows), -1, dtype=np.int64)
    out[rows[:, 0]] = rows[:, 1]
    return out


__all__ = [
    "pack_rgb", "unpack_rgb", "read_pcd", "write_pcd", "read_ply", "read_ply_vertices",
    "write_ply", "read_cloud", "write_cloud", "read_ppm", "write_ppm", "read_image",
    "write_labels_csv", "read_labels_csv",
]
