"""Minimal PNG and PGM codecs.

Supports what the toolkit actually reads and writes: non-interlaced PNG
with 8/16-bit grayscale or 8/16-bit RGB(A) samples, and binary PGM (P5).
Palette and interlaced PNGs are rejected. Writing always uses filter type
0 so identical pixel data produces identical bytes.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import IoFailure

_PNG_SIG = b"\x89PNG\r\n\x1a\n"

# PNG color types -> channel count
_CHANNELS = {0: 1, 2: 3, 4: 2, 6: 4}


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def write_png(path, array: np.ndarray) -> None:
    """Write a uint8/uint16 array as PNG.

    Shape (h, w) writes grayscale, (h, w, 3) writes RGB.
    """
    a = np.asarray(array)
    if a.dtype == np.uint8:
        depth = 8
    elif a.dtype == np.uint16:
        depth = 16
    else:
        raise IoFailure(path, f"unsupported dtype {a.dtype} for PNG output")
    if a.ndim == 2:
        color = 0
    elif a.ndim == 3 and a.shape[2] == 3:
        color = 2
    else:
        raise IoFailure(path, f"unsupported shape {a.shape} for PNG output")

    h, w = a.shape[:2]
    if depth == 16:
        raw = a.astype(">u2").tobytes()
    else:
        raw = a.tobytes()
    stride = w * (depth // 8) * (3 if color == 2 else 1)
    lines = bytearray()
    for row in range(h):
        lines.append(0)  # filter type 0
        lines += raw[row * stride : (row + 1) * stride]

    ihdr = struct.pack(">IIBBBBB", w, h, depth, color, 0, 0, 0)
    data = (
        _PNG_SIG
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(bytes(lines), 9))
        + _chunk(b"IEND", b"")
    )
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoFailure(path, str(exc)) from exc


def _unfilter(filtered: bytes, h: int, stride: int, bpp: int) -> bytearray:
    out = bytearray(h * stride)
    pos = 0
    prev_start = -1
    for row in range(h):
        ftype = filtered[pos]
        pos += 1
        cur = pos
        row_start = row * stride
        line = filtered[cur : cur + stride]
        pos += stride
        if ftype == 0:
            out[row_start : row_start + stride] = line
        elif ftype == 1:  # Sub
            for i in range(stride):
                left = out[row_start + i - bpp] if i >= bpp else 0
                out[row_start + i] = (line[i] + left) & 0xFF
        elif ftype == 2:  # Up
            for i in range(stride):
                up = out[prev_start + i] if prev_start >= 0 else 0
                out[row_start + i] = (line[i] + up) & 0xFF
        elif ftype == 3:  # Average
            for i in range(stride):
                left = out[row_start + i - bpp] if i >= bpp else 0
                up = out[prev_start + i] if prev_start >= 0 else 0
                out[row_start + i] = (line[i] + ((left + up) >> 1)) & 0xFF
        elif ftype == 4:  # Paeth
            for i in range(stride):
                left = out[row_start + i - bpp] if i >= bpp else 0
                up = out[prev_start + i] if prev_start >= 0 else 0
                ul = out[prev_start + i - bpp] if (prev_start >= 0 and i >= bpp) else 0
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                if pa <= pb and pa <= pc:
                    pred = left
                elif pb <= pc:
                    pred = up
                else:
                    pred = ul
                out[row_start + i] = (line[i] + pred) & 0xFF
        else:
            raise ValueError(f"unknown PNG filter type {ftype}")
        prev_start = row_start
    return out


def read_png(path) -> tuple[np.ndarray, int]:
    """Read a PNG file.

    Returns (array, bitdepth) with array shaped (h, w) or (h, w, channels),
    dtype uint8 or uint16. Alpha channels are preserved if present.
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(path, str(exc)) from exc
    if blob[:8] != _PNG_SIG:
        raise IoFailure(path, "not a PNG file")

    pos = 8
    width = height = depth = color = interlace = None
    idat = bytearray()
    while pos < len(blob):
        (length,) = struct.unpack(">I", blob[pos : pos + 4])
        tag = blob[pos + 4 : pos + 8]
        payload = blob[pos + 8 : pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            width, height, depth, color, _, _, interlace = struct.unpack(
                ">IIBBBBB", payload
            )
        elif tag == b"IDAT":
            idat += payload
        elif tag == b"IEND":
            break
    if width is None:
        raise IoFailure(path, "missing IHDR chunk")
    if interlace != 0:
        raise IoFailure(path, "interlaced PNG not supported")
    if color not in _CHANNELS:
        raise IoFailure(path, f"unsupported PNG color type {color}")
    if depth not in (8, 16):
        raise IoFailure(path, f"unsupported PNG bit depth {depth}")

    channels = _CHANNELS[color]
    bpp = channels * depth // 8
    stride = width * bpp
    raw = _unfilter(zlib.decompress(bytes(idat)), height, stride, bpp)
    if depth == 16:
        arr = np.frombuffer(bytes(raw), dtype=">u2").astype(np.uint16)
    else:
        arr = np.frombuffer(bytes(raw), dtype=np.uint8)
    arr = arr.reshape((height, width, channels)) if channels > 1 else arr.reshape(
        (height, width)
    )
    return arr, depth


def write_pgm(path, array: np.ndarray) -> None:
    """Write a uint8/uint16 array as binary PGM (P5)."""
    a = np.asarray(array)
    if a.ndim != 2 or a.dtype not in (np.uint8, np.uint16):
        raise IoFailure(path, "PGM output requires a 2-D uint8/uint16 array")
    maxval = 255 if a.dtype == np.uint8 else 65535
    header = f"P5\n{a.shape[1]} {a.shape[0]}\n{maxval}\n".encode("ascii")
    body = a.tobytes() if a.dtype == np.uint8 else a.astype(">u2").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header + body)
    except OSError as exc:
        raise IoFailure(path, str(exc)) from exc


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Read a binary PGM (P5) file. Returns (array, bitdepth)."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(path, str(exc)) from exc
    if not blob.startswith(b"P5"):
        raise IoFailure(path, "not a binary PGM (P5) file")

    # Header = magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed between them.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        tokens.append(blob[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval < 256:
        arr = np.frombuffer(blob, dtype=np.uint8, count=width * height, offset=pos)
        depth = 8
    else:
        arr = np.frombuffer(
            blob, dtype=">u2", count=width * height, offset=pos
        ).astype(np.uint16)
        depth = 16
    return arr.reshape((height, width)).copy(), depth
