"""Clustered multipath channel generation and channel-set file I/O.

A user's downlink channel is a sum of ``num_paths`` planar-wavefront rays:

    H_k = sqrt(n_t * n_r / L) * sum_l  g_l * a_rx(angles_l) a_tx(angles_l)^H

with i.i.d. circularly-symmetric complex Gaussian ray gains (unit variance,
i.e. two independent N(0, 1/2) draws) and ray angles drawn uniformly on
[-pi/2, pi/2).  The scaling makes E[||H_k||_F^2] = n_t * n_r.

Geometry defaults to half-wavelength uniform linear arrays at both ends with
azimuth-only steering; a uniform planar option is provided for large square
transmit panels (e.g. 144 = 12 x 12 elements).

Reproducibility: each user's rays come from a counter-based Philox stream
keyed by ``(seed, user_index)``, so generation is deterministic, independent
of user ordering, and safe to parallelise across users.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ChannelFormatError, ConfigurationError

__all__ = [
    "ArrayGeometry",
    "SVChannelConfig",
    "ChannelSet",
    "steering_vector",
    "sv_channel_from_paths",
    "generate_sv_channels",
    "save_channels",
    "load_channels",
]

BINARY_ENCODING = "interleaved-f64-le"
INLINE_ENCODING = "json-inline"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna panel layout: uniform linear ("ula") or uniform planar ("upa").

    ``spacing`` is in carrier wavelengths.  For a planar panel ``rows`` must
    divide ``num_elements``; elements are indexed row-major.
    """

    num_elements: int
    spacing: float = 0.5
    kind: str = "ula"
    rows: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("ula", "upa"):
            raise ConfigurationError(f"unknown array kind {self.kind!r}")
        if self.num_elements < 1:
            raise ConfigurationError("array needs at least one element")
        if not (self.spacing > 0.0 and math.isfinite(self.spacing)):
            raise ConfigurationError("element spacing must be positive and finite")
        if self.kind == "upa":
            if self.rows < 1 or self.num_elements % self.rows != 0:
                raise ConfigurationError(
                    f"planar array rows={self.rows} must divide num_elements={self.num_elements}"
                )

    @classmethod
    def ula(cls, num_elements: int, spacing: float = 0.5) -> "ArrayGeometry":
        return cls(num_elements=num_elements, spacing=spacing, kind="ula")

    @classmethod
    def upa(cls, rows: int, cols: int, spacing: float = 0.5) -> "ArrayGeometry":
        return cls(num_elements=rows * cols, spacing=spacing, kind="upa", rows=rows)

    @property
    def cols(self) -> int:
        return self.num_elements // self.rows


def steering_vector(geometry: ArrayGeometry, azimuth: float, elevation: float = 0.0) -> np.ndarray:
    """Unit-norm array response for a planar wavefront from the given direction.

    Linear arrays steer in azimuth only (phase 2*pi*d*n*sin(az) at element n);
    planar arrays use sin(el) across rows and sin(az)*cos(el) across columns,
    which reduces to the linear response at zero elevation.  Every entry has
    magnitude 1/sqrt(num_elements), so the norm is exactly one.
    """
    two_pi_d = 2.0 * np.pi * geometry.spacing
    if geometry.kind == "ula":
        n = np.arange(geometry.num_elements)
        phase = two_pi_d * n * np.sin(azimuth)
    else:
        r = np.arange(geometry.rows)[:, None]
        c = np.arange(geometry.cols)[None, :]
        phase = two_pi_d * (r * np.sin(elevation) + c * np.sin(azimuth) * np.cos(elevation))
        phase = phase.ravel()
    return np.exp(1j * phase) / np.sqrt(geometry.num_elements)


@dataclass(frozen=True)
class SVChannelConfig:
    """Parameters for one batch of user channels.

    ``rng_seed`` must fit in an unsigned 64-bit integer; it keys the Philox
    streams together with the user index.
    """

    num_users: int
    n_t: int
    n_r: int
    num_paths: int
    rng_seed: int = 0
    tx_array: ArrayGeometry | None = None
    rx_array: ArrayGeometry | None = None

    def __post_init__(self) -> None:
        if self.num_users < 1:
            raise ConfigurationError("num_users must be >= 1")
        if self.n_t < 1 or self.n_r < 1:
            raise ConfigurationError("antenna counts must be >= 1")
        if self.num_paths < 1:
            raise ConfigurationError("num_paths must be >= 1")
        if not (0 <= self.rng_seed < 2**64):
            raise ConfigurationError("rng_seed must fit in an unsigned 64-bit integer")
        if self.tx_array is not None and self.tx_array.num_elements != self.n_t:
            raise ConfigurationError("tx_array element count disagrees with n_t")
        if self.rx_array is not None and self.rx_array.num_elements != self.n_r:
            raise ConfigurationError("rx_array element count disagrees with n_r")

    @property
    def tx_geometry(self) -> ArrayGeometry:
        return self.tx_array if self.tx_array is not None else ArrayGeometry.ula(self.n_t)

    @property
    def rx_geometry(self) -> ArrayGeometry:
        return self.rx_array if self.rx_array is not None else ArrayGeometry.ula(self.n_r)

    def fingerprint(self) -> str:
        """Short stable hash of the generating parameters (seed included)."""
        payload = {
            "num_users": self.num_users,
            "n_t": self.n_t,
            "n_r": self.n_r,
            "num_paths": self.num_paths,
            "rng_seed": self.rng_seed,
            "tx": _geometry_dict(self.tx_geometry),
            "rx": _geometry_dict(self.rx_geometry),
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=8).hexdigest()


def _geometry_dict(g: ArrayGeometry) -> dict:
    return {"kind": g.kind, "num_elements": g.num_elements, "spacing": g.spacing, "rows": g.rows}


@dataclass(frozen=True)
class ChannelSet:
    """Per-user channel matrices (each n_r x n_t) plus provenance.

    ``seed`` is None for sets imported from files rather than generated here.
    """

    matrices: tuple[np.ndarray, ...]
    config_fingerprint: str
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.matrices:
            raise ConfigurationError("a channel set needs at least one user")
        shape = self.matrices[0].shape
        for k, h in enumerate(self.matrices):
            if h.ndim != 2 or h.shape != shape:
                raise ConfigurationError(f"user {k} matrix shape {h.shape} != {shape}")
            if not np.all(np.isfinite(h.view(np.float64))):
                raise ChannelFormatError(f"user {k} matrix contains non-finite entries")

    @property
    def num_users(self) -> int:
        return len(self.matrices)

    @property
    def n_r(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def n_t(self) -> int:
        return self.matrices[0].shape[1]


def sv_channel_from_paths(
    gains: np.ndarray,
    rx_azimuth: np.ndarray,
    rx_elevation: np.ndarray,
    tx_azimuth: np.ndarray,
    tx_elevation: np.ndarray,
    rx_array: ArrayGeometry,
    tx_array: ArrayGeometry,
) -> np.ndarray:
    """Assemble one channel matrix from explicit per-ray parameters.

    All five parameter arrays share length L (the ray count).  Exposed
    separately from the random generator so tests can pin gains and angles.
    """
    gains = np.asarray(gains, dtype=np.complex128)
    L = gains.shape[0]
    a_rx = np.stack([steering_vector(rx_array, a, e) for a, e in zip(rx_azimuth, rx_elevation)], axis=1)
    a_tx = np.stack([steering_vector(tx_array, a, e) for a, e in zip(tx_azimuth, tx_elevation)], axis=1)
    scale = np.sqrt(tx_array.num_elements * rx_array.num_elements / L)
    return scale * ((a_rx * gains) @ a_tx.conj().T)


def _user_rng(seed: int, user: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, user], dtype=np.uint64)))


def generate_sv_channels(cfg: SVChannelConfig) -> ChannelSet:
    """Draw every user's channel from its own (seed, user) Philox stream.

    Draw order per user is fixed: rx azimuths, rx elevations, tx azimuths,
    tx elevations, then real and imaginary gain parts.
    """
    mats = []
    for k in range(cfg.num_users):
        rng = _user_rng(cfg.rng_seed, k)
        L = cfg.num_paths
        rx_az = rng.uniform(-np.pi / 2, np.pi / 2, L)
        rx_el = rng.uniform(-np.pi / 2, np.pi / 2, L)
        tx_az = rng.uniform(-np.pi / 2, np.pi / 2, L)
        tx_el = rng.uniform(-np.pi / 2, np.pi / 2, L)
        re = rng.normal(0.0, np.sqrt(0.5), L)
        im = rng.normal(0.0, np.sqrt(0.5), L)
        h = sv_channel_from_paths(re + 1j * im, rx_az, rx_el, tx_az, tx_el,
                                  cfg.rx_geometry, cfg.tx_geometry)
        mats.append(h)
    return ChannelSet(matrices=tuple(mats), config_fingerprint=cfg.fingerprint(), seed=cfg.rng_seed)


# ---------------------------------------------------------------------------
# file format
#
# A channel set on disk is a small JSON manifest plus (for the binary
# encoding) a sidecar of raw little-endian float64 pairs, row-major,
# user-after-user.  complex128 byte layout already interleaves (re, im), so
# the sidecar is just the stacked array's buffer.


def save_channels(channels: ChannelSet, manifest_path: str | Path,
                  encoding: str = BINARY_ENCODING) -> Path:
    """Write a manifest (and data sidecar for the binary encoding).

    Returns the manifest path.  The sidecar shares the manifest's stem with a
    ``.f64`` suffix and is referenced relatively, so the pair can be moved
    together.
    """
    manifest_path = Path(manifest_path)
    manifest: dict = {
        "format_version": FORMAT_VERSION,
        "num_users": channels.num_users,
        "n_r": channels.n_r,
        "n_t": channels.n_t,
        "encoding": encoding,
        "config_fingerprint": channels.config_fingerprint,
    }
    if channels.seed is not None:
        manifest["seed"] = channels.seed

    if encoding == BINARY_ENCODING:
        data_name = manifest_path.stem + ".f64"
        stacked = np.stack(channels.matrices).astype("<c16")
        (manifest_path.parent / data_name).write_bytes(stacked.tobytes(order="C"))
        manifest["data_file"] = data_name
    elif encoding == INLINE_ENCODING:
        manifest["matrices"] = [
            [[[float(z.real), float(z.imag)] for z in row] for row in h]
            for h in channels.matrices
        ]
    else:
        raise ConfigurationError(f"unknown channel encoding {encoding!r}")

    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n")
    return manifest_path


def load_channels(manifest_path: str | Path) -> ChannelSet:
    """Read a manifest written by :func:`save_channels`.

    Round-trips every complex entry exactly for both encodings.  Validation
    failures raise :class:`ChannelFormatError` naming the offending record.
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ChannelFormatError(f"cannot read channel manifest {manifest_path}: {exc}") from exc

    for key in ("format_version", "num_users", "n_r", "n_t", "encoding"):
        if key not in manifest:
            raise ChannelFormatError(f"manifest {manifest_path} missing key {key!r}")
    if manifest["format_version"] != FORMAT_VERSION:
        raise ChannelFormatError(f"unsupported format_version {manifest['format_version']!r}")
    num_users, n_r, n_t = (int(manifest[k]) for k in ("num_users", "n_r", "n_t"))
    if num_users < 1 or n_r < 1 or n_t < 1:
        raise ChannelFormatError("manifest dimensions must be positive")

    encoding = manifest["encoding"]
    if encoding == BINARY_ENCODING:
        if "data_file" not in manifest:
            raise ChannelFormatError("binary manifest missing 'data_file'")
        data_path = manifest_path.parent / manifest["data_file"]
        try:
            raw = data_path.read_bytes()
        except OSError as exc:
            raise ChannelFormatError(f"cannot read channel data {data_path}: {exc}") from exc
        expected = num_users * n_r * n_t * 16
        if len(raw) != expected:
            raise ChannelFormatError(
                f"{data_path} holds {len(raw)} bytes, expected {expected} "
                f"for {num_users} users of {n_r}x{n_t}"
            )
        stacked = np.frombuffer(raw, dtype="<c16").reshape(num_users, n_r, n_t)
        mats = tuple(np.array(stacked[k]) for k in range(num_users))
    elif encoding == INLINE_ENCODING:
        entries = manifest.get("matrices")
        if not isinstance(entries, list) or len(entries) != num_users:
            raise ChannelFormatError("inline manifest 'matrices' must list one matrix per user")
        mats = []
        for k, rows in enumerate(entries):
            arr = np.asarray(rows, dtype=np.float64)
            if arr.shape != (n_r, n_t, 2):
                raise ChannelFormatError(f"user {k} inline matrix has shape {arr.shape}, "
                                         f"expected ({n_r}, {n_t}, 2)")
            mats.append(arr[..., 0] + 1j * arr[..., 1])
        mats = tuple(mats)
    else:
        raise ChannelFormatError(f"unknown channel encoding {encoding!r}")

    for k, h in enumerate(mats):
        if not np.all(np.isfinite(h.view(np.float64))):
            raise ChannelFormatError(f"user {k} matrix contains non-finite entries")

    fingerprint = manifest.get("config_fingerprint")
    if fingerprint is None:
        fingerprint = hashlib.blake2b(
            np.stack(mats).astype("<c16").tobytes(), digest_size=8
        ).hexdigest()
    return ChannelSet(matrices=mats, config_fingerprint=fingerprint, seed=manifest.get("seed"))
