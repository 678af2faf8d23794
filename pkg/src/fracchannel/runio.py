"""Run directory layout: CSV series, JSON manifests, binary snapshots.

Series go to CSV with full-precision repr formatting so a replay of the
same config and seed reproduces every file byte for byte. Snapshots go
to a small self-describing binary container because spectral
coefficients round-trip poorly through text. The manifest records the
config, its hash, the seed derivation scheme, versions, and wall-clock,
which is everything needed to re-execute the run.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .config import RunConfig, canonical_json, config_hash
from .errors import ValidationError
from .fbm import CylindricalBoundaryNoise, NoiseCoefficients
from .grid import ChannelGrid

__all__ = [
    "format_float",
    "write_csv",
    "read_csv_columns",
    "write_manifest",
    "read_manifest",
    "write_noise_csv",
    "read_noise_csv",
    "write_snapshots",
    "read_snapshots",
    "write_json",
]

_MAGIC = b"FCHSNAP1"


def format_float(x) -> str:
    """Shortest decimal string that round-trips the float exactly."""
    return repr(float(x))


def write_csv(path, header, columns) -> None:
    """Write named columns of equal length; floats via format_float."""
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ValidationError("header and column counts differ")
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValidationError("columns must share one length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(n):
            writer.writerow([format_float(c[i]) for c in cols])


def read_csv_columns(path) -> dict:
    """Read a CSV written by write_csv back into float arrays by name."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"empty CSV: {path}")
    header, data = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        out[name] = np.array([float(row[j]) for row in data])
    return out


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(out_dir, cfg: RunConfig, pipeline: str, seed: int,
                   outputs, wall_clock: float, version: str,
                   extra: dict | None = None) -> None:
    """Record everything needed to re-execute the run."""
    manifest = {
        "pipeline": pipeline,
        "config": json.loads(canonical_json(cfg)),
        "config_sha256": config_hash(cfg),
        "code_version": version,
        "master_seed": seed,
        "seed_scheme": ("counter-based: SeedSequence(master_seed, "
                        "spawn_key=(tag, replica, mode, part[, level]))"),
        "wall_clock_seconds": wall_clock,
        "outputs": sorted(outputs),
    }
    if extra:
        manifest.update(extra)
    write_json(Path(out_dir) / "manifest.json", manifest)


def read_manifest(run_dir) -> dict:
    path = Path(run_dir) / "manifest.json"
    if not path.is_file():
        raise ValidationError(f"no manifest.json in {run_dir}")
    with open(path) as fh:
        return json.load(fh)


def write_noise_csv(path, noise: CylindricalBoundaryNoise) -> None:
    """Boundary modal paths: time, mode0, then re/im pairs per mode."""
    header = ["time", "mode0"]
    cols = [noise.times, noise.modal_paths[0].real]
    for n in range(1, noise.modal_paths.shape[0]):
        header += [f"mode{n}_re", f"mode{n}_im"]
        cols += [noise.modal_paths[n].real, noise.modal_paths[n].imag]
    write_csv(path, header, cols)


def read_noise_csv(path, coeffs: NoiseCoefficients, hurst: float,
                   seed_info: dict | None = None) -> CylindricalBoundaryNoise:
    """Rebuild the sampled noise object from its CSV serialization."""
    cols = read_csv_columns(path)
    times = cols["time"]
    n_max = coeffs.n_max
    paths = np.zeros((n_max + 1, len(times)), dtype=complex)
    paths[0] = cols["mode0"]
    for n in range(1, n_max + 1):
        try:
            paths[n] = cols[f"mode{n}_re"] + 1j * cols[f"mode{n}_im"]
        except KeyError as exc:
            raise ValidationError(
                f"noise CSV lacks columns for mode {n}"
            ) from exc
    return CylindricalBoundaryNoise(
        coeffs=coeffs,
        hurst=hurst,
        horizon=float(times[-1]),
        times=times,
        modal_paths=paths,
        seed_info=dict(seed_info or {}),
    )


def write_snapshots(path, grid: ChannelGrid, times: np.ndarray,
                    snapshots: np.ndarray) -> None:
    """Self-describing binary container for spectral snapshots.

    Layout: magic, three int64 (n_times, n_x, n_z), one float64 (height),
    the time grid as float64, then the C-order complex128 coefficient
    block of shape (n_times, n_modes, n_z, 2).
    """
    snapshots = np.ascontiguousarray(snapshots, dtype=np.complex128)
    n_times = len(times)
    expected = (n_times, grid.n_modes, grid.n_z, 2)
    if snapshots.shape != expected:
        raise ValidationError(
            f"snapshot block has shape {snapshots.shape}, expected {expected}"
        )
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<qqq", n_times, grid.n_x, grid.n_z))
        fh.write(struct.pack("<d", grid.height))
        fh.write(np.asarray(times, dtype=np.float64).tobytes())
        fh.write(snapshots.tobytes())


def read_snapshots(path):
    """Read a snapshot container; returns (grid, times, snapshots)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(_MAGIC)] != _MAGIC:
        raise ValidationError(f"not a snapshot container: {path}")
    off = len(_MAGIC)
    n_times, n_x, n_z = struct.unpack_from("<qqq", blob, off)
    off += 24
    (height,) = struct.unpack_from("<d", blob, off)
    off += 8
    times = np.frombuffer(blob, dtype=np.float64, count=n_times, offset=off)
    off += 8 * n_times
    grid = ChannelGrid(int(n_x), int(n_z), float(height))
    count = n_times * grid.n_modes * n_z * 2
    flat = np.frombuffer(blob, dtype=np.complex128, count=count, offset=off)
    if flat.size != count:
        raise ValidationError(f"snapshot container truncated: {path}")
    snaps = flat.reshape(n_times, grid.n_modes, n_z, 2).copy()
    return grid, times.copy(), snaps
