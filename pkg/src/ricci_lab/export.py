"""Reading and writing run artifacts.

A trajectory directory holds ``manifest.yaml`` (run metadata, config echo,
format version and the list of snapshot files) and ``snapshots/``, one
profile file per stored snapshot in the same format ``read_profile``
accepts. Tables are CSV whose header labels carry units, e.g.
``t [time]``; floats are written with 17 significant digits so identical
runs give identical files.
"""

import logging
import math
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError

from ricci_lab.config import FlowConfig, RunConfig
from ricci_lab.constants.ledger import ConstantLedger
from ricci_lab.defaults import FORMAT_VERSION, SNAPSHOT_SPHERE_INTERVALS
from ricci_lab.errors import ConfigError, InvalidProfileError
from ricci_lab.flow import assemble_trajectory
from ricci_lab.geometry import axial_profile, diameter, make_warped, total_volume
from ricci_lab.models import FlowTrajectory, MetricState, RoundSphere, Warped
from ricci_lab.norms import ExtensionVerdict, ScanResult

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.yaml"
SNAPSHOT_DIR = "snapshots"
NORMS_NAME = "norms.csv"
FLOAT_FORMAT = "%.17g"
PROFILE_COLUMNS = "x psi phi"

PathLike = Union[str, Path]

# Unit labels for table columns; curvature scales like 1/length^2 and time like length^2
COLUMN_UNITS: Dict[str, str] = {
    "t": "time",
    "eps": "time",
    "t_a": "time",
    "t_b": "time",
    "alpha": "1",
    "exponent": "1",
    "classification": "label",
    "quantity": "label",
    "partial_norm": "length^((n+2)/alpha-2)",
    "last_partial_norm": "length^((n+2)/alpha-2)",
    "value": "length^((n+2)/alpha-2)",
    "center": "node",
    "radius": "length",
    "R_min": "1/length^2",
    "R_max": "1/length^2",
    "Rm_max": "1/length^2",
    "volume": "length^n",
    "diameter": "length",
    "R_max_diameter2": "1",
}

_UNIT_SUFFIX = re.compile(r"\s*\[[^\]]*\]$")


def column_unit(name: str) -> str:
    """Unit label of a table column; ``sup_<quantity>`` columns are curvatures."""
    if name.startswith("sup_"):
        return "1/length^2"
    return COLUMN_UNITS.get(name, "1")


def write_table(df: pd.DataFrame, path: PathLike) -> Path:
    """Write ``df`` as CSV with a 'name [unit]' header row and no index."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = [f"{name} [{column_unit(str(name))}]" for name in df.columns]
    df.to_csv(path, index=False, header=header, float_format=FLOAT_FORMAT)
    return path


def read_table(path: PathLike) -> pd.DataFrame:
    """Read a table written by ``write_table``, dropping the unit labels from the header."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"table {path} not found")
    df = pd.read_csv(path)
    return df.rename(columns=lambda name: _UNIT_SUFFIX.sub("", str(name)))


def _dump_yaml(data: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)
    return path


def _load_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"{path} not found")
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping at the top level")
    return data


def _yaml_float(value: Optional[float]) -> Optional[float]:
    """Floats for safe_dump; inf and nan survive as YAML .inf / .nan."""
    return None if value is None else float(value)


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


def _save_profile(path: Path, form: Warped, header: Dict[str, str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key} = {value}" for key, value in header.items()] + [PROFILE_COLUMNS]
    np.savetxt(
        path,
        np.column_stack([form.x, form.psi, form.phi]),
        fmt=FLOAT_FORMAT,
        header="\n".join(lines),
    )
    return path


def write_profile(state: MetricState, path: PathLike) -> Path:
    """Write a warped state as columns x, psi, phi under a '# n = <n>' comment."""
    form = state.form
    if not isinstance(form, Warped):
        raise InvalidProfileError("only warped states can be written as profiles")
    return _save_profile(Path(path), form, {"n": str(state.n)})


def _header_fields(path: Path) -> Dict[str, str]:
    """Leading '# key = value' comment lines of a profile file."""
    fields: Dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, sep, value = line.lstrip("#").partition("=")
            if sep and value.strip():
                fields[key.strip()] = value.strip()
    return fields


def _profile_columns(
    path: Path,
) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray], Dict[str, str]]:
    """Load (x, psi, phi or None, header) and check the grid."""
    if not path.exists():
        raise InvalidProfileError(f"profile file not found: {path}")
    try:
        data = np.loadtxt(path, comments="#", ndmin=2)
        header = _header_fields(path)
    except ValueError as e:
        raise InvalidProfileError(f"cannot parse profile {path}: {e}") from e
    if data.shape[1] not in (2, 3):
        raise InvalidProfileError(f"{path} must have 2 or 3 columns, found {data.shape[1]}")
    x = data[:, 0]
    m = len(x) - 1
    if m < 1 or not np.allclose(x, np.linspace(0.0, math.pi, m + 1), rtol=0.0, atol=1e-9):
        raise InvalidProfileError(f"{path}: x must be the uniform grid of [0, pi]")
    phi = data[:, 2] if data.shape[1] == 3 else None
    return x, data[:, 1], phi, header


def read_profile(path: PathLike, n: Optional[int] = None) -> MetricState:
    """Read a warped profile file.

    Columns are ``x psi phi`` or ``x psi`` (phi = 1); x must be the uniform
    grid of [0, pi]. ``n`` overrides the '# n = ...' header, and a
    '# t = ...' header line sets the time of the state.

    Raises:
        InvalidProfileError: If the file is missing, malformed or violates the profile invariants.
    """
    path = Path(path)
    _, psi, phi, header = _profile_columns(path)
    try:
        dimension = n if n is not None else int(header["n"])
        t = float(header.get("t", 0.0))
    except KeyError:
        raise InvalidProfileError(
            f"{path} has no '# n = ...' header and no dimension was given"
        ) from None
    except ValueError as e:
        raise InvalidProfileError(f"{path}: bad header value: {e}") from e
    return make_warped(dimension, psi, phi, t=t)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


def snapshot_name(index: int) -> str:
    return f"{SNAPSHOT_DIR}/snapshot_{index:05d}.txt"


def _write_snapshot(state: MetricState, path: Path) -> Path:
    header = {"n": str(state.n), "t": FLOAT_FORMAT % state.t}
    if isinstance(state.form, RoundSphere):
        header["c"] = FLOAT_FORMAT % state.form.c
    form = axial_profile(state, SNAPSHOT_SPHERE_INTERVALS)
    return _save_profile(path, form, header)


def manifest_data(traj: FlowTrajectory, run_config: Optional[RunConfig] = None) -> Dict[str, Any]:
    config = traj.config or FlowConfig()
    return {
        "format_version": FORMAT_VERSION,
        "n": traj.n,
        "kind": traj.states[0].kind,
        "snapshots": len(traj),
        "snapshot_dir": SNAPSHOT_DIR,
        "snapshot_files": [snapshot_name(i) for i in range(len(traj))],
        "times": [float(t) for t in traj.times],
        "t_start": float(traj.t_start),
        "t_last": float(traj.t_last),
        "T_hat": _yaml_float(traj.T_hat),
        "singular": bool(traj.singular),
        "termination": traj.termination,
        "max_curvature_track": [
            {"time": float(m.time), "node": int(m.node), "value": float(m.value)}
            for m in traj.max_curvature_track
        ],
        "flow_config": config.model_dump(mode="json"),
        "run_config": run_config.model_dump(mode="json") if run_config is not None else None,
    }


def write_trajectory(
    traj: FlowTrajectory, out_dir: PathLike, run_config: Optional[RunConfig] = None
) -> Path:
    """Write the manifest and one profile file per snapshot of ``traj`` into ``out_dir``.

    Round-sphere snapshots are sampled on the axis and carry their exact
    scale in a '# c = ...' header line.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for index, state in enumerate(traj.states):
        _write_snapshot(state, out / snapshot_name(index))
    _dump_yaml(manifest_data(traj, run_config), out / MANIFEST_NAME)
    logger.info("wrote %d snapshots to %s", len(traj), out)
    return out


def _read_snapshot(path: Path, n: int, kind: str) -> MetricState:
    x, psi, phi, header = _profile_columns(path)
    t = float(header["t"])
    if kind == "sphere":
        return MetricState(n=n, t=t, form=RoundSphere(c=float(header["c"])))
    if phi is None:
        phi = np.ones_like(psi)
    return MetricState(n=n, t=t, form=Warped(x=x, phi=phi, psi=psi))


def read_trajectory(in_dir: PathLike) -> FlowTrajectory:
    """Load a trajectory directory written by ``write_trajectory``.

    Raises:
        ConfigError: If the manifest or a listed snapshot file is missing or malformed.
    """
    directory = Path(in_dir)
    manifest = _load_yaml(directory / MANIFEST_NAME)
    try:
        n = int(manifest["n"])
        kind = str(manifest["kind"])
        files = [directory / name for name in manifest["snapshot_files"]]
        config = FlowConfig(**manifest["flow_config"]) if manifest.get("flow_config") else None
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise ConfigError(f"malformed trajectory in {directory}: {e}") from e
    missing = [str(path) for path in files if not path.exists()]
    if missing:
        raise ConfigError(f"snapshot file {missing[0]} is missing")
    try:
        states = [_read_snapshot(path, n, kind) for path in files]
    except (KeyError, ValueError, InvalidProfileError) as e:
        raise ConfigError(f"malformed trajectory in {directory}: {e}") from e
    if not states or len(states) != manifest.get("snapshots", len(states)):
        raise ConfigError(
            f"{directory}: manifest lists {manifest.get('snapshots')} snapshots, found {len(states)}"
        )
    T_hat = manifest.get("T_hat")
    return assemble_trajectory(
        states,
        singular=bool(manifest.get("singular", False)),
        T_hat=None if T_hat is None else float(T_hat),
        termination=str(manifest.get("termination", "completed")),
        config=config,
    )


# ---------------------------------------------------------------------------
# Tables and reports
# ---------------------------------------------------------------------------


def scan_table(results: Sequence[ScanResult]) -> pd.DataFrame:
    """One row per (alpha, eps) with the classification of each alpha."""
    rows = []
    for result in results:
        for eps, value in zip(result.eps, result.partial_norms):
            rows.append(
                {
                    "alpha": result.alpha,
                    "eps": eps,
                    "partial_norm": value,
                    "exponent": result.exponent,
                    "classification": result.classification,
                }
            )
    columns = ["alpha", "eps", "partial_norm", "exponent", "classification"]
    return pd.DataFrame(rows, columns=columns)


def classification_table(results: Sequence[ScanResult]) -> pd.DataFrame:
    """One row per alpha: fitted exponent, classification and last partial norm."""
    columns = ["alpha", "exponent", "classification", "last_partial_norm"]
    return pd.DataFrame(
        [
            {
                "alpha": r.alpha,
                "exponent": r.exponent,
                "classification": r.classification,
                "last_partial_norm": r.partial_norms[-1] if len(r.partial_norms) else math.nan,
            }
            for r in results
        ],
        columns=columns,
    )


def sup_track_table(traj: FlowTrajectory, sups: Sequence[float], quantity: str) -> pd.DataFrame:
    return pd.DataFrame({"t": traj.times, f"sup_{quantity}": np.asarray(sups, dtype=float)})


def trajectory_summary(traj: FlowTrajectory) -> pd.DataFrame:
    """Per-snapshot t, min/max R, max |Rm|, volume, diameter and max R * diameter^2."""
    rows = []
    for state, curv in zip(traj.states, traj.curvatures):
        d = diameter(state)
        r_max = float(np.max(curv.R))
        rows.append(
            {
                "t": state.t,
                "R_min": float(np.min(curv.R)),
                "R_max": r_max,
                "Rm_max": float(np.max(curv.rm_norm)),
                "volume": total_volume(state),
                "diameter": d,
                "R_max_diameter2": r_max * d * d,
            }
        )
    return pd.DataFrame(rows)


def verdict_data(verdict: ExtensionVerdict) -> Dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "A": _yaml_float(verdict.A),
        "alpha": _yaml_float(verdict.alpha),
        "norm": {
            "kind": verdict.norm_status.kind,
            "value": _yaml_float(verdict.norm_status.value),
            "classification": verdict.norm_status.classification,
        },
        "rm_norm": {
            "kind": verdict.rm_norm_status.kind,
            "value": _yaml_float(verdict.rm_norm_status.value),
            "classification": verdict.rm_norm_status.classification,
        },
        "ricci_lower_bound_hypotheses_met": bool(verdict.theorem1_hypotheses_met),
        "curvature_norm_hypotheses_met": bool(verdict.theorem2_hypotheses_met),
        "conclusion": verdict.conclusion,
        "failures": {key: list(value) for key, value in verdict.failures.items()},
        "consistent": bool(verdict.consistent),
    }


def write_verdict(verdict: ExtensionVerdict, path: PathLike) -> Path:
    return _dump_yaml(verdict_data(verdict), Path(path))


def write_ledger(ledger: ConstantLedger, path: PathLike) -> Path:
    """Write the constant ledger as YAML."""
    return _dump_yaml(ledger.to_dict(), Path(path))


def read_ledger(path: PathLike) -> Dict[str, Any]:
    """Load a ledger report; entries are returned keyed by name."""
    data = _load_yaml(Path(path))
    try:
        entries = {entry["name"]: entry for entry in data["entries"]}
    except (KeyError, TypeError) as e:
        raise ConfigError(f"malformed ledger report {path}: {e}") from e
    return {**data, "entries": entries}

