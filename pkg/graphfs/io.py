"""The input / output functions related to file system."""
import json
import typing as tp
from pathlib import Path

import numpy as np
import pandas as pd
from numpy import ndarray

from graphfs.datasets import Dataset
from graphfs.errors import ParseError

__all__ = [
    "SCHEMA_VERSION",
    "load_csv",
    "write_csv",
    "write_json",
    "load_json",
    "write_dataset",
    "write_edge_list",
    "load_edge_list",
    "sidecar_path"
]

SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.17g"


def sidecar_path(path: tp.Union[str, Path]) -> Path:
    """The path of the JSON file written next to a data file."""
    path = Path(path)
    return path.with_suffix(".json")


def _label_position(label_column: tp.Union[int, str], header: tp.Optional[tp.List[str]], ncol: int) -> int:
    if isinstance(label_column, str):
        if header is None or label_column not in header:
            raise ParseError("Label column '{}' is not in the header.".format(label_column))
        return header.index(label_column)
    pos = int(label_column)
    if pos < 0:
        pos += ncol
    if not 0 <= pos < ncol:
        raise ParseError("Label column {} is out of range for {} columns.".format(label_column, ncol))
    return pos


def load_csv(
    path: tp.Union[str, Path], has_header: bool = False, label_column: tp.Union[int, str] = None
) -> Dataset:
    """Load a numeric comma separated file into a dataset.

    Parameters
    ----------
    path : str or Path
        The path to the UTF-8 file.

    has_header : bool
        If True, the first line holds the column names.

    label_column : int or str
        The position (negative counts from the end) or the name of the column of integer labels. If None, the
        dataset has no labels.

    Returns
    -------
    dataset : Dataset
        The data. The rows and the columns in the parse errors are counted from 0 on the data lines, the
        header and the blank lines excluded. The line of a parse error is the line number in the file, from 1.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        line = Path(path).read_bytes()[:e.start].count(b"\n") + 1
        raise ParseError("The file is not valid UTF-8.", line=line) from e
    numbered = [(number, line) for number, line in enumerate(text.splitlines(), start=1) if line.strip()]
    lines = [line for _, line in numbered]
    numbers = [number for number, _ in numbered]
    header = None
    if has_header:
        if not lines:
            raise ParseError("The file has no header.")
        header = [name.strip() for name in lines[0].split(",")]
        lines, numbers = lines[1:], numbers[1:]
    if not lines:
        raise ParseError("The file has no data row.")
    cells = [line.split(",") for line in lines]
    ncol = len(header) if header is not None else len(cells[0])
    for i, row in enumerate(cells):
        if len(row) != ncol:
            raise ParseError("Expect {} fields, got {}.".format(ncol, len(row)), row=i, line=numbers[i])
    raw = pd.DataFrame(cells)
    values = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=np.float64))
    if bad.any():
        i, j = (int(v) for v in np.argwhere(bad)[0])
        raise ParseError(
            "Cannot read '{}' as a finite number.".format(cells[i][j].strip()), row=i, col=j, line=numbers[i]
        )
    data = values.to_numpy(dtype=np.float64)
    names = header if header is not None else ["f{}".format(j) for j in range(ncol)]
    labels = None
    if label_column is not None:
        pos = _label_position(label_column, header, ncol)
        col = data[:, pos]
        not_int = np.flatnonzero(col != np.round(col))
        if not_int.size > 0:
            i = int(not_int[0])
            raise ParseError("Labels must be integers, got {}.".format(col[i]), row=i, col=pos, line=numbers[i])
        labels = col.astype(np.int64)
        data = np.delete(data, pos, axis=1)
        names = [name for j, name in enumerate(names) if j != pos]
    return Dataset(data, labels=labels, feature_names=names, meta={"path": str(path)})


def write_csv(df: pd.DataFrame, path: tp.Union[str, Path]) -> Path:
    """Write a data frame to a CSV file without the index."""
    path = Path(path)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def _jsonable(obj: tp.Any) -> tp.Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(obj: dict, path: tp.Union[str, Path]) -> Path:
    """Write a dictionary to a JSON file with the schema version."""
    path = Path(path)
    content = {"schema_version": SCHEMA_VERSION}
    content.update(_jsonable(obj))
    path.write_text(json.dumps(content, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_json(path: tp.Union[str, Path]) -> dict:
    """Load a JSON file written by graphfs."""
    content = json.loads(Path(path).read_text(encoding="utf-8"))
    version = content.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError("Unsupported schema version {} in {}.".format(version, path))
    return content


def write_dataset(dataset: Dataset, path: tp.Union[str, Path]) -> tp.Tuple[Path, Path]:
    """Write the dataset to a CSV file with the labels in the last column and the meta data in a sidecar.

    Returns
    -------
    csv_file : Path
        The path to the data.

    json_file : Path
        The path to the sidecar with the meta data and the informative indices.
    """
    csv_file = write_csv(dataset.to_frame(), path)
    meta = dict(dataset.meta)
    meta["informative_indices"] = dataset.informative_indices
    meta["feature_names"] = dataset.feature_names
    meta["label_column"] = "label" if dataset.labels is not None else None
    json_file = write_json(meta, sidecar_path(path))
    return csv_file, json_file


def write_edge_list(s: ndarray, path: tp.Union[str, Path], header: dict) -> tp.Tuple[Path, Path]:
    """Write the non-zero similarities in a 'i,j,weight' CSV file in row-major order.

    Parameters
    ----------
    s : ndarray
        The n x n similarity matrix.

    path : str or Path
        The path to the CSV file.

    header : dict
        The information written to the JSON sidecar, like k, gamma and seed. The size n is added.

    Returns
    -------
    csv_file : Path
        The edge list.

    json_file : Path
        The JSON header.
    """
    rows, cols = np.nonzero(s)
    df = pd.DataFrame({"i": rows, "j": cols, "weight": s[rows, cols]})
    csv_file = write_csv(df, path)
    meta = dict(header)
    meta["n"] = int(s.shape[0])
    json_file = write_json(meta, sidecar_path(path))
    return csv_file, json_file


def load_edge_list(path: tp.Union[str, Path], n: int = None) -> ndarray:
    """Load an edge list into a dense similarity matrix. The size is read from the sidecar if not given."""
    if n is None:
        n = int(load_json(sidecar_path(path))["n"])
    df = pd.read_csv(path)
    s = np.zeros((n, n))
    s[df["i"].to_numpy(), df["j"].to_numpy()] = df["weight"].to_numpy(dtype=np.float64)
    return s
