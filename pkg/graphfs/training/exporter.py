"""Save the training report: the report in JSON, the losses in CSV, the graph as an edge list and the selection
in netCDF."""
import typing as tp
from pathlib import Path

import numpy as np
import pandas as pd
import xarray as xr

from graphfs import io
from graphfs.training.config import TrainReport

__all__ = ["export_selection", "save_report", "save_losses", "save_graph", "save_selection", "save"]


def _folder(folder: tp.Union[str, Path]) -> Path:
    folder = Path(folder)
    if not folder.is_dir():
        folder.mkdir(parents=True)
    return folder


def export_selection(report: TrainReport, feature_names: tp.Sequence[str] = None) -> xr.Dataset:
    """Export the selection matrix and the selected features in a dataset."""
    F = report.selection.F
    d, m = F.shape
    ds = xr.Dataset(
        {
            "F": (["feature", "selected"], F),
            "theta": (["feature", "selected"], report.theta),
            "hard_indices": (["selected"], np.asarray(report.selection.hard_indices, dtype=np.int64))
        },
        {"feature": (["feature"], np.arange(d)), "selected": (["selected"], np.arange(m))}
    )
    ds["F"].attrs["long_name"] = "selection matrix"
    ds["theta"].attrs["long_name"] = "selection logits"
    ds["hard_indices"].attrs["long_name"] = "selected feature"
    ds.attrs["duplicates"] = int(report.selection.duplicates)
    ds.attrs["final_loss"] = report.final_loss
    if feature_names is not None:
        ds.attrs["selected_names"] = ",".join(feature_names[i] for i in report.selection.hard_indices)
    return ds


def save_report(report: TrainReport, base_name: str, folder: str) -> Path:
    """Save the report in '{base_name}_report.json'. The wall time goes to '{base_name}_timing.json'."""
    folder = _folder(folder)
    io.write_json({"wall_time": report.wall_time}, folder / "{}_timing.json".format(base_name))
    return io.write_json(report.to_dict(), folder / "{}_report.json".format(base_name))


def save_losses(report: TrainReport, base_name: str, folder: str) -> Path:
    """Save the loss of each epoch in '{base_name}_loss.csv'."""
    df = pd.DataFrame({"epoch": np.arange(report.losses.size), "loss": report.losses})
    return io.write_csv(df, _folder(folder) / "{}_loss.csv".format(base_name))


def save_graph(report: TrainReport, base_name: str, folder: str) -> tp.Tuple[Path, Path]:
    """Save the hard graph in '{base_name}_graph.csv' with the header in '{base_name}_graph.json'."""
    header = {key: report.config.get(key) for key in ("k", "gamma", "zeta", "seed")}
    header["selected"] = list(report.selection.hard_indices)
    return io.write_edge_list(report.graph.S, _folder(folder) / "{}_graph.csv".format(base_name), header)


def save_selection(
    report: TrainReport, base_name: str, folder: str, feature_names: tp.Sequence[str] = None
) -> tp.Tuple[Path, Path]:
    """Save the selection in '{base_name}_selection.json' and '{base_name}_selection.nc'."""
    folder = _folder(folder)
    sel = report.selection
    dct = {
        "hard_indices": list(sel.hard_indices),
        "duplicates": sel.duplicates,
        "F": sel.F,
        "config": report.config
    }
    if feature_names is not None:
        dct["selected_names"] = [feature_names[i] for i in sel.hard_indices]
    json_file = io.write_json(dct, folder / "{}_selection.json".format(base_name))
    nc_file = folder / "{}_selection.nc".format(base_name)
    export_selection(report, feature_names).to_netcdf(nc_file)
    return json_file, nc_file


def save(report: TrainReport, base_name: str, folder: str, feature_names: tp.Sequence[str] = None) -> tp.List[Path]:
    """Save all the outputs of a training run.

    Parameters
    ----------
    report : TrainReport
        The report of the run.

    base_name : str
        The prefix of the file names.

    folder : str
        The folder to save the files. It is created if missing.

    feature_names : sequence of str
        The names of the features of the training data.

    Returns
    -------
    files : list of Path
        The paths to the report, the losses, the edge list, its header, the selection and its netCDF copy.
    """
    files = [save_report(report, base_name, folder), save_losses(report, base_name, folder)]
    files.extend(save_graph(report, base_name, folder))
    files.extend(save_selection(report, base_name, folder, feature_names))
    return files
