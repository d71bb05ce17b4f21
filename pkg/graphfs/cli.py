"""The functions used in the command line interface. The input and output are all files."""
import json
import sys
import typing as tp
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import fire
import matplotlib.pyplot as plt

import graphfs.evaluation as evaluation
import graphfs.io as io
import graphfs.training as training
from graphfs.datasets import Dataset, gen_synthetic, standardize
from graphfs.errors import ConfigError, GraphfsError
from graphfs.plotting import plot_run
from graphfs.selftest import run_selftest

DATA_DEFAULTS = {
    "data": None,
    "kind": "blobs",
    "n": 600,
    "data_seed": 0,
    "has_header": False,
    "label_column": None
}
EVAL_DEFAULTS = {
    "clustering": True,
    "classification": True,
    "reconstruction": True,
    "graph": True
}
EVAL_OPTIONS = {
    "selection": None,
    "seeds": "0..9",
    "ratio": 0.8,
    "recon_epochs": 500
}
OUTPUT_DEFAULTS = {
    "out": ".",
    "name": "run"
}


class RunConfig:
    """The resolved configuration of a command.

    Attributes
    ----------
    train : TrainConfig
        The training options.

    dataset : dict
        Either the path 'data' to a CSV file with 'has_header' and 'label_column', or the synthetic 'kind', 'n'
        and 'data_seed' when 'data' is None.

    toggles : dict
        The metrics of the evaluation.

    eval_options : dict
        The path 'selection' to the selection file, the 'seeds' of the splits, the training fraction 'ratio' and
        the 'recon_epochs' of the reconstruction network. The graph of the evaluation uses the 'k' of the
        training options.

    output : dict
        The output directory 'out' and the prefix 'name' of the files.
    """

    def __init__(
        self, train: training.TrainConfig, dataset: dict, toggles: dict, output: dict, eval_options: dict = None
    ):
        self.train = train
        self.dataset = dataset
        self.toggles = toggles
        self.output = output
        self.eval_options = dict(EVAL_OPTIONS) if eval_options is None else eval_options

    @property
    def out(self) -> Path:
        return Path(self.output["out"])

    @property
    def name(self) -> str:
        return str(self.output["name"])

    def to_dict(self) -> dict:
        dct = self.train.to_dict()
        dct.update(self.dataset)
        dct.update(self.toggles)
        dct.update(self.output)
        dct.update(self.eval_options)
        return dct

    @classmethod
    def from_dict(cls, dct: dict) -> "RunConfig":
        """Split a flat dictionary into the parts. The missing keys take the defaults."""
        train_keys = set(training.TrainConfig().to_dict())
        parts = [dict(DATA_DEFAULTS), dict(EVAL_DEFAULTS), dict(OUTPUT_DEFAULTS), dict(EVAL_OPTIONS)]
        train_dct = {}
        for key, value in dct.items():
            if key == "schema_version":
                continue
            if key in train_keys:
                train_dct[key] = value
                continue
            for part in parts:
                if key in part:
                    part[key] = value
                    break
            else:
                raise ConfigError(key, "unknown option.")
        return cls(training.TrainConfig.from_dict(train_dct), *parts)

    def replace(self, **kwargs) -> "RunConfig":
        dct = self.to_dict()
        dct.update(kwargs)
        return RunConfig.from_dict(dct)


def resolve_config(config: str = None, **flags) -> RunConfig:
    """Merge the defaults, the JSON configuration file and the flags, the later ones taking precedence."""
    dct = io.load_json(config) if config is not None else {}
    dct.update(flags)
    return RunConfig.from_dict(dct)


def _echo(dct: dict) -> None:
    print(json.dumps(dct, indent=2, sort_keys=True))


def load_dataset(run_cfg: RunConfig) -> Dataset:
    """Read or generate the dataset of the configuration and standardize it."""
    source = run_cfg.dataset
    if source["data"] is None:
        return standardize(gen_synthetic(source["kind"], n=source["n"], seed=source["data_seed"]))
    path = Path(source["data"])
    sidecar = io.sidecar_path(path)
    has_header, label_column, informative = source["has_header"], source["label_column"], None
    if sidecar.is_file():
        meta = io.load_json(sidecar)
        has_header = True
        label_column = meta.get("label_column", label_column)
        informative = meta.get("informative_indices")
    dataset = io.load_csv(path, has_header=has_header, label_column=label_column)
    if informative is not None:
        dataset.informative_indices = tuple(informative)
    return standardize(dataset)


def parse_seeds(seeds: tp.Any) -> tp.Optional[tp.List[int]]:
    """Read the seeds from an integer, a list, a 'first..last' range or a comma separated string."""
    if seeds is None:
        return None
    if isinstance(seeds, (list, tuple)):
        return [int(s) for s in seeds]
    if isinstance(seeds, int):
        return [seeds]
    text = str(seeds).strip()
    if ".." in text:
        first, last = text.split("..", 1)
        return list(range(int(first), int(last) + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def _save_plot(dataset: Dataset, report: training.TrainReport, folder: Path, name: str) -> Path:
    sel = report.selection
    plot_run(dataset.X, sel.F, sel.hard_indices, report.graph, labels=dataset.labels,
             feature_names=dataset.feature_names)
    path = folder / "{}_run.png".format(name)
    plt.savefig(path)
    plt.close()
    return path


def _train_one(dataset: Dataset, run_cfg: RunConfig, folder: Path, verbose: int) -> training.TrainReport:
    report = training.train(dataset, run_cfg.train, verbose=verbose)
    training.save(report, run_cfg.name, str(folder), feature_names=dataset.feature_names)
    if verbose > 0:
        print("Selected {} (duplicates: {}). Results in {}.".format(
            list(report.selection.hard_indices), report.selection.duplicates, folder))
    return report


def train(config: str = None, seeds: tp.Any = None, workers: int = None, plot: bool = False, verbose: int = 1,
          **flags):
    """Learn the feature selection and the k-NN graph and save the report, the losses, the graph and the selection.

    The options are the defaults, overridden by the JSON file 'config', overridden by the flags. The resolved
    options are printed and saved in '{name}_config.json' so the run can be replayed.

    Parameters
    ----------
    config : str
        The path to a JSON file of options.

    seeds : int, list or str
        If given, one run per seed, like '0..9', in the subdirectories 'seed_{seed}' of the output directory.

    workers : int
        The number of threads running the seeds. Default is chosen by the executor.

    plot : bool
        If True, save a figure of the selection and the graph.

    verbose : int
        The verbose level of the training.

    flags :
        The options, like '--m 2 --k 5 --data data.csv --out results'. Run 'graphfs train --help' for the
        training options in TrainConfig, the dataset options 'data', 'kind', 'n', 'data_seed', 'has_header',
        'label_column' and the output options 'out' and 'name'.
    """
    run_cfg = resolve_config(config, **flags)
    _echo(run_cfg.to_dict())
    dataset = load_dataset(run_cfg)
    out = run_cfg.out
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(run_cfg.to_dict(), out / "{}_config.json".format(run_cfg.name))
    seed_list = parse_seeds(seeds)
    if seed_list is None:
        jobs = [(run_cfg, out)]
    else:
        jobs = [(run_cfg.replace(seed=s), out / "seed_{}".format(s)) for s in seed_list]
    for _, folder in jobs:
        folder.mkdir(parents=True, exist_ok=True)
    if len(jobs) == 1:
        reports = [_train_one(dataset, jobs[0][0], jobs[0][1], verbose)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            reports = list(executor.map(lambda job: _train_one(dataset, job[0], job[1], 0), jobs))
        if verbose > 0:
            for (cfg, folder), report in zip(jobs, reports):
                print("Seed {}: selected {}, final loss {:.6g}.".format(
                    cfg.train.seed, list(report.selection.hard_indices), report.final_loss))
    if plot:
        for (cfg, folder), report in zip(jobs, reports):
            _save_plot(dataset, report, folder, cfg.name)
    return


def evaluate(selection: str = None, config: str = None, verbose: int = 1, **flags):
    """Evaluate a saved selection on random splits of the dataset and save the report and the table of seeds.

    The resolved options are printed and saved in '{name}_eval_config.json'. Passing that file as 'config'
    replays the evaluation.

    Parameters
    ----------
    selection : str
        The path to the '{name}_selection.json' file of a training run. Default is the 'selection' option of the
        configuration.

    config : str
        The path to a JSON file of options, as for 'train'.

    verbose : int
        1 prints the metrics of each seed.

    flags :
        The evaluation options 'seeds' (default '0..9'), 'ratio', 'recon_epochs' and 'k' for the graph on the
        test samples, the dataset options, the metric toggles 'clustering', 'classification', 'reconstruction',
        'graph' and the output options.
    """
    if selection is not None:
        flags["selection"] = str(selection)
    run_cfg = resolve_config(config, **flags)
    options = run_cfg.eval_options
    if options["selection"] is None:
        raise ConfigError("selection", "give the path to a selection file.")
    _echo(run_cfg.to_dict())
    indices = io.load_json(options["selection"])["hard_indices"]
    dataset = load_dataset(run_cfg)
    run_cfg.out.mkdir(parents=True, exist_ok=True)
    io.write_json(run_cfg.to_dict(), run_cfg.out / "{}_eval_config.json".format(run_cfg.name))
    report, table = evaluation.evaluate_selection(
        dataset, indices, seeds=parse_seeds(options["seeds"]), ratio=float(options["ratio"]), k=run_cfg.train.k,
        recon_epochs=int(options["recon_epochs"]), verbose=verbose, **run_cfg.toggles
    )
    evaluation.save_eval(report, table, run_cfg.name, str(run_cfg.out))
    _echo(report.to_dict())
    return


def selftest(points: int = 10, ot_rows: int = 1000, ortho_instances: int = 100, kkt_instances: int = 500,
             marginal_costs: int = 100, seed: int = 0, out: str = None, verbose: int = 1):
    """Run the self checks of the numerical core and exit with 1 if any fails.

    Parameters
    ----------
    points, ot_rows, ortho_instances, kkt_instances, marginal_costs : int
        The number of instances of each check.

    seed : int
        The random seed.

    out : str
        If given, the path to save the report in JSON.

    verbose : int
        1 prints each check when it is done.
    """
    _echo({
        "points": points, "ot_rows": ot_rows, "ortho_instances": ortho_instances, "kkt_instances": kkt_instances,
        "marginal_costs": marginal_costs, "seed": seed
    })
    report = run_selftest(
        points=points, ot_rows=ot_rows, ortho_instances=ortho_instances, kkt_instances=kkt_instances,
        marginal_costs=marginal_costs, seed=seed, verbose=verbose
    )
    print(report.to_frame().to_string(index=False))
    if out is not None:
        io.write_json(report.to_dict(), out)
    if not report.passed:
        print("Failed: {}".format(", ".join(report.failures())), file=sys.stderr)
        sys.exit(1)
    return


def gen(kind: str = "blobs", n: int = 600, seed: int = 0, out: str = "data.csv"):
    """Generate a synthetic dataset and save it in a CSV file with the labels in the last column and a JSON
    sidecar.

    Parameters
    ----------
    kind : str
        "blobs", "moons" or "circles".

    n : int
        The even number of samples.

    seed : int
        The random seed.

    out : str
        The path to the CSV file.
    """
    _echo({"kind": kind, "n": n, "seed": seed, "out": out})
    dataset = gen_synthetic(kind, n=n, seed=seed)
    io.write_dataset(dataset, out)
    return


def export_graph(selection: str, config: str = None, **flags):
    """Learn the k-NN graph on the features of a saved selection by the exact sorting and save the edge list.

    The training options of the selection file are used unless overridden by the configuration file or the
    flags. The edge list goes to '{name}_graph.csv' in the output directory with a JSON header.

    Parameters
    ----------
    selection : str
        The path to the '{name}_selection.json' file of a training run.

    config : str
        The path to a JSON file of options.

    flags :
        The dataset options, 'k' and the output options.
    """
    content = io.load_json(selection)
    dct = dict(content.get("config", {}))
    if config is not None:
        dct.update(io.load_json(config))
    dct.update(flags)
    run_cfg = RunConfig.from_dict(dct)
    indices = [int(i) for i in content["hard_indices"]]
    _echo(dict(run_cfg.to_dict(), selection=str(selection), hard_indices=indices))
    dataset = load_dataset(run_cfg)
    run_cfg.train.validate(d=dataset.d, n=dataset.n)
    graph = training.selected_graph(dataset.X, indices, run_cfg.train)
    header = {key: run_cfg.to_dict()[key] for key in ("k", "gamma", "zeta", "seed")}
    header["selected"] = indices
    run_cfg.out.mkdir(parents=True, exist_ok=True)
    io.write_edge_list(graph.S, run_cfg.out / "{}_graph.csv".format(run_cfg.name), header)
    return


COMMANDS = {
    "gen": gen,
    "train": train,
    "eval": evaluate,
    "selftest": selftest,
    "export-graph": export_graph
}


def main():
    """The CLI entry point. Run google-fire on the name - function mapping. The errors exit with 1."""
    try:
        fire.Fire(COMMANDS)
    except (GraphfsError, OSError) as e:
        print("Error: {}".format(e), file=sys.stderr)
        sys.exit(1)
