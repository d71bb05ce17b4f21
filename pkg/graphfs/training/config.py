"""Objects used in the training."""
import typing as tp

import numpy as np
from numpy import ndarray

from graphfs.errors import ConfigError
from graphfs.graph.config import GraphLearnerConfig, SimilarityGraph
from graphfs.selection import SelectionResult

__all__ = ["TrainConfig", "TrainReport", "ABLATIONS"]

ABLATIONS = ("none", "no_ufs", "fixed_heat_graph")
HEAT_SIGMAS = (1., 2., 3., 4., 5.)


class TrainConfig:
    """A configuration class of the joint feature selection and graph learning.

    Attributes
    ----------
    m : int
        The number of features to select. Default 2.

    k : int
        The number of neighbors in the graph. Default 5.

    gamma : float
        The weight of the entropy in the neighbor selection. Default 0.1.

    zeta : int
        The number of Bregman projection iterations. Default 200.

    lr : float
        The learning rate of Adam. Zero freezes the logits. Default 1e-2.

    epochs : int
        The number of full-batch epochs. Default 1000.

    seed : int
        The seed of the initialization and the Gumbel noise. Default 0.

    ablation : str
        "none" for the full method, "no_ufs" to skip the de-duplication of the selection and
        "fixed_heat_graph" to keep a heat kernel graph on all the features fixed. Default "none".

    heat_sigma : float or str
        The bandwidth of the fixed heat kernel graph, or "tune" to search it in 1, ..., 5. Default 1.

    log_every : int
        The number of epochs between two progress lines. Default 100.

    epsilon : float
        The perturbation of the Gram matrix in the de-duplication. Default 1e-4.

    t0, t_min : float
        The first and the last temperature of the annealing. Default 10 and 0.01.

    rescale_rows : bool
        If True, the distance rows are rescaled before the neighbor selection. Default True.

    scaling : str
        "knn" maps the nearest distance of a row to 0 and the (k + 1)-th nearest to k, "max" divides the row by
        its maximum. Default "knn".

    candidates : int or None
        The number of nearest samples of each row given to the neighbor selection, None for the whole row.
        Default 20.

    diag_mask : float
        The distance of a sample to itself in the neighbor selection. Default 1e6.

    detach_graph : bool
        If True, the gradient does not flow through the learned graph, only through the selected data.
        Default False.
    """

    def __init__(
        self,
        m: int = 2,
        k: int = 5,
        gamma: float = 0.1,
        zeta: int = 200,
        lr: float = 1e-2,
        epochs: int = 1000,
        seed: int = 0,
        ablation: str = "none",
        heat_sigma: tp.Union[float, str] = 1.,
        log_every: int = 100,
        epsilon: float = 1e-4,
        t0: float = 10.,
        t_min: float = 0.01,
        rescale_rows: bool = True,
        diag_mask: float = 1e6,
        detach_graph: bool = False,
        scaling: str = "knn",
        candidates: tp.Optional[int] = 20
    ):
        self.m = int(m)
        self.k = int(k)
        self.gamma = float(gamma)
        self.zeta = int(zeta)
        self.lr = float(lr)
        self.epochs = int(epochs)
        self.seed = int(seed)
        self.ablation = str(ablation)
        self.heat_sigma = heat_sigma if heat_sigma == "tune" else float(heat_sigma)
        self.log_every = int(log_every)
        self.epsilon = float(epsilon)
        self.t0 = float(t0)
        self.t_min = float(t_min)
        self.rescale_rows = bool(rescale_rows)
        self.diag_mask = float(diag_mask)
        self.detach_graph = bool(detach_graph)
        self.scaling = str(scaling)
        self.candidates = None if candidates is None else int(candidates)
        self.validate()

    def __repr__(self):
        return "TrainConfig({})".format(", ".join("{}={!r}".format(k, v) for k, v in self.to_dict().items()))

    def validate(self, d: int = None, n: int = None) -> None:
        """Check the values. The number of features d and the number of samples n are checked when given."""
        if self.m < 1:
            raise ConfigError("m", "must be at least 1, got {}.".format(self.m))
        if d is not None and self.m > d:
            raise ConfigError("m", "cannot select {} out of {} features.".format(self.m, d))
        if self.epochs < 1:
            raise ConfigError("epochs", "must be at least 1, got {}.".format(self.epochs))
        if not self.lr >= 0. or not np.isfinite(self.lr):
            raise ConfigError("lr", "must be a non-negative number, got {}.".format(self.lr))
        if self.seed < 0:
            raise ConfigError("seed", "must be non-negative, got {}.".format(self.seed))
        if self.ablation not in ABLATIONS:
            raise ConfigError("ablation", "unknown '{}'. Allowed: {}.".format(self.ablation, ", ".join(ABLATIONS)))
        if self.heat_sigma != "tune" and not self.heat_sigma > 0.:
            raise ConfigError("heat_sigma", "must be positive or 'tune', got {}.".format(self.heat_sigma))
        if self.log_every < 1:
            raise ConfigError("log_every", "must be at least 1, got {}.".format(self.log_every))
        if not self.epsilon > 0.:
            raise ConfigError("epsilon", "must be positive, got {}.".format(self.epsilon))
        if not self.t_min > 0.:
            raise ConfigError("t_min", "must be positive, got {}.".format(self.t_min))
        if not self.t0 >= self.t_min:
            raise ConfigError("t0", "must be no less than t_min = {}, got {}.".format(self.t_min, self.t0))
        self.graph_config().validate(n)

    def graph_config(self) -> GraphLearnerConfig:
        """The configuration of the graph learner."""
        return GraphLearnerConfig(
            k=self.k, gamma=self.gamma, zeta=self.zeta, rescale_rows=self.rescale_rows, diag_mask=self.diag_mask,
            scaling=self.scaling, candidates=self.candidates
        )

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "gamma": self.gamma,
            "zeta": self.zeta,
            "lr": self.lr,
            "epochs": self.epochs,
            "seed": self.seed,
            "ablation": self.ablation,
            "heat_sigma": self.heat_sigma,
            "log_every": self.log_every,
            "epsilon": self.epsilon,
            "t0": self.t0,
            "t_min": self.t_min,
            "rescale_rows": self.rescale_rows,
            "diag_mask": self.diag_mask,
            "detach_graph": self.detach_graph,
            "scaling": self.scaling,
            "candidates": self.candidates
        }

    @classmethod
    def from_dict(cls, dct: dict) -> "TrainConfig":
        """Build the configuration from the known keys of a dictionary. Unknown keys are rejected."""
        known = set(cls().to_dict())
        unknown = sorted(set(dct) - known - {"schema_version"})
        if unknown:
            raise ConfigError(unknown[0], "unknown training option.")
        return cls(**{key: value for key, value in dct.items() if key in known})

    def replace(self, **kwargs) -> "TrainConfig":
        """A copy with some values replaced."""
        dct = self.to_dict()
        dct.update(kwargs)
        return TrainConfig.from_dict(dct)


class TrainReport:
    """The outcome of a training run.

    Attributes
    ----------
    losses : ndarray
        The loss of each epoch.

    selection : SelectionResult
        The selection read from the final logits without noise.

    graph : SimilarityGraph
        The k-NN graph learned by the exact sorting on the selected features.

    theta : ndarray
        The final logits.

    wall_time : float
        The duration of the run in seconds.

    config : dict
        The configuration of the run.
    """

    def __init__(
        self, losses: ndarray, selection: SelectionResult, graph: SimilarityGraph, theta: ndarray,
        wall_time: float, config: dict
    ):
        self.losses = np.asarray(losses, dtype=np.float64)
        self.selection = selection
        self.graph = graph
        self.theta = theta
        self.wall_time = float(wall_time)
        self.config = dict(config)

    def __repr__(self):
        return "TrainReport(epochs={}, final_loss={:.6g}, selection={})".format(
            self.losses.size, self.final_loss, self.selection)

    @property
    def final_loss(self) -> float:
        return float(self.losses[-1])

    def to_dict(self, timing: bool = False) -> dict:
        """The content of the report. The wall time is left out unless asked, so reruns compare equal."""
        dct = {
            "config": self.config,
            "losses": self.losses.tolist(),
            "final_loss": self.final_loss,
            "selection": self.selection.to_dict(),
            "theta": self.theta.tolist(),
            "graph": {"n": self.graph.n, "n_edges": self.graph.n_edges}
        }
        if timing:
            dct["wall_time"] = self.wall_time
        return dct
