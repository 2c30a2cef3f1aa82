"""Synthetic data generation and the experiment-matrix runner.

Datasets are either dense standard-normal matrices ("randn") or heavy-tailed
5%-density sparse matrices ("sparse_synth", signed lognormal magnitudes),
optionally contaminated by scaling a random 10% of the entries by 100.
Every run is keyed by explicit seeds so reports are reproducible
byte-for-byte; within one seed all solvers share the same data and start.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import SparseColMatrix, matvec
from .problem import (
    DcProblem,
    build_approx_binary,
    build_approx_sparse,
    build_eig_lp,
    build_glr,
    build_pca,
)
from .solvers import NumericalError, SolverConfig, Trace, default_x0, run_baseline, run_cd

__all__ = [
    "DatasetSpec",
    "ExperimentSpec",
    "gen_matrix",
    "gen_signal_and_obs",
    "build_application",
    "run_solver",
    "run_experiment",
    "write_report",
    "APPLICATIONS",
    "SOLVERS",
    "DEFAULT_SOLVERS",
]

APPLICATIONS = ("eig_l1", "sparse", "binary", "glr", "pca")
SOLVERS = ("cd-snca", "cd-sca", "mscr", "pdca", "subgrad", "tdual")

# the comparison set used in the experiment tables, per application
DEFAULT_SOLVERS = {
    "eig_l1": ["mscr", "pdca", "tdual", "cd-sca", "cd-snca"],
    "sparse": ["mscr", "pdca", "subgrad", "cd-sca", "cd-snca"],
    "binary": ["mscr", "pdca", "subgrad", "cd-sca", "cd-snca"],
    "glr": ["mscr", "pdca", "subgrad", "cd-sca", "cd-snca"],
    "pca": ["mscr", "pdca", "subgrad", "cd-sca", "cd-snca"],
}

_SPARSE_DENSITY = 0.05
_SPARSE_STORAGE_THRESHOLD = 0.25
_CONTAMINATION_FRACTION = 0.1
_RHO_SPARSE = 1.0
_RHO_BINARY = 5.0


@dataclass(frozen=True)
class DatasetSpec:
    kind: str  # "randn" | "sparse_synth"
    m: int
    n: int
    contaminated: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("randn", "sparse_synth"):
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if self.m < 1 or self.n < 1:
            raise ValueError("matrix dimensions must be >= 1")

    @property
    def label(self) -> str:
        tag = "-C" if self.contaminated else ""
        return f"{self.kind}-{self.m}-{self.n}{tag}"


@dataclass
class ExperimentSpec:
    application: str
    datasets: list
    solvers: list
    repeats: int = 10
    config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.application not in APPLICATIONS:
            raise ValueError(f"unknown application {self.application!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValueError(f"unknown solver {s!r}")

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentSpec":
        datasets = [DatasetSpec(**d) for d in doc["datasets"]]
        config = SolverConfig(**doc.get("config", {}))
        solvers = doc.get("solvers") or DEFAULT_SOLVERS[doc["application"]]
        return cls(application=doc["application"], datasets=datasets,
                   solvers=list(solvers), repeats=doc.get("repeats", 10),
                   config=config)


def gen_matrix(spec: DatasetSpec):
    """Seeded dataset matrix; sparse kinds come back in column-sparse storage
    whenever their density is below 25%."""
    rng = np.random.default_rng(spec.seed)
    m, n = spec.m, spec.n
    if spec.kind == "randn":
        M = rng.standard_normal((m, n))
        density = 1.0
    else:
        M = np.zeros(m * n)
        nnz = int(_SPARSE_DENSITY * m * n)
        pos = rng.choice(m * n, size=nnz, replace=False)
        M[pos] = rng.choice([-1.0, 1.0], size=nnz) * rng.lognormal(0.0, 1.0, size=nnz)
        M = M.reshape(m, n)
        density = _SPARSE_DENSITY
    if spec.contaminated:
        k = int(_CONTAMINATION_FRACTION * m * n)
        idx = rng.choice(m * n, size=k, replace=False)
        M.flat[idx] *= 100.0
    if density < _SPARSE_STORAGE_THRESHOLD:
        return SparseColMatrix.from_dense(M)
    return M


_NOISE_LEVEL = {"sparse": 0.1, "binary": 0.1, "glr": 0.1}


def gen_signal_and_obs(application: str, G, seed: int, noise: float | None = None):
    """Ground-truth signal and observations for one benchmark instance.

    sparse: a min(200, n//2)-sparse signal, y = G x + scaled Gaussian noise.
    binary/glr: a dense Gaussian signal with rectified observations, y >= 0.
    eig_l1/pca: no observations (returns (None, None)).
    """
    if application in ("eig_l1", "pca"):
        return None, None
    if noise is None:
        noise = _NOISE_LEVEL[application]
    m = G.m if isinstance(G, SparseColMatrix) else np.asarray(G).shape[0]
    n = G.n if isinstance(G, SparseColMatrix) else np.asarray(G).shape[1]
    rng = np.random.default_rng(seed + 1_000_003)  # decouple from matrix draws
    if application == "sparse":
        x_true = np.zeros(n)
        support = rng.choice(n, size=min(200, n // 2), replace=False)
        x_true[support] = rng.standard_normal(len(support))
        gx = matvec(G, x_true)
        y = gx + rng.standard_normal(m) * (noise * np.linalg.norm(gx))
        return x_true, y
    if application in ("binary", "glr"):
        x_true = rng.standard_normal(n)
        gx = matvec(G, x_true)
        y = np.maximum(gx + rng.standard_normal(m) * (noise * np.linalg.norm(gx)), 0.0)
        return x_true, y
    raise ValueError(f"unknown application {application!r}")


def build_application(application: str, G, y=None) -> DcProblem:
    if application == "eig_l1":
        return build_eig_lp(G, alpha=1.0, p=1)
    if application == "sparse":
        n = G.n if isinstance(G, SparseColMatrix) else np.asarray(G).shape[1]
        return build_approx_sparse(G, y, rho=_RHO_SPARSE, s=min(200, n // 2))
    if application == "binary":
        return build_approx_binary(G, y, rho=_RHO_BINARY)
    if application == "glr":
        return build_glr(G, y)
    if application == "pca":
        Gd = G.toarray() if isinstance(G, SparseColMatrix) else np.asarray(G, dtype=float)
        return build_pca(Gd.T @ Gd, alpha=1.0)
    raise ValueError(f"unknown application {application!r}")


def run_solver(problem: DcProblem, solver: str, config: SolverConfig,
               x0=None) -> Trace:
    if solver == "cd-snca":
        return run_cd(problem, config, x0, variant="snca")
    if solver == "cd-sca":
        return run_cd(problem, config, x0, variant="sca")
    if solver == "tdual":
        return run_baseline(problem, "tdual_l1pca", config, x0)
    if solver in ("mscr", "pdca", "subgrad"):
        return run_baseline(problem, solver, config, x0)
    raise ValueError(f"unknown solver {solver!r}")


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """Execute the dataset x solver matrix and return mean/std report rows.

    Within one repeat, every solver sees the same matrix, observations and
    starting point; a solver failure marks that row 'failed' without stopping
    the rest of the grid.
    """
    rows = []
    for ds in spec.datasets:
        finals = {s: [] for s in spec.solvers}
        runs = {s: [] for s in spec.solvers}
        for rep in range(spec.repeats):
            seed = ds.seed + rep
            G = gen_matrix(replace(ds, seed=seed))
            _, y = gen_signal_and_obs(spec.application, G, seed)
            problem = build_application(spec.application, G, y)
            x0 = default_x0(problem, seed)
            cfg = replace(spec.config, seed=seed)
            for solver in spec.solvers:
                try:
                    trace = run_solver(problem, solver, cfg, x0)
                    finals[solver].append(trace.final_F)
                    runs[solver].append({
                        "seed": seed, "final_F": trace.final_F,
                        "iters": trace.iterations,
                        "stop_reason": trace.stop_reason,
                    })
                except NumericalError as exc:
                    runs[solver].append({"seed": seed, "failed": str(exc)})
        means = {}
        for solver in spec.solvers:
            vals = finals[solver]
            row = {
                "application": spec.application,
                "dataset": ds.label,
                "solver": solver,
                "runs": runs[solver],
            }
            if vals:
                row["mean_F"] = float(np.mean(vals))
                row["std_F"] = float(np.std(vals))
                means[solver] = row["mean_F"]
            else:
                row["failed"] = True
            rows.append(row)
        ranked = sorted(means, key=means.get)
        for row in rows[-len(spec.solvers):]:
            if row["solver"] in means:
                row["rank"] = ranked.index(row["solver"]) + 1
    return rows


def write_report(rows: list[dict], outdir) -> None:
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "report.json"), "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(outdir, "report.csv"), "w") as fh:
        fh.write("application,dataset,solver,mean_F,std_F,rank\n")
        for row in rows:
            mean = repr(row["mean_F"]) if "mean_F" in row else "failed"
            std = repr(row["std_F"]) if "std_F" in row else ""
            rank = row.get("rank", "")
            fh.write(f"{row['application']},{row['dataset']},{row['solver']},"
                     f"{mean},{std},{rank}\n")
