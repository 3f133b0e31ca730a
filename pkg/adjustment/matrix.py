"""Task x node runtime estimates.

Each query is predicted once on the local machine, then the mean and every
credible bound are multiplied by the task's node factor for each target.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from adjustment.factor import node_factor
from adjustment.weight import TaskWeight
from bench.profile import NodeProfile
from estimator.model import ModelKind, Prediction, TaskModel, predict
from utils.errors import AdjustmentError
from utils.log import logger

Query = Tuple[str, float]


class EstimateCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    task: str
    node: str
    input_size: float
    prediction: Prediction
    factor: float = Field(..., gt=0)
    w: Optional[float] = None
    model_kind: str


class EstimateMatrix(BaseModel):
    model_config = ConfigDict(frozen=True)

    local: str
    levels: List[float]
    cells: List[EstimateCell] = Field(default_factory=list)

    def get(self, task: str, node: str, input_size: float) -> EstimateCell:
        for cell in self.cells:
            if cell.task == task and cell.node == node and cell.input_size == input_size:
                return cell
        raise AdjustmentError(f"no estimate for task {task!r} on node {node!r} at {input_size} bytes")

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for cell in self.cells:
            row: Dict[str, object] = {
                "task": cell.task,
                "node": cell.node,
                "input_size": int(cell.input_size) if float(cell.input_size).is_integer() else cell.input_size,
                "mean_ms": f"{cell.prediction.mean:.2f}",
            }
            for level in self.levels:
                bounds = cell.prediction.intervals.get(level)
                tag = f"{level * 100:g}"
                row[f"lo{tag}"] = "" if bounds is None else f"{bounds[0]:.2f}"
                row[f"hi{tag}"] = "" if bounds is None else f"{bounds[1]:.2f}"
            row["factor"] = f"{cell.factor:.6g}"
            row["w"] = "" if cell.w is None else f"{cell.w:.6g}"
            row["model_kind"] = cell.model_kind
            rows.append(row)
        columns = ["task", "node", "input_size", "mean_ms"]
        for level in self.levels:
            columns += [f"lo{level * 100:g}", f"hi{level * 100:g}"]
        columns += ["factor", "w", "model_kind"]
        return pd.DataFrame(rows, columns=columns)

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")


def _sorted_cells(cells: Iterable[EstimateCell]) -> List[EstimateCell]:
    return sorted(cells, key=lambda c: (c.task, c.input_size, c.node))


def build_estimate_matrix(
    models: Mapping[str, TaskModel],
    weights: Mapping[str, TaskWeight],
    profiles: Mapping[str, NodeProfile],
    local: str,
    queries: Sequence[Query],
    levels: Sequence[float] = (0.5, 0.95),
    truncate: Optional[bool] = None,
    threads: Optional[int] = None,
) -> EstimateMatrix:
    if local not in profiles:
        raise AdjustmentError(f"local node {local!r} has no profile")
    for task, _ in queries:
        if task not in models:
            raise AdjustmentError(f"unknown task {task!r}: no trained model")
        if task not in weights:
            raise AdjustmentError(f"unknown task {task!r}: no CPU weight")

    nodes = sorted(profiles)
    factors = {
        (task, node): node_factor(weights[task].w, profiles[local], profiles[node], truncate)
        for task in sorted({task for task, _ in queries})
        for node in nodes
    }

    def estimate(query: Query) -> List[EstimateCell]:
        task, x = query
        local_prediction = predict(models[task], x, levels)
        return [
            EstimateCell(
                task=task,
                node=node,
                input_size=x,
                prediction=local_prediction.scaled(factors[(task, node)]),
                factor=factors[(task, node)],
                w=weights[task].w,
                model_kind=models[task].kind.value,
            )
            for node in nodes
        ]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        cells = [cell for row in executor.map(estimate, queries) for cell in row]

    logger.debug(f"Estimated {len(cells)} cell(s) for {len(queries)} query(ies) on {len(nodes)} node(s)")
    return EstimateMatrix(local=local, levels=sorted(set(levels)), cells=_sorted_cells(cells))


def point_estimate_matrix(
    kind: str,
    predict_fn: Callable[[str, str, float], float],
    nodes: Iterable[str],
    local: str,
    queries: Sequence[Query],
    levels: Sequence[float] = (0.5, 0.95),
) -> EstimateMatrix:
    """Matrix for estimators that return a bare runtime and apply no node factor."""
    cells = [
        EstimateCell(
            task=task,
            node=node,
            input_size=x,
            prediction=Prediction(mean=predict_fn(task, node, x), kind=ModelKind.MEDIAN),
            factor=1.0,
            model_kind=kind,
        )
        for task, x in queries
        for node in sorted(nodes)
    ]
    return EstimateMatrix(local=local, levels=sorted(set(levels)), cells=_sorted_cells(cells))
