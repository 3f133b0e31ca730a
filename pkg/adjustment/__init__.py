from adjustment.factor import node_factor, truncate_two_decimals
from adjustment.matrix import EstimateCell, EstimateMatrix, build_estimate_matrix, point_estimate_matrix
from adjustment.weight import TaskWeight, cpu_weight, runtime_deviation, task_weight
