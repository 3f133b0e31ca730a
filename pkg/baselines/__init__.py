from baselines.naive import NaiveModel, naive_fit, naive_predict
from baselines.online import (
    FittedDistribution,
    OnlineModel,
    OnlineVariant,
    fit_runtime_distribution,
    nearest_tuple,
    online_fit,
    online_predict,
)
