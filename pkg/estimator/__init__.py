from estimator.bayes import BayesPosterior, BayesPrior, fit_bayes_lr
from estimator.model import ModelKind, Prediction, TaskModel, fit_task_model, fit_task_models, lower_median, predict
from estimator.model_file import read_model_dir, read_model_file, write_model_dir, write_model_file
from estimator.pearson import PearsonResult, pearson
