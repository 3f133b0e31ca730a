from traces.parser import RowError, TraceParseResult, parse_traces, serialize_traces
from traces.schema import ColumnMapping, FreqMode, RunRecord, TrainingSet
from traces.training import EffectiveSize, build_training_sets, effective_input_size
