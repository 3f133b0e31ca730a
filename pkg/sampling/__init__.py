from sampling.combinations import CombinationSpace, enumerate_combinations
from sampling.plan import Coverage, PartitionPlan, coverage_fraction, plan_partitions
from sampling.splitter import FastqReader, LineBlockReader, count_records, split_fastq, split_records
