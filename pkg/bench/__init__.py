from bench.cpu import bench_cpu_prime
from bench.flops import bench_flops, linpack_ops
from bench.io import IoScores, bench_io_sequential
from bench.memory import bench_memory
from bench.profile import NodeProfile, format_profile, load_profiles, parse_profile, read_profile
from bench.runner import run_all
