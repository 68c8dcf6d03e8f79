"""
Runtime configuration for the bipartite Ramsey coloring toolkit
"""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Base directory
BASE_DIR = Path(__file__).parent

# Results store
RBL_STORE = os.getenv("RBL_STORE", "data/results.jsonl")
TOOL_VERSION = os.getenv("TOOL_VERSION", "1.0.0")

# Logging Configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("LOG_FILE", "")

# Randomness and parallelism
DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", 42))
JOBS = int(os.getenv("JOBS", 1))

# Exact search budget (per feasible call)
NODE_LIMIT = int(os.getenv("NODE_LIMIT", 10**8))
TIME_LIMIT = float(os.getenv("TIME_LIMIT", 300))
COPY_LIMIT = int(os.getenv("COPY_LIMIT", 10**6))

# Energy graphs
ENERGY_TUPLE_LIMIT = int(os.getenv("ENERGY_TUPLE_LIMIT", 10**6))
ENERGY_EDGE_LIMIT = int(os.getenv("ENERGY_EDGE_LIMIT", 5 * 10**6))
PARTITION_RETRIES = int(os.getenv("PARTITION_RETRIES", 32))
# Empty means ceil(log2 n)
RARE_COLOR_THRESHOLD = os.getenv("RARE_COLOR_THRESHOLD", "")
DETECTOR_BUDGET = int(os.getenv("DETECTOR_BUDGET", 10**6))

# Hypergraph construction
SPLIT_RETRIES = int(os.getenv("SPLIT_RETRIES", 64))
SPARSITY_BUDGET = int(os.getenv("SPARSITY_BUDGET", 2 * 10**6))

# Production Settings
DEBUG = os.getenv("DEBUG", "false").lower() == "true"
