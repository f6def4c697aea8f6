"""Shared plumbing: reproducible RNG streams, hashing, thread count."""

import hashlib
import json
import os

import numpy as np


def rng_for(seed, stream=0):
    """Philox generator for (seed, stream); independent across streams."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def stable_hash(obj):
    """Short sha256 hex digest of a JSON-serializable object."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]


def thread_count():
    """Worker count for batch runs; CORRINEQ_THREADS, default 1."""
    try:
        return max(1, int(os.environ.get("CORRINEQ_THREADS", "1")))
    except ValueError:
        return 1
